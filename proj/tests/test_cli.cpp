#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "fairlens/io.hpp"

namespace fs = std::filesystem;

namespace {

// CLI-level tests drive the real binary at a scale that keeps each
// invocation around a second.
const char* kFastOverrides =
    " --n-profiles 240 --k 40 --config %CFG% --out %OUT%";

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("fairlens_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string out() const { return (path / "out").string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string fast_config_file(const TempDir& tmp) {
    const std::string path = tmp.file("fast.cfg");
    fairlens::io::write_text_file(path,
                                  "epochs = 2\n"
                                  "removal_epochs = 6\n");
    return path;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FAIRLENS_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string expand(const TempDir& tmp, const std::string& cfg, std::string tail) {
    std::string s = kFastOverrides + tail;
    s.replace(s.find("%CFG%"), 5, cfg);
    s.replace(s.find("%OUT%"), 5, tmp.out());
    return s;
}

int count_lines(const std::string& path) {
    const std::string text = fairlens::io::read_text_file(path);
    int n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // anonymous namespace

TEST_CASE("generate writes the dataset and echoes the config") {
    TempDir tmp;
    const std::string cfg = fast_config_file(tmp);
    REQUIRE(run_cli("generate" + expand(tmp, cfg, "")) == 0);
    CHECK(count_lines(tmp.out() + "/dataset.jsonl") == 240);
    CHECK(fairlens::io::file_exists(tmp.out() + "/resolved_config.json"));
}

TEST_CASE("indivisible profile count exits with the config code") {
    TempDir tmp;
    CHECK(run_cli("generate --n-profiles 23 --out " + tmp.out()) == 2);
    CHECK(run_cli("generate --n-profiles 240 --k 0 --out " + tmp.out()) == 2);
}

TEST_CASE("unknown config key exits with the config code") {
    TempDir tmp;
    fairlens::io::write_text_file(tmp.file("bad.cfg"), "mystery_knob = 1\n");
    CHECK(run_cli("generate --config " + tmp.file("bad.cfg") + " --out " + tmp.out()) == 2);
}

TEST_CASE("pipeline stages require their prerequisites") {
    TempDir tmp;
    const std::string cfg = fast_config_file(tmp);
    // no dataset yet
    CHECK(run_cli("train" + expand(tmp, cfg, " --scenario neutral")) == 3);
    CHECK(run_cli("debias" + expand(tmp, cfg, "")) == 3);

    REQUIRE(run_cli("generate" + expand(tmp, cfg, "")) == 0);
    // agnostic training before debias
    CHECK(run_cli("train" + expand(tmp, cfg, " --scenario agnostic --bias-attr gender")) == 3);
    // audit before training
    CHECK(run_cli("audit" + expand(tmp, cfg, " --scenario neutral")) == 3);
}

TEST_CASE("generate twice with the same seed produces identical bytes") {
    TempDir a, b;
    const std::string cfg_a = fast_config_file(a);
    const std::string cfg_b = fast_config_file(b);
    REQUIRE(run_cli("generate --seed 7" + expand(a, cfg_a, "")) == 0);
    REQUIRE(run_cli("generate --seed 7" + expand(b, cfg_b, "")) == 0);
    CHECK(fairlens::io::file_hash(a.out() + "/dataset.jsonl") ==
          fairlens::io::file_hash(b.out() + "/dataset.jsonl"));

    TempDir c;
    const std::string cfg_c = fast_config_file(c);
    REQUIRE(run_cli("generate --seed 8" + expand(c, cfg_c, "")) == 0);
    CHECK(fairlens::io::file_hash(a.out() + "/dataset.jsonl") !=
          fairlens::io::file_hash(c.out() + "/dataset.jsonl"));
}

TEST_CASE("full run produces five reports, loss curves and the comparison table") {
    TempDir tmp;
    const std::string cfg = fast_config_file(tmp);
    REQUIRE(run_cli("full-run" + expand(tmp, cfg, "")) == 0);

    for (const char* label : {"neutral", "biased_gender", "biased_ethnicity", "agnostic_gender",
                              "agnostic_ethnicity"}) {
        CHECK(fairlens::io::file_exists(tmp.out() + "/model_" + label + ".json"));
        CHECK(fairlens::io::file_exists(tmp.out() + "/report_" + label + ".json"));
        CHECK(count_lines(tmp.out() + "/loss_" + label + ".csv") == 3);  // header + 2 epochs
    }
    CHECK(fairlens::io::file_exists(tmp.out() + "/comparison.md"));
    CHECK(fairlens::io::file_exists(tmp.out() + "/comparison.csv"));
    CHECK(count_lines(tmp.out() + "/comparison.csv") == 6);  // header + 5 scenarios

    // after debias every profile carries an agnostic embedding
    const std::string jsonl = fairlens::io::read_text_file(tmp.out() + "/dataset.jsonl");
    CHECK(jsonl.find("\"agnostic_face\":null") == std::string::npos);

    const std::string md = fairlens::io::read_text_file(tmp.out() + "/comparison.md");
    CHECK(md.find("| Scenario | Male | Female | p% | Group 1 | Group 2 | Group 3 | p1% | p2% | "
                  "p3% |") != std::string::npos);

    // a second full run into the same directory needs --force
    CHECK(run_cli("full-run" + expand(tmp, cfg, "")) == 3);
    CHECK(run_cli("full-run" + expand(tmp, cfg, " --force")) == 0);
}

TEST_CASE("train emits a loss csv row per epoch at the paper defaults") {
    TempDir tmp;
    // defaults: 16 epochs; small n keeps this quick
    REQUIRE(run_cli("generate --n-profiles 240 --out " + tmp.out()) == 0);
    REQUIRE(run_cli("train --n-profiles 240 --scenario neutral --out " + tmp.out()) == 0);
    CHECK(count_lines(tmp.out() + "/loss_neutral.csv") == 17);  // header + 16 epochs
}

TEST_CASE("thread cap env var is validated") {
    TempDir tmp;
    const std::string bin = FAIRLENS_BIN;
    const std::string cmd = "FAIRLENS_THREADS=abc " + bin + " generate --n-profiles 240 --out " +
                            tmp.out() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    const std::string ok_cmd = "FAIRLENS_THREADS=2 " + bin +
                               " generate --n-profiles 240 --out " + tmp.out() +
                               " > /dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(ok_cmd.c_str())) == 0);
}
