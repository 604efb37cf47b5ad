#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <unistd.h>

#include "fairlens/config.hpp"
#include "fairlens/datagen.hpp"
#include "fairlens/errors.hpp"
#include "fairlens/io.hpp"
#include "fairlens/model.hpp"
#include "fairlens/scoring.hpp"

using namespace fairlens;
using namespace fairlens::config;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("fairlens_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

data::Dataset small_scored_dataset(int n, std::uint64_t seed = 42) {
    data::GenConfig gcfg;
    gcfg.n_profiles = n;
    gcfg.seed = seed;
    data::Dataset ds = data::generate_dataset(gcfg);
    scoring::score_dataset(ds, scoring::ScoreWeights{}, scoring::BiasSpec::gender_default(),
                           scoring::BiasSpec::ethnicity_default(), seed);
    return ds;
}

}  // anonymous namespace

TEST_CASE("config defaults follow the published recipe") {
    RunConfig cfg;
    CHECK(cfg.train.epochs == 16);
    CHECK(cfg.train.batch_size == 128);
    CHECK(cfg.train.adam_alpha == 0.001);
    CHECK(cfg.train.adam_beta1 == 0.9);
    CHECK(cfg.train.adam_beta2 == 0.999);
    CHECK(cfg.top_k == 1000);
    CHECK(cfg.gen.n_profiles == 24000);
    CHECK(cfg.gen.train_fraction == 0.8);
    CHECK(cfg.gender_bias.penalty == 0.2);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config parsing applies overrides and rejects unknown keys") {
    RunConfig cfg = parse_config_text(
        "# comment\n"
        "seed = 7\n"
        "n_profiles = 240\n"
        "alpha = 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1\n"
        "alpha_s = 0.3\n"
        "gender_penalty = 0.1\n"
        "k = 50\n");
    CHECK(cfg.seed == 7);
    CHECK(cfg.gen.seed == 7);
    CHECK(cfg.train.seed == 7);
    CHECK(cfg.gen.n_profiles == 240);
    CHECK(cfg.weights.alpha[0] == 0.1);
    CHECK(cfg.gender_bias.penalty == 0.1);
    CHECK(cfg.top_k == 50);

    CHECK_THROWS_WITH_AS(parse_config_text("no_such_key = 1\n"),
                         "unknown config key 'no_such_key'", ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed 7\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("alpha = 0.1,0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("epochs = sixteen\n"), ConfigError);
}

TEST_CASE("config echo round-trips through the parser") {
    RunConfig cfg;
    cfg.set("seed", "11");
    cfg.set("gender_penalty", "0.3");
    std::string text;
    for (const auto& [k, v] : cfg.echo()) {
        if (k == "adam_eps" || k == "boosted_ethnicity") continue;  // reporting-only keys
        text += k + " = " + v + "\n";
    }
    text += "boosted_ethnicity = 0\n";
    const RunConfig back = parse_config_text(text);
    CHECK(back.echo() == cfg.echo());
}

TEST_CASE("dataset jsonl round trip is exact") {
    TempDir tmp;
    data::Dataset ds = small_scored_dataset(240);
    const std::string path = tmp.file("dataset.jsonl");
    io::write_dataset_jsonl(ds, path);

    data::Dataset back = io::read_dataset_jsonl(path);
    data::assign_split(back, 42, 0.8);
    REQUIRE(back.profiles.size() == ds.profiles.size());
    CHECK(back.train_ids == ds.train_ids);
    CHECK(back.val_ids == ds.val_ids);

    // byte-exact re-serialization
    CHECK(io::dataset_to_jsonl(back) == io::dataset_to_jsonl(ds));

    // field names are part of the format
    const std::string jsonl = io::dataset_to_jsonl(ds);
    const std::string first_line = jsonl.substr(0, jsonl.find('\n'));
    for (const char* field :
         {"\"id\"", "\"gender\"", "\"ethnicity\"", "\"name\"", "\"occupation_id\"",
          "\"sector_id\"", "\"suitability\"", "\"competencies\"", "\"face\"",
          "\"agnostic_face\"", "\"bio\"", "\"blind_bio\"", "\"score_u\"", "\"score_g\"",
          "\"score_e\""}) {
        CHECK(first_line.find(field) != std::string::npos);
    }
}

TEST_CASE("model checkpoints reload to identical predictions") {
    TempDir tmp;
    const data::Dataset ds = small_scored_dataset(240);
    model::TrainConfig tcfg;
    tcfg.epochs = 2;
    const model::TrainResult r = model::train(ds, model::ScenarioSpec{}, tcfg);

    const std::string path = tmp.file("model.json");
    io::save_model(r.params, path);
    const model::ModelParams loaded = io::load_model(path);

    CHECK(model::flatten_params(loaded) == model::flatten_params(r.params));
    CHECK(loaded.scenario.kind == r.params.scenario.kind);
    const auto a = model::predict_split(r.params, ds, model::Split::val);
    const auto b = model::predict_split(loaded, ds, model::Split::val);
    CHECK(a == b);
}

TEST_CASE("missing checkpoint is a state error") {
    CHECK_THROWS_AS(io::load_model("/nonexistent/model.json"), StateError);
    CHECK_THROWS_AS(io::load_transform("/nonexistent/transform.json"), StateError);
}

TEST_CASE("transform checkpoints reload to identical outputs") {
    TempDir tmp;
    const agnostic::AgnosticTransform t = agnostic::init_transform(3);
    const std::string path = tmp.file("transform.json");
    io::save_transform(t, path);
    const agnostic::AgnosticTransform loaded = io::load_transform(path);

    RngStream rng(5, 6);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> f(data::kFaceDim);
        double n = 0;
        for (double& v : f) {
            v = rng.normal(0, 1);
            n += v * v;
        }
        for (double& v : f) v /= std::sqrt(n);
        CHECK(agnostic::apply_transform(t, f) == agnostic::apply_transform(loaded, f));
    }
}

TEST_CASE("report json carries the leakage key and config echo") {
    const data::Dataset ds = small_scored_dataset(240);
    std::map<int, double> preds;
    for (int id : ds.val_ids) preds[id] = ds.profiles[id].scores->t_u;

    fairness::FairnessReport rep =
        fairness::build_report(ds, preds, "neutral", 10, std::nullopt);
    RunConfig cfg;
    rep.config_echo = cfg.echo();

    const std::string j = io::report_to_json(rep);
    CHECK(j.find("\"leakage\": null") != std::string::npos);
    CHECK(j.find("\"config\"") != std::string::npos);
    CHECK(j.find("\"histograms\"") != std::string::npos);
    CHECK(j.find("\"ethnicity_p1\"") != std::string::npos);

    probes::ProbeResult pr;
    pr.val_accuracy = 0.75;
    rep.has_leakage = true;
    rep.leakage = {pr};
    const std::string j2 = io::report_to_json(rep);
    CHECK(j2.find("\"leakage\"") != std::string::npos);
    CHECK(j2.find("\"logistic\"") != std::string::npos);

    const std::string csv = io::report_csv_header() + io::report_csv_row(rep);
    CHECK(csv.find("scenario,") == 0);
    CHECK(csv.find("neutral,") != std::string::npos);
}

TEST_CASE("loss csv has one row per epoch") {
    TempDir tmp;
    const std::string path = tmp.file("loss.csv");
    io::write_loss_csv({0.5, 0.25, 0.125}, path);
    const std::string text = io::read_text_file(path);
    int lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 4);  // header + 3 epochs
    CHECK(text.find("epoch,train_mae") == 0);
}

TEST_CASE("file hashing is content determined") {
    TempDir tmp;
    io::write_text_file(tmp.file("a.txt"), "same content");
    io::write_text_file(tmp.file("b.txt"), "same content");
    io::write_text_file(tmp.file("c.txt"), "different content");
    CHECK(io::file_hash(tmp.file("a.txt")) == io::file_hash(tmp.file("b.txt")));
    CHECK(io::file_hash(tmp.file("a.txt")) != io::file_hash(tmp.file("c.txt")));
}
