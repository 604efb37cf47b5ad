#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "fairlens/config.hpp"
#include "fairlens/errors.hpp"
#include "fairlens/pipeline.hpp"

namespace {

using fairlens::config::RunConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitState = 3;
constexpr int kExitIo = 4;
constexpr int kExitNumeric = 5;

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::string scenario = "neutral";
    std::string bias_attr = "gender";
    long long seed = -1;
    double penalty = -1.0;
    int k = -1;
    int n_profiles = -1;
    bool force = false;
};

RunConfig resolve_config(const CliOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) cfg = fairlens::config::load_config_file(opt.config_path);
    if (opt.seed >= 0) cfg.set("seed", std::to_string(opt.seed));
    if (opt.n_profiles >= 0) cfg.set("n_profiles", std::to_string(opt.n_profiles));
    if (opt.penalty >= 0.0) {
        cfg.set("gender_penalty", std::to_string(opt.penalty));
        cfg.set("ethnicity_penalty", std::to_string(opt.penalty));
    }
    if (opt.k >= 0) cfg.set("k", std::to_string(opt.k));
    cfg.validate();
    return cfg;
}

fairlens::model::ScenarioSpec resolve_scenario(const CliOptions& opt) {
    fairlens::model::ScenarioSpec spec;
    if (opt.scenario == "neutral")
        spec.kind = fairlens::model::ScenarioKind::neutral;
    else if (opt.scenario == "biased")
        spec.kind = fairlens::model::ScenarioKind::biased;
    else if (opt.scenario == "agnostic")
        spec.kind = fairlens::model::ScenarioKind::agnostic;
    else
        throw fairlens::ConfigError("unknown scenario '" + opt.scenario +
                                    "' (expected neutral|biased|agnostic)");
    if (opt.bias_attr == "gender")
        spec.bias_attribute = fairlens::scoring::BiasAttribute::gender;
    else if (opt.bias_attr == "ethnicity")
        spec.bias_attribute = fairlens::scoring::BiasAttribute::ethnicity;
    else
        throw fairlens::ConfigError("unknown bias attribute '" + opt.bias_attr +
                                    "' (expected gender|ethnicity)");
    return spec;
}

// FAIRLENS_THREADS caps worker parallelism. Every stage here runs
// single-threaded for bit-reproducibility, which satisfies any cap; the
// value is still validated so misconfiguration fails loudly.
void check_thread_cap() {
    const char* env = std::getenv("FAIRLENS_THREADS");
    if (!env) return;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
        throw fairlens::ConfigError("FAIRLENS_THREADS must be a positive integer");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairlens: synthetic multimodal hiring-bias testbed"};
    app.require_subcommand(1);
    app.fallthrough();  // shared options may follow the subcommand name

    CliOptions opt;
    app.add_option("--config", opt.config_path, "config file (key = value lines)");
    app.add_option("--seed", opt.seed, "override the run seed");
    app.add_option("--n-profiles", opt.n_profiles, "override the profile count");
    app.add_option("--penalty", opt.penalty, "override both bias penalties (T_delta)");
    app.add_option("--k", opt.k, "top-k selection size");
    app.add_option("--out", opt.out_dir, "output directory (default: out)");
    app.add_flag("--force", opt.force, "allow full-run into a non-empty directory");

    auto* gen = app.add_subcommand("generate", "generate and score the synthetic dataset");
    auto* debias = app.add_subcommand("debias", "learn the sensitive-information removal "
                                                "transform and fill agnostic embeddings");
    auto* train = app.add_subcommand("train", "train a scenario model");
    auto* audit = app.add_subcommand("audit", "audit a trained scenario model");
    auto* full = app.add_subcommand("full-run", "generate, debias, train and audit every "
                                                "scenario");
    for (auto* sub : {train, audit}) {
        sub->add_option("--scenario", opt.scenario, "neutral|biased|agnostic");
        sub->add_option("--bias-attr", opt.bias_attr, "gender|ethnicity");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        check_thread_cap();
        const RunConfig cfg = resolve_config(opt);
        if (gen->parsed()) {
            fairlens::pipeline::run_generate(cfg, opt.out_dir);
        } else if (debias->parsed()) {
            fairlens::pipeline::run_debias(cfg, opt.out_dir);
        } else if (train->parsed()) {
            fairlens::pipeline::run_train(cfg, opt.out_dir, resolve_scenario(opt));
        } else if (audit->parsed()) {
            fairlens::pipeline::run_audit(cfg, opt.out_dir, resolve_scenario(opt));
        } else if (full->parsed()) {
            fairlens::pipeline::run_full(cfg, opt.out_dir, opt.force);
        }
        return kExitOk;
    } catch (const fairlens::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const fairlens::ArgumentError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const fairlens::StateError& e) {
        std::fprintf(stderr, "state error: %s\n", e.what());
        return kExitState;
    } catch (const fairlens::DataError& e) {
        std::fprintf(stderr, "state error: %s\n", e.what());
        return kExitState;
    } catch (const fairlens::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const fairlens::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const fairlens::ShapeError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    }
}
