#include "fairlens/pipeline.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "fairlens/agnostic.hpp"
#include "fairlens/errors.hpp"
#include "fairlens/io.hpp"
#include "fairlens/probes.hpp"
#include "fairlens/scoring.hpp"

namespace fairlens::pipeline {

namespace {

namespace fs = std::filesystem;

void write_resolved_config(const config::RunConfig& cfg, const ArtifactPaths& paths) {
    nlohmann::ordered_json j;
    for (const auto& [key, value] : cfg.echo()) j[key] = value;
    io::write_text_file(paths.resolved_config(), j.dump(2) + "\n");
}

data::Dataset load_dataset(const config::RunConfig& cfg, const ArtifactPaths& paths,
                           const char* needed_by) {
    if (!io::file_exists(paths.dataset()))
        throw StateError(std::string("dataset '") + paths.dataset() + "' does not exist; run " +
                         needed_by + " first");
    data::Dataset ds = io::read_dataset_jsonl(paths.dataset());
    data::assign_split(ds, cfg.gen.seed, cfg.gen.train_fraction);
    return ds;
}

double fresh_probe_accuracy(const std::vector<std::vector<double>>& xtr,
                            const std::vector<int>& ytr,
                            const std::vector<std::vector<double>>& xval,
                            const std::vector<int>& yval, int n_classes, std::uint64_t seed) {
    const probes::ProbeModel probe =
        probes::train_probe(xtr, ytr, probes::ProbeKind::logistic, n_classes, seed);
    return probes::eval_probe(probe, xval, yval);
}

}  // namespace

const std::vector<model::ScenarioSpec>& standard_scenarios() {
    static const std::vector<model::ScenarioSpec> scenarios = {
        {model::ScenarioKind::neutral, scoring::BiasAttribute::gender},
        {model::ScenarioKind::biased, scoring::BiasAttribute::gender},
        {model::ScenarioKind::biased, scoring::BiasAttribute::ethnicity},
        {model::ScenarioKind::agnostic, scoring::BiasAttribute::gender},
        {model::ScenarioKind::agnostic, scoring::BiasAttribute::ethnicity},
    };
    return scenarios;
}

void run_generate(const config::RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    const ArtifactPaths paths(out_dir);

    data::Dataset ds = data::generate_dataset(cfg.gen);
    const int overwritten =
        scoring::score_dataset(ds, cfg.weights, cfg.gender_bias, cfg.ethnicity_bias, cfg.seed);
    if (overwritten > 0)
        std::printf("warning: %d profiles had scores overwritten\n", overwritten);

    io::write_dataset_jsonl(ds, paths.dataset());
    write_resolved_config(cfg, paths);

    // per-cell balance summary
    int cells[2][3][4] = {};
    for (const auto& p : ds.profiles)
        cells[p.demographics.gender][p.demographics.ethnicity][p.occupation.sector_id] += 1;
    std::printf("generated %zu profiles (%zu train / %zu val) -> %s\n", ds.profiles.size(),
                ds.train_ids.size(), ds.val_ids.size(), paths.dataset().c_str());
    for (int g = 0; g < 2; ++g)
        for (int e = 0; e < 3; ++e)
            std::printf("  gender=%d ethnicity=%d sectors: %d %d %d %d\n", g, e, cells[g][e][0],
                        cells[g][e][1], cells[g][e][2], cells[g][e][3]);
}

DebiasAudit run_debias(const config::RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const ArtifactPaths paths(out_dir);
    data::Dataset ds = load_dataset(cfg, paths, "generate");

    std::vector<std::vector<double>> train_faces;
    std::vector<data::Demographics> train_demo;
    train_faces.reserve(ds.train_ids.size());
    for (int id : ds.train_ids) {
        train_faces.push_back(ds.profiles[id].face);
        train_demo.push_back(ds.profiles[id].demographics);
    }

    agnostic::RemovalConfig rcfg = cfg.removal;
    const agnostic::AgnosticTransform transform =
        agnostic::train_agnostic_transform(train_faces, train_demo, rcfg);
    for (auto& p : ds.profiles) p.agnostic_face = agnostic::apply_transform(transform, p.face);

    io::write_dataset_jsonl(ds, paths.dataset());
    io::save_transform(transform, paths.transform());
    write_resolved_config(cfg, paths);

    // Removal audit with fresh probes, raw vs transformed, train -> val.
    std::vector<std::vector<double>> xtr_raw, xval_raw, xtr_t, xval_t;
    std::vector<int> gtr, gval, etr, ev;
    for (int id : ds.train_ids) {
        xtr_raw.push_back(ds.profiles[id].face);
        xtr_t.push_back(*ds.profiles[id].agnostic_face);
        gtr.push_back(ds.profiles[id].demographics.gender);
        etr.push_back(ds.profiles[id].demographics.ethnicity);
    }
    for (int id : ds.val_ids) {
        xval_raw.push_back(ds.profiles[id].face);
        xval_t.push_back(*ds.profiles[id].agnostic_face);
        gval.push_back(ds.profiles[id].demographics.gender);
        ev.push_back(ds.profiles[id].demographics.ethnicity);
    }
    DebiasAudit audit;
    audit.gender_before = fresh_probe_accuracy(xtr_raw, gtr, xval_raw, gval, 2, cfg.seed + 1);
    audit.gender_after = fresh_probe_accuracy(xtr_t, gtr, xval_t, gval, 2, cfg.seed + 2);
    audit.ethnicity_before = fresh_probe_accuracy(xtr_raw, etr, xval_raw, ev, 3, cfg.seed + 3);
    audit.ethnicity_after = fresh_probe_accuracy(xtr_t, etr, xval_t, ev, 3, cfg.seed + 4);
    std::printf(
        "debias: fresh gender probe %.4f -> %.4f, ethnicity probe %.4f -> %.4f -> %s\n",
        audit.gender_before, audit.gender_after, audit.ethnicity_before, audit.ethnicity_after,
        paths.transform().c_str());
    return audit;
}

std::vector<double> run_train(const config::RunConfig& cfg, const std::string& out_dir,
                              const model::ScenarioSpec& scenario) {
    cfg.validate();
    const ArtifactPaths paths(out_dir);
    data::Dataset ds = load_dataset(cfg, paths, "generate");

    if (scenario.uses_agnostic_inputs()) {
        for (const auto& p : ds.profiles)
            if (!p.agnostic_face.has_value())
                throw StateError("agnostic scenario needs agnostic face embeddings; run debias "
                                 "first");
    }

    model::TrainConfig tcfg = cfg.train;
    const model::TrainResult result = model::train(ds, scenario, tcfg);
    io::save_model(result.params, paths.model(scenario.label()));
    io::write_loss_csv(result.loss_history, paths.loss_csv(scenario.label()));
    write_resolved_config(cfg, paths);
    std::printf("trained %s: final train mae %.4f -> %s\n", scenario.label().c_str(),
                result.loss_history.empty() ? 0.0 : result.loss_history.back(),
                paths.model(scenario.label()).c_str());
    return result.loss_history;
}

fairness::FairnessReport run_audit(const config::RunConfig& cfg, const std::string& out_dir,
                                   const model::ScenarioSpec& scenario) {
    cfg.validate();
    const ArtifactPaths paths(out_dir);
    data::Dataset ds = load_dataset(cfg, paths, "generate");
    const model::ModelParams params = io::load_model(paths.model(scenario.label()));

    const auto predictions = model::predict_split(params, ds, model::Split::val);
    const auto leakage = probes::leakage_audit(params, ds, cfg.seed);
    fairness::FairnessReport report =
        fairness::build_report(ds, predictions, scenario.label(), cfg.top_k, leakage);
    report.config_echo = cfg.echo();

    io::write_report_json(report, paths.report_json(scenario.label()));
    io::write_text_file(paths.report_csv(scenario.label()),
                        io::report_csv_header() + io::report_csv_row(report));
    std::printf("audited %s: gender p%% %.2f%s, mean ethnicity KL %.4f -> %s\n",
                scenario.label().c_str(), report.p_gender,
                report.flag_gender ? " (four-fifths violation)" : "", report.kl_ethnicity.mean,
                paths.report_json(scenario.label()).c_str());
    return report;
}

std::vector<fairness::FairnessReport> run_full(const config::RunConfig& cfg,
                                               const std::string& out_dir, bool force) {
    cfg.validate();
    if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
        if (!force)
            throw StateError("output directory '" + out_dir +
                             "' is not empty; pass --force to overwrite");
        fs::remove_all(out_dir);
    }
    fs::create_directories(out_dir);

    run_generate(cfg, out_dir);
    run_debias(cfg, out_dir);

    std::vector<fairness::FairnessReport> reports;
    for (const auto& scenario : standard_scenarios()) {
        run_train(cfg, out_dir, scenario);
        reports.push_back(run_audit(cfg, out_dir, scenario));
    }

    // Comparison table over all scenarios, one row each.
    std::string md =
        "| Scenario | Male | Female | p% | Group 1 | Group 2 | Group 3 | p1% | p2% | p3% |\n"
        "|---|---|---|---|---|---|---|---|---|---|\n";
    std::string csv =
        "scenario,male_share,female_share,p_gender,g1_share,g2_share,g3_share,p1,p2,p3\n";
    for (const auto& r : reports) {
        char md_row[512], csv_row[512];
        std::snprintf(md_row, sizeof(md_row),
                      "| %s | %.2f%% | %.2f%% | %.2f%% | %.2f%% | %.2f%% | %.2f%% | %.2f%% | "
                      "%.2f%% | %.2f%% |\n",
                      r.scenario.c_str(), r.share_gender[0], r.share_gender[1], r.p_gender,
                      r.share_ethnicity[0], r.share_ethnicity[1], r.share_ethnicity[2],
                      r.p_ethnicity[0], r.p_ethnicity[1], r.p_ethnicity[2]);
        std::snprintf(csv_row, sizeof(csv_row), "%s,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f\n",
                      r.scenario.c_str(), r.share_gender[0], r.share_gender[1], r.p_gender,
                      r.share_ethnicity[0], r.share_ethnicity[1], r.share_ethnicity[2],
                      r.p_ethnicity[0], r.p_ethnicity[1], r.p_ethnicity[2]);
        md += md_row;
        csv += csv_row;
    }
    const ArtifactPaths paths(out_dir);
    io::write_text_file(paths.comparison_md(), md);
    io::write_text_file(paths.comparison_csv(), csv);
    std::printf("full run complete: %zu reports + comparison table in %s\n", reports.size(),
                out_dir.c_str());
    return reports;
}

}  // namespace fairlens::pipeline
