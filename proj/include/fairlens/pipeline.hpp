#pragma once

#include <string>
#include <vector>

#include "fairlens/config.hpp"
#include "fairlens/fairness.hpp"
#include "fairlens/model.hpp"

namespace fairlens::pipeline {

struct ArtifactPaths {
    std::string root;
    explicit ArtifactPaths(std::string dir) : root(std::move(dir)) {}

    std::string dataset() const { return root + "/dataset.jsonl"; }
    std::string resolved_config() const { return root + "/resolved_config.json"; }
    std::string transform() const { return root + "/transform.json"; }
    std::string model(const std::string& label) const {
        return root + "/model_" + label + ".json";
    }
    std::string loss_csv(const std::string& label) const {
        return root + "/loss_" + label + ".csv";
    }
    std::string report_json(const std::string& label) const {
        return root + "/report_" + label + ".json";
    }
    std::string report_csv(const std::string& label) const {
        return root + "/report_" + label + ".csv";
    }
    std::string comparison_md() const { return root + "/comparison.md"; }
    std::string comparison_csv() const { return root + "/comparison.csv"; }
};

// The five scenario runs of a full experiment, in execution order.
const std::vector<model::ScenarioSpec>& standard_scenarios();

struct DebiasAudit {
    double gender_before = 0.0;
    double gender_after = 0.0;
    double ethnicity_before = 0.0;
    double ethnicity_after = 0.0;
};

void run_generate(const config::RunConfig& cfg, const std::string& out_dir);
DebiasAudit run_debias(const config::RunConfig& cfg, const std::string& out_dir);
std::vector<double> run_train(const config::RunConfig& cfg, const std::string& out_dir,
                              const model::ScenarioSpec& scenario);
fairness::FairnessReport run_audit(const config::RunConfig& cfg, const std::string& out_dir,
                                   const model::ScenarioSpec& scenario);
std::vector<fairness::FairnessReport> run_full(const config::RunConfig& cfg,
                                               const std::string& out_dir, bool force);

}  // namespace fairlens::pipeline
