#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairlens/datagen.hpp"
#include "fairlens/probes.hpp"

namespace fairlens::fairness {

struct ScoreHistogram {
    std::vector<std::int64_t> counts;  // uniform bins over [0, 1]
    std::int64_t total = 0;
    static constexpr double kSmoothing = 1e-6;

    static ScoreHistogram from_scores(const std::vector<double>& scores, int bins = 50);
    void add(double value);
};

// KL(P || Q) in nats over epsilon-smoothed normalized bins.
double kl_divergence(const ScoreHistogram& p, const ScoreHistogram& q);

struct EthnicityKl {
    double g1_vs_g2 = 0.0;
    double g1_vs_g3 = 0.0;
    double g2_vs_g3 = 0.0;
    double mean = 0.0;
};

EthnicityKl ethnicity_kl(const std::array<ScoreHistogram, 3>& distributions);

struct TopKSelection {
    int k = 0;
    std::vector<int> selected_ids;  // score-descending, ties by ascending id
    std::vector<int> group_counts;  // filled by tally_groups
};

TopKSelection select_top_k(const std::map<int, double>& scores, int k);
std::vector<int> tally_groups(const TopKSelection& selection,
                              const std::map<int, int>& group_of, int n_groups);

// 100 * min(rate_a / rate_b, rate_b / rate_a); rates are selected / pool.
double p_percent(int selected_a, int pool_a, int selected_b, int pool_b);

// True flags potential disparate impact (p% strictly below 80).
bool four_fifths_flag(double p_score);

struct FairnessReport {
    std::string scenario;
    int k = 0;
    int pool_size = 0;

    double kl_gender = 0.0;  // KL(male || female)
    EthnicityKl kl_ethnicity;

    std::array<int, 2> top_gender = {0, 0};  // male, female
    std::array<int, 3> top_ethnicity = {0, 0, 0};
    std::array<double, 2> share_gender = {0.0, 0.0};  // percent of top-k
    std::array<double, 3> share_ethnicity = {0.0, 0.0, 0.0};

    double p_gender = 0.0;
    std::array<double, 3> p_ethnicity = {0.0, 0.0, 0.0};  // G1vG2, G1vG3, G2vG3
    bool flag_gender = false;
    std::array<bool, 3> flag_ethnicity = {false, false, false};

    ScoreHistogram hist_male, hist_female;
    std::array<ScoreHistogram, 3> hist_ethnicity;

    bool has_leakage = false;
    std::vector<probes::ProbeResult> leakage;

    std::map<std::string, std::string> config_echo;
};

// Aggregates one scenario's validation predictions into the report.
// predictions must cover exactly the validation split.
FairnessReport build_report(const data::Dataset& dataset,
                            const std::map<int, double>& predictions,
                            const std::string& scenario_label, int k,
                            const std::optional<std::vector<probes::ProbeResult>>& probe_results);

}  // namespace fairlens::fairness
