#include "fairlens/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairlens/errors.hpp"

namespace fairlens::fairness {

ScoreHistogram ScoreHistogram::from_scores(const std::vector<double>& scores, int bins) {
    if (bins <= 0) throw ArgumentError("histogram needs at least one bin");
    ScoreHistogram h;
    h.counts.assign(bins, 0);
    for (double s : scores) h.add(s);
    return h;
}

void ScoreHistogram::add(double value) {
    const int bins = static_cast<int>(counts.size());
    int idx = static_cast<int>(value * bins);
    idx = std::min(bins - 1, std::max(0, idx));
    counts[idx] += 1;
    total += 1;
}

double kl_divergence(const ScoreHistogram& p, const ScoreHistogram& q) {
    if (p.counts.size() != q.counts.size())
        throw ArgumentError("kl_divergence requires identical binning");
    if (p.total < 1 || q.total < 1)
        throw ArgumentError("kl_divergence requires non-empty histograms");

    const double bins = static_cast<double>(p.counts.size());
    const double pd = static_cast<double>(p.total) + bins * ScoreHistogram::kSmoothing;
    const double qd = static_cast<double>(q.total) + bins * ScoreHistogram::kSmoothing;
    double kl = 0.0;
    for (std::size_t i = 0; i < p.counts.size(); ++i) {
        const double pi = (static_cast<double>(p.counts[i]) + ScoreHistogram::kSmoothing) / pd;
        const double qi = (static_cast<double>(q.counts[i]) + ScoreHistogram::kSmoothing) / qd;
        kl += pi * std::log(pi / qi);
    }
    return std::max(0.0, kl);
}

EthnicityKl ethnicity_kl(const std::array<ScoreHistogram, 3>& distributions) {
    EthnicityKl r;
    r.g1_vs_g2 = kl_divergence(distributions[0], distributions[1]);
    r.g1_vs_g3 = kl_divergence(distributions[0], distributions[2]);
    r.g2_vs_g3 = kl_divergence(distributions[1], distributions[2]);
    r.mean = (r.g1_vs_g2 + r.g1_vs_g3 + r.g2_vs_g3) / 3.0;
    return r;
}

TopKSelection select_top_k(const std::map<int, double>& scores, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > scores.size())
        throw ArgumentError("top-k size exceeds the scored pool");

    std::vector<std::pair<int, double>> ranked(scores.begin(), scores.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    TopKSelection sel;
    sel.k = k;
    sel.selected_ids.reserve(k);
    for (int i = 0; i < k; ++i) sel.selected_ids.push_back(ranked[i].first);
    return sel;
}

std::vector<int> tally_groups(const TopKSelection& selection, const std::map<int, int>& group_of,
                              int n_groups) {
    std::vector<int> counts(n_groups, 0);
    for (int id : selection.selected_ids) {
        const auto it = group_of.find(id);
        if (it == group_of.end()) throw ArgumentError("selected id has no group label");
        counts.at(it->second) += 1;
    }
    return counts;
}

double p_percent(int selected_a, int pool_a, int selected_b, int pool_b) {
    if (pool_a <= 0 || pool_b <= 0) throw ArgumentError("p_percent needs non-empty pools");
    if (selected_a == 0 && selected_b == 0)
        throw ArgumentError("p_percent is undefined when both selection rates are zero");
    const double rate_a = static_cast<double>(selected_a) / pool_a;
    const double rate_b = static_cast<double>(selected_b) / pool_b;
    if (rate_a == 0.0 || rate_b == 0.0) return 0.0;
    return 100.0 * std::min(rate_a / rate_b, rate_b / rate_a);
}

bool four_fifths_flag(double p_score) { return p_score < 80.0; }

FairnessReport build_report(const data::Dataset& dataset,
                            const std::map<int, double>& predictions,
                            const std::string& scenario_label, int k,
                            const std::optional<std::vector<probes::ProbeResult>>& probe_results) {
    if (predictions.size() != dataset.val_ids.size())
        throw ArgumentError("predictions must cover exactly the validation split");
    for (int id : dataset.val_ids)
        if (!predictions.count(id))
            throw ArgumentError("prediction missing for validation id " + std::to_string(id));

    FairnessReport rep;
    rep.scenario = scenario_label;
    rep.k = k;
    rep.pool_size = static_cast<int>(predictions.size());

    std::vector<double> male_scores, female_scores;
    std::array<std::vector<double>, 3> eth_scores;
    std::map<int, int> gender_of, ethnicity_of;
    std::array<int, 2> gender_pool = {0, 0};
    std::array<int, 3> eth_pool = {0, 0, 0};
    for (int id : dataset.val_ids) {
        const data::Profile& p = dataset.profiles[id];
        const double s = predictions.at(id);
        (p.demographics.gender == 0 ? male_scores : female_scores).push_back(s);
        eth_scores[p.demographics.ethnicity].push_back(s);
        gender_of[id] = p.demographics.gender;
        ethnicity_of[id] = p.demographics.ethnicity;
        gender_pool[p.demographics.gender] += 1;
        eth_pool[p.demographics.ethnicity] += 1;
    }

    rep.hist_male = ScoreHistogram::from_scores(male_scores);
    rep.hist_female = ScoreHistogram::from_scores(female_scores);
    for (int e = 0; e < 3; ++e) rep.hist_ethnicity[e] = ScoreHistogram::from_scores(eth_scores[e]);

    rep.kl_gender = kl_divergence(rep.hist_male, rep.hist_female);
    rep.kl_ethnicity = ethnicity_kl(rep.hist_ethnicity);

    const TopKSelection sel = select_top_k(predictions, k);
    const std::vector<int> g_counts = tally_groups(sel, gender_of, 2);
    const std::vector<int> e_counts = tally_groups(sel, ethnicity_of, 3);
    rep.top_gender = {g_counts[0], g_counts[1]};
    rep.top_ethnicity = {e_counts[0], e_counts[1], e_counts[2]};
    for (int g = 0; g < 2; ++g) rep.share_gender[g] = 100.0 * g_counts[g] / sel.k;
    for (int e = 0; e < 3; ++e) rep.share_ethnicity[e] = 100.0 * e_counts[e] / sel.k;

    // A pair with both rates zero has no defined ratio; report maximal
    // disparity so the four-fifths flag still fires.
    auto safe_p = [](int sa, int pa, int sb, int pb) {
        try {
            return p_percent(sa, pa, sb, pb);
        } catch (const ArgumentError&) {
            return 0.0;
        }
    };
    rep.p_gender = safe_p(g_counts[0], gender_pool[0], g_counts[1], gender_pool[1]);
    rep.p_ethnicity[0] = safe_p(e_counts[0], eth_pool[0], e_counts[1], eth_pool[1]);
    rep.p_ethnicity[1] = safe_p(e_counts[0], eth_pool[0], e_counts[2], eth_pool[2]);
    rep.p_ethnicity[2] = safe_p(e_counts[1], eth_pool[1], e_counts[2], eth_pool[2]);
    rep.flag_gender = four_fifths_flag(rep.p_gender);
    for (int i = 0; i < 3; ++i) rep.flag_ethnicity[i] = four_fifths_flag(rep.p_ethnicity[i]);

    if (probe_results.has_value()) {
        rep.has_leakage = true;
        rep.leakage = *probe_results;
    }
    return rep;
}

}  // namespace fairlens::fairness
