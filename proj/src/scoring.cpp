#include "fairlens/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairlens/errors.hpp"

namespace fairlens::scoring {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Maxima of the competency domains, in x1..x7 order; recommendation tops
// out at 1 like the rest.
constexpr std::array<double, 7> kDomainMax = {1, 1, 1, 1, 1, 1, 1};
constexpr double kSuitabilityMax = 1.0;

}  // namespace

void ScoreWeights::validate() const {
    double reach = alpha_s * kSuitabilityMax;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] < 0.0) throw ConfigError("score weight alpha must be >= 0");
        reach += alpha[i] * kDomainMax[i];
    }
    if (alpha_s < 0.0) throw ConfigError("score weight alpha_s must be >= 0");
    if (reach > 1.0 + 1e-12)
        throw ConfigError("score weights reach " + std::to_string(reach) +
                          " at maximal inputs; must stay <= 1");
    if (beta_sigma < 0.0) throw ConfigError("beta_sigma must be >= 0");
}

BiasSpec BiasSpec::gender_default() {
    BiasSpec s;
    s.attribute = BiasAttribute::gender;
    s.penalty = 0.2;
    s.penalized_group = 1;
    return s;
}

BiasSpec BiasSpec::ethnicity_default() {
    BiasSpec s;
    s.attribute = BiasAttribute::ethnicity;
    s.penalty = 0.2;
    s.penalized_group = 2;
    s.boosted_group = 0;
    return s;
}

void BiasSpec::validate() const {
    if (penalty < 0.0 || penalty > 0.5)
        throw ConfigError("bias penalty must lie in [0, 0.5]");
    if (boosted_group && *boosted_group == penalized_group)
        throw ConfigError("penalized and boosted group must differ");
    const int n_groups = attribute == BiasAttribute::gender ? 2 : 3;
    if (penalized_group < 0 || penalized_group >= n_groups)
        throw ConfigError("penalized group id out of range");
    if (boosted_group && (*boosted_group < 0 || *boosted_group >= n_groups))
        throw ConfigError("boosted group id out of range");
}

double unbiased_score(const data::Competencies& competencies, double suitability,
                      const ScoreWeights& weights, RngStream& rng) {
    const auto x = competencies.as_array();
    double t = rng.normal(0.0, weights.beta_sigma);
    for (std::size_t i = 0; i < x.size(); ++i) t += weights.alpha[i] * x[i];
    t += weights.alpha_s * suitability;
    return clamp01(t);
}

double apply_bias(double t_u, const data::Demographics& demo, const BiasSpec& spec) {
    const int group =
        spec.attribute == BiasAttribute::gender ? demo.gender : demo.ethnicity;
    if (group == spec.penalized_group) return clamp01(t_u - spec.penalty);
    if (spec.boosted_group && group == *spec.boosted_group) return clamp01(t_u + spec.penalty);
    return t_u;
}

int score_dataset(data::Dataset& dataset, const ScoreWeights& weights,
                  const BiasSpec& gender_spec, const BiasSpec& ethnicity_spec,
                  std::uint64_t seed) {
    weights.validate();
    gender_spec.validate();
    ethnicity_spec.validate();

    int overwritten = 0;
    for (data::Profile& p : dataset.profiles) {
        if (p.scores.has_value()) overwritten += 1;
        RngStream rng(seed, stream_id(data::kStreamScoreNoise, static_cast<std::uint64_t>(p.id)));
        data::TargetScores s;
        s.t_u = unbiased_score(p.competencies, p.occupation.suitability, weights, rng);
        s.t_g = apply_bias(s.t_u, p.demographics, gender_spec);
        s.t_e = apply_bias(s.t_u, p.demographics, ethnicity_spec);
        p.scores = s;
    }
    return overwritten;
}

}  // namespace fairlens::scoring
