#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "fairlens/datagen.hpp"
#include "fairlens/rng.hpp"

namespace fairlens::scoring {

using data::TargetScores;

// Weights of the linear ground-truth score. Defaults put the most weight on
// experience and education; the maxima sum to exactly 1 so unclipped scores
// stay in [0, 1] up to the beta noise.
struct ScoreWeights {
    std::array<double, 7> alpha = {0.2, 0.05, 0.05, 0.25, 0.05, 0.05, 0.05};
    double alpha_s = 0.3;
    double beta_sigma = 0.01;

    void validate() const;  // throws ConfigError
};

enum class BiasAttribute : std::uint8_t { gender, ethnicity };

struct BiasSpec {
    BiasAttribute attribute = BiasAttribute::gender;
    double penalty = 0.2;  // T_delta
    int penalized_group = 1;
    std::optional<int> boosted_group;  // ethnicity only

    static BiasSpec gender_default();     // penalizes the female group
    static BiasSpec ethnicity_default();  // penalizes group 2, boosts group 0

    void validate() const;  // throws ConfigError
};

// T_U = clamp01(beta + sum_i alpha_i x_i + alpha_s S), beta ~ N(0, sigma^2).
double unbiased_score(const data::Competencies& competencies, double suitability,
                      const ScoreWeights& weights, RngStream& rng);

double apply_bias(double t_u, const data::Demographics& demo, const BiasSpec& spec);

// Fills t_u / t_g / t_e for every profile; the beta draw is shared across
// the three targets so the penalty is the only difference. Returns how many
// profiles already carried scores (overwritten with a warning count).
int score_dataset(data::Dataset& dataset, const ScoreWeights& weights,
                  const BiasSpec& gender_spec, const BiasSpec& ethnicity_spec,
                  std::uint64_t seed);

}  // namespace fairlens::scoring
