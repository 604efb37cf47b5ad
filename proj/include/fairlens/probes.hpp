#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairlens/numerics.hpp"
#include "fairlens/scoring.hpp"

namespace fairlens::model {
struct ModelParams;
}

namespace fairlens::probes {

enum class ProbeKind : std::uint8_t { logistic, linear_svm, mlp };

std::string probe_kind_name(ProbeKind kind);

struct ProbeResult {
    ProbeKind kind = ProbeKind::logistic;
    scoring::BiasAttribute attribute = scoring::BiasAttribute::gender;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double chance_level = 0.5;
};

// Linear or one-hidden-layer classifier head over fixed embeddings. The
// svm kind trains one-vs-rest hinge on the same logit layout.
struct ProbeModel {
    ProbeKind kind = ProbeKind::logistic;
    int n_classes = 2;
    numerics::DenseLayer hidden;  // mlp only: dim -> 16, relu
    numerics::DenseLayer out;     // dim (or 16) -> n_classes, identity logits
};

// Fixed recipe: Adam (0.001, 0.9, 0.999), 200 epochs, batch 128, seeded
// shuffle. Throws DataError when labels hold a single class.
ProbeModel train_probe(const std::vector<std::vector<double>>& embeddings,
                       const std::vector<int>& labels, ProbeKind kind, int n_classes,
                       std::uint64_t seed);

double eval_probe(const ProbeModel& probe, const std::vector<std::vector<double>>& embeddings,
                  const std::vector<int>& labels);

// Trains all three probe kinds for gender and ethnicity on the train-split
// fused embeddings of the given scenario model and scores them on the
// validation split: 6 results.
std::vector<ProbeResult> leakage_audit(const model::ModelParams& params,
                                       const data::Dataset& dataset, std::uint64_t seed);

}  // namespace fairlens::probes
