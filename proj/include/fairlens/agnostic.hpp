#pragma once

#include <cstdint>
#include <vector>

#include "fairlens/datagen.hpp"
#include "fairlens/numerics.hpp"

namespace fairlens::agnostic {

// Stream purposes 32..39.
enum AgnosticStream : std::uint16_t {
    kStreamTransformInit = 32,
    kStreamAdversaryInit = 33,
    kStreamRemovalShuffle = 34,
};

// Two 20 -> 20 layers; the output is renormalized to unit length on apply.
struct AgnosticTransform {
    numerics::DenseLayer layer1;  // relu
    numerics::DenseLayer layer2;  // identity
};

// Co-trained adversaries reading the transformed embedding: a logistic head
// for gender (P(Male | x)) and a 3-way softmax head for ethnicity.
struct AdversaryProbe {
    numerics::DenseLayer gender;     // 20 -> 1, sigmoid
    numerics::DenseLayer ethnicity;  // 20 -> 3, identity logits
};

struct RemovalConfig {
    int adversary_steps = 5;      // K adversary updates per transform update
    double utility_weight = 1.0;  // lambda_u on the reconstruction term
    // Target probability in the delta regularizer. Near 0.5 the regularizer
    // keeps merging the group distributions all the way down; at the 0.9 of
    // the published formula the pressure dies once every sample sits below
    // the target, which strands far too much recoverable signal.
    double penalty_target = 0.51;
    int epochs = 150;
    int batch_size = 128;
    // The transform step is plain SGD so the delta terms only move the
    // representation in proportion to how much signal the adversaries
    // actually find; the adversaries themselves train with Adam.
    double transform_lr = 0.09;
    double adversary_alpha = 0.008;
    std::uint64_t seed = 42;

    void validate() const;  // throws ConfigError
};

// log(1 + |target - p|), >= 0, zero exactly at p = target.
double delta_penalty(double p, double target = 0.9);

AgnosticTransform init_transform(std::uint64_t seed);
AdversaryProbe init_adversaries(std::uint64_t seed);

std::vector<double> apply_transform(const AgnosticTransform& transform,
                                    const std::vector<double>& f);

// Alternating optimization over the training faces: K adversary steps per
// batch, then one transform step on
//   lambda_u * recon-MAE + delta_gender + delta_ethnicity.
AgnosticTransform train_agnostic_transform(const std::vector<std::vector<double>>& faces,
                                           const std::vector<data::Demographics>& demographics,
                                           const RemovalConfig& config);

std::size_t transform_param_count();
std::vector<double> flatten_transform(const AgnosticTransform& transform);
void unflatten_transform(AgnosticTransform& transform, const std::vector<double>& flat);

// Batch objective of the transform step with frozen adversaries; fills the
// analytic gradient (flat layout) when grad_out is non-null.
double transform_loss_grad(const AgnosticTransform& transform, const AdversaryProbe& adversaries,
                           const std::vector<std::vector<double>>& faces,
                           const std::vector<data::Demographics>& demographics,
                           const RemovalConfig& config, std::vector<double>* grad_out);

}  // namespace fairlens::agnostic
