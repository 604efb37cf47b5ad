#include "fairlens/agnostic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairlens/errors.hpp"

namespace fairlens::agnostic {

namespace {

using numerics::Activation;
using numerics::AdamState;
using numerics::DenseLayer;
using numerics::Tensor2;

constexpr int kDim = data::kFaceDim;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

struct TransformTrace {
    std::array<double, kDim> a1{};    // relu output of layer1
    std::array<double, kDim> g{};     // pre-normalization output
    std::array<double, kDim> fa{};    // normalized output
    double norm = 0.0;
};

void transform_forward(const AgnosticTransform& t, const std::vector<double>& f,
                       TransformTrace& tr) {
    for (int j = 0; j < kDim; ++j) {
        double acc = t.layer1.bias[j];
        const double* row = t.layer1.weights.data.data() + static_cast<std::size_t>(j) * kDim;
        for (int c = 0; c < kDim; ++c) acc += row[c] * f[c];
        tr.a1[j] = acc > 0.0 ? acc : 0.0;
    }
    double norm = 0.0;
    for (int j = 0; j < kDim; ++j) {
        double acc = t.layer2.bias[j];
        const double* row = t.layer2.weights.data.data() + static_cast<std::size_t>(j) * kDim;
        for (int c = 0; c < kDim; ++c) acc += row[c] * tr.a1[c];
        tr.g[j] = acc;
        norm += acc * acc;
    }
    tr.norm = std::sqrt(norm);
    if (tr.norm <= 0.0)
        throw NumericError("agnostic transform produced a zero vector before normalization");
    for (int j = 0; j < kDim; ++j) tr.fa[j] = tr.g[j] / tr.norm;
}

double adversary_gender_prob(const AdversaryProbe& adv, const double* fa) {
    double z = adv.gender.bias[0];
    for (int d = 0; d < kDim; ++d) z += adv.gender.weights.data[d] * fa[d];
    return 1.0 / (1.0 + std::exp(-z));
}

std::array<double, 3> adversary_ethnicity_probs(const AdversaryProbe& adv, const double* fa) {
    std::array<double, 3> logits{};
    for (int k = 0; k < 3; ++k) {
        double acc = adv.ethnicity.bias[k];
        const double* row = adv.ethnicity.weights.data.data() + static_cast<std::size_t>(k) * kDim;
        for (int d = 0; d < kDim; ++d) acc += row[d] * fa[d];
        logits[k] = acc;
    }
    const double mx = std::max({logits[0], logits[1], logits[2]});
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
    return logits;
}

}  // namespace

double detail_transform_loss_grad(const AgnosticTransform& transform,
                                  const AdversaryProbe& adversaries,
                                  const std::vector<std::vector<double>>& faces,
                                  const std::vector<data::Demographics>& demographics,
                                  const RemovalConfig& config, std::vector<double>* grad_out,
                                  double gender_weight, double ethnicity_weight);

void RemovalConfig::validate() const {
    if (adversary_steps < 1) throw ConfigError("adversary_steps must be >= 1");
    if (penalty_target <= 0.5 || penalty_target >= 1.0)
        throw ConfigError("penalty_target must lie in (0.5, 1)");
    if (utility_weight < 0.0) throw ConfigError("utility_weight must be >= 0");
    if (epochs < 0 || batch_size < 1) throw ConfigError("epochs >= 0 and batch_size >= 1 required");
    if (transform_lr <= 0.0 || adversary_alpha <= 0.0)
        throw ConfigError("learning rates must be > 0");
}

double delta_penalty(double p, double target) {
    if (p < 0.0 || p > 1.0)
        throw ArgumentError("delta_penalty expects a probability in [0, 1], got " +
                            std::to_string(p));
    return std::log1p(std::abs(target - p));
}

AgnosticTransform init_transform(std::uint64_t seed) {
    // Starts as a near-identity map: layer1 shifts into the relu-linear
    // region, layer2 shifts back, so training only has to carve out the
    // demographic directions rather than relearn reconstruction.
    constexpr double kShift = 2.0;
    AgnosticTransform t;
    t.layer1.weights = Tensor2::zeros(kDim, kDim);
    t.layer1.bias.assign(kDim, kShift);
    t.layer1.activation = Activation::relu;
    t.layer2.weights = Tensor2::zeros(kDim, kDim);
    t.layer2.bias.assign(kDim, 0.0);
    t.layer2.activation = Activation::identity;

    RngStream rng(seed, stream_id(kStreamTransformInit));
    for (int j = 0; j < kDim; ++j)
        for (int c = 0; c < kDim; ++c) {
            t.layer1.weights.at(j, c) = (j == c ? 1.0 : 0.0) + rng.normal(0.0, 0.02);
            t.layer2.weights.at(j, c) = (j == c ? 1.0 : 0.0) + rng.normal(0.0, 0.02);
        }
    for (int j = 0; j < kDim; ++j) {
        double row_sum = 0.0;
        for (int c = 0; c < kDim; ++c) row_sum += t.layer2.weights.at(j, c);
        t.layer2.bias[j] = -kShift * row_sum;
    }
    return t;
}

AdversaryProbe init_adversaries(std::uint64_t seed) {
    AdversaryProbe adv;
    adv.gender.weights = Tensor2::zeros(1, kDim);
    adv.gender.bias.assign(1, 0.0);
    adv.gender.activation = Activation::sigmoid;
    adv.ethnicity.weights = Tensor2::zeros(3, kDim);
    adv.ethnicity.bias.assign(3, 0.0);
    adv.ethnicity.activation = Activation::identity;

    RngStream rng(seed, stream_id(kStreamAdversaryInit));
    const double gs = std::sqrt(2.0 / (kDim + 1));
    for (auto& v : adv.gender.weights.data) v = rng.normal(0.0, gs);
    const double es = std::sqrt(2.0 / (kDim + 3));
    for (auto& v : adv.ethnicity.weights.data) v = rng.normal(0.0, es);
    return adv;
}

std::vector<double> apply_transform(const AgnosticTransform& transform,
                                    const std::vector<double>& f) {
    if (f.size() != kDim) throw ShapeError("apply_transform expects a 20-d embedding");
    TransformTrace tr;
    transform_forward(transform, f, tr);
    return std::vector<double>(tr.fa.begin(), tr.fa.end());
}

std::size_t transform_param_count() { return 2 * (kDim * kDim + kDim); }

std::vector<double> flatten_transform(const AgnosticTransform& t) {
    std::vector<double> flat;
    flat.reserve(transform_param_count());
    flat.insert(flat.end(), t.layer1.weights.data.begin(), t.layer1.weights.data.end());
    flat.insert(flat.end(), t.layer1.bias.begin(), t.layer1.bias.end());
    flat.insert(flat.end(), t.layer2.weights.data.begin(), t.layer2.weights.data.end());
    flat.insert(flat.end(), t.layer2.bias.begin(), t.layer2.bias.end());
    return flat;
}

void unflatten_transform(AgnosticTransform& t, const std::vector<double>& flat) {
    if (flat.size() != transform_param_count())
        throw ShapeError("flat vector does not match the transform layout");
    std::size_t o = 0;
    std::copy(flat.begin() + o, flat.begin() + o + kDim * kDim, t.layer1.weights.data.begin());
    o += kDim * kDim;
    std::copy(flat.begin() + o, flat.begin() + o + kDim, t.layer1.bias.begin());
    o += kDim;
    std::copy(flat.begin() + o, flat.begin() + o + kDim * kDim, t.layer2.weights.data.begin());
    o += kDim * kDim;
    std::copy(flat.begin() + o, flat.begin() + o + kDim, t.layer2.bias.begin());
}

double transform_loss_grad(const AgnosticTransform& transform, const AdversaryProbe& adversaries,
                           const std::vector<std::vector<double>>& faces,
                           const std::vector<data::Demographics>& demographics,
                           const RemovalConfig& config, std::vector<double>* grad_out) {
    return detail_transform_loss_grad(transform, adversaries, faces, demographics, config,
                                      grad_out, 1.0, 1.0);
}

double detail_transform_loss_grad(const AgnosticTransform& transform,
                                  const AdversaryProbe& adversaries,
                                  const std::vector<std::vector<double>>& faces,
                                  const std::vector<data::Demographics>& demographics,
                                  const RemovalConfig& config, std::vector<double>* grad_out,
                                  double gender_weight, double ethnicity_weight) {
    if (faces.empty() || faces.size() != demographics.size())
        throw ShapeError("transform_loss_grad needs matching non-empty faces and demographics");
    if (grad_out) grad_out->assign(transform_param_count(), 0.0);

    const double p_star = config.penalty_target;
    const double inv_b = 1.0 / static_cast<double>(faces.size());
    const std::size_t o_w1 = 0, o_b1 = kDim * kDim, o_w2 = o_b1 + kDim, o_b2 = o_w2 + kDim * kDim;

    TransformTrace tr;
    double loss = 0.0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const std::vector<double>& f = faces[i];
        transform_forward(transform, f, tr);

        // reconstruction utility
        double recon = 0.0;
        for (int d = 0; d < kDim; ++d) recon += std::abs(tr.fa[d] - f[d]);
        recon /= kDim;

        const double pg = adversary_gender_prob(adversaries, tr.fa.data());
        const std::array<double, 3> pe = adversary_ethnicity_probs(adversaries, tr.fa.data());
        // Ethnicity delta drives the probability of a fixed reference class
        // toward the target for every sample, the direct analog of the
        // binary P(Male | x) form. Penalizing the max class instead turns
        // out to reward confident adversaries and removes nothing.
        const int cref = 0;

        loss += config.utility_weight * recon + gender_weight * delta_penalty(pg, p_star) +
                ethnicity_weight * delta_penalty(pe[cref], p_star);
        if (!grad_out) continue;

        // d loss / d fa
        std::array<double, kDim> dfa{};
        for (int d = 0; d < kDim; ++d)
            dfa[d] = config.utility_weight / kDim * sign_of(tr.fa[d] - f[d]);

        const double dgd_p =
            -gender_weight * sign_of(p_star - pg) / (1.0 + std::abs(p_star - pg));
        const double dpg_dz = pg * (1.0 - pg);
        for (int d = 0; d < kDim; ++d)
            dfa[d] += dgd_p * dpg_dz * adversaries.gender.weights.data[d];

        const double ded_p =
            -ethnicity_weight * sign_of(p_star - pe[cref]) / (1.0 + std::abs(p_star - pe[cref]));
        for (int k = 0; k < 3; ++k) {
            const double dp_dlogit = pe[cref] * ((k == cref ? 1.0 : 0.0) - pe[k]);
            if (dp_dlogit == 0.0) continue;
            const double* row =
                adversaries.ethnicity.weights.data.data() + static_cast<std::size_t>(k) * kDim;
            for (int d = 0; d < kDim; ++d) dfa[d] += ded_p * dp_dlogit * row[d];
        }

        // through the normalization: dg = (dfa - (fa . dfa) fa) / norm
        double fa_dot = 0.0;
        for (int d = 0; d < kDim; ++d) fa_dot += tr.fa[d] * dfa[d];
        std::array<double, kDim> dg{};
        for (int d = 0; d < kDim; ++d) dg[d] = (dfa[d] - fa_dot * tr.fa[d]) / tr.norm * inv_b;

        double* g = grad_out->data();
        std::array<double, kDim> da1{};
        for (int j = 0; j < kDim; ++j) {
            if (dg[j] != 0.0) {
                double* grow = g + o_w2 + static_cast<std::size_t>(j) * kDim;
                for (int c = 0; c < kDim; ++c) grow[c] += dg[j] * tr.a1[c];
                g[o_b2 + j] += dg[j];
            }
            const double* row =
                transform.layer2.weights.data.data() + static_cast<std::size_t>(j) * kDim;
            for (int c = 0; c < kDim; ++c) da1[c] += row[c] * dg[j];
        }
        for (int j = 0; j < kDim; ++j) {
            if (tr.a1[j] <= 0.0 || da1[j] == 0.0) continue;
            double* grow = g + o_w1 + static_cast<std::size_t>(j) * kDim;
            for (int c = 0; c < kDim; ++c) grow[c] += da1[j] * f[c];
            g[o_b1 + j] += da1[j];
        }
    }
    return loss * inv_b;
}

AgnosticTransform train_agnostic_transform(const std::vector<std::vector<double>>& faces,
                                           const std::vector<data::Demographics>& demographics,
                                           const RemovalConfig& config) {
    config.validate();
    if (faces.empty() || faces.size() != demographics.size())
        throw ShapeError("train_agnostic_transform needs matching faces and demographics");
    for (const auto& f : faces)
        if (f.size() != kDim) throw ShapeError("face embeddings must be 20-d");

    AgnosticTransform t = init_transform(config.seed);
    AdversaryProbe adv = init_adversaries(config.seed);

    std::vector<double> t_flat = flatten_transform(t);

    std::vector<double> g_flat(kDim + 1);
    std::copy(adv.gender.weights.data.begin(), adv.gender.weights.data.end(), g_flat.begin());
    g_flat[kDim] = adv.gender.bias[0];
    AdamState g_adam(g_flat.size(), config.adversary_alpha);

    std::vector<double> e_flat(3 * kDim + 3);
    std::copy(adv.ethnicity.weights.data.begin(), adv.ethnicity.weights.data.end(),
              e_flat.begin());
    for (int k = 0; k < 3; ++k) e_flat[3 * kDim + k] = adv.ethnicity.bias[k];
    AdamState e_adam(e_flat.size(), config.adversary_alpha);

    auto sync_gender = [&]() {
        std::copy(g_flat.begin(), g_flat.begin() + kDim, adv.gender.weights.data.begin());
        adv.gender.bias[0] = g_flat[kDim];
    };
    auto sync_ethnicity = [&]() {
        std::copy(e_flat.begin(), e_flat.begin() + 3 * kDim, adv.ethnicity.weights.data.begin());
        for (int k = 0; k < 3; ++k) adv.ethnicity.bias[k] = e_flat[3 * kDim + k];
    };

    RngStream shuffle_rng(config.seed, stream_id(kStreamRemovalShuffle));
    std::vector<std::size_t> order(faces.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<std::vector<double>> z;
    std::vector<double> g_grad(g_flat.size()), e_grad(e_flat.size()), t_grad;
    std::vector<std::vector<double>> batch_faces;
    std::vector<data::Demographics> batch_demo;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fresh adversaries each epoch; a single co-trained pair settles
        // into a stalemate with the transform and stops finding the
        // residual signal.
        adv = init_adversaries(config.seed + static_cast<std::uint64_t>(epoch) + 1);
        std::copy(adv.gender.weights.data.begin(), adv.gender.weights.data.end(), g_flat.begin());
        g_flat[kDim] = adv.gender.bias[0];
        g_adam = AdamState(g_flat.size(), config.adversary_alpha);
        std::copy(adv.ethnicity.weights.data.begin(), adv.ethnicity.weights.data.end(),
                  e_flat.begin());
        for (int k = 0; k < 3; ++k) e_flat[3 * kDim + k] = adv.ethnicity.bias[k];
        e_adam = AdamState(e_flat.size(), config.adversary_alpha);

        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const double inv_b = 1.0 / static_cast<double>(end - start);

            batch_faces.clear();
            batch_demo.clear();
            z.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_faces.push_back(faces[order[i]]);
                batch_demo.push_back(demographics[order[i]]);
                z.push_back(apply_transform(t, faces[order[i]]));
            }

            // K adversary refreshes on the frozen transform outputs
            for (int k = 0; k < config.adversary_steps; ++k) {
                std::fill(g_grad.begin(), g_grad.end(), 0.0);
                std::fill(e_grad.begin(), e_grad.end(), 0.0);
                for (std::size_t i = 0; i < z.size(); ++i) {
                    const double y_male = batch_demo[i].gender == 0 ? 1.0 : 0.0;
                    const double p = adversary_gender_prob(adv, z[i].data());
                    const double dz = (p - y_male) * inv_b;
                    for (int d = 0; d < kDim; ++d) g_grad[d] += dz * z[i][d];
                    g_grad[kDim] += dz;

                    const auto s = adversary_ethnicity_probs(adv, z[i].data());
                    for (int c = 0; c < 3; ++c) {
                        const double dl =
                            (s[c] - (batch_demo[i].ethnicity == c ? 1.0 : 0.0)) * inv_b;
                        if (dl == 0.0) continue;
                        for (int d = 0; d < kDim; ++d)
                            e_grad[static_cast<std::size_t>(c) * kDim + d] += dl * z[i][d];
                        e_grad[3 * kDim + c] += dl;
                    }
                }
                numerics::adam_step(g_flat, g_grad, g_adam);
                numerics::adam_step(e_flat, e_grad, e_adam);
                sync_gender();
                sync_ethnicity();
            }

            // One transform step against the refreshed adversaries. The
            // delta terms alternate by epoch, two gender epochs per
            // ethnicity epoch, ending on gender: the attributes stop
            // fighting inside one gradient, and the gender signal, which is
            // harder to scrub, gets the larger share.
            const bool gender_turn = (config.epochs - 1 - epoch) % 3 != 2;
            const double loss = detail_transform_loss_grad(
                t, adv, batch_faces, batch_demo, config, &t_grad,
                gender_turn ? 2.0 : 0.0, gender_turn ? 0.0 : 2.0);
            if (!std::isfinite(loss))
                throw NumericError("non-finite removal loss at epoch " + std::to_string(epoch));
            for (std::size_t i = 0; i < t_flat.size(); ++i)
                t_flat[i] -= config.transform_lr * t_grad[i];
            unflatten_transform(t, t_flat);
        }
    }
    return t;
}

}  // namespace fairlens::agnostic
