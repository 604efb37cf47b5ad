#include "fairlens/probes.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fairlens/errors.hpp"
#include "fairlens/model.hpp"

namespace fairlens::probes {

namespace {

using numerics::Activation;
using numerics::AdamState;
using numerics::DenseLayer;
using numerics::Tensor2;

// Stream purposes 24..31.
enum ProbeStream : std::uint16_t {
    kStreamProbeInit = 24,
    kStreamProbeShuffle = 25,
};

constexpr int kHiddenDim = 16;
constexpr int kEpochs = 200;
constexpr int kBatch = 128;

std::vector<double> probe_logits(const ProbeModel& p, const std::vector<double>& x) {
    if (p.kind == ProbeKind::mlp)
        return numerics::dense_affine(p.out, numerics::dense_forward(p.hidden, x));
    return numerics::dense_affine(p.out, x);
}

void softmax_inplace(std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

}  // namespace

std::string probe_kind_name(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::logistic: return "logistic";
        case ProbeKind::linear_svm: return "linear_svm";
        case ProbeKind::mlp: return "mlp";
    }
    return "logistic";
}

ProbeModel train_probe(const std::vector<std::vector<double>>& embeddings,
                       const std::vector<int>& labels, ProbeKind kind, int n_classes,
                       std::uint64_t seed) {
    if (embeddings.empty() || embeddings.size() != labels.size())
        throw ShapeError("train_probe needs matching non-empty embeddings and labels");
    const int dim = static_cast<int>(embeddings.front().size());
    std::set<int> distinct;
    for (int y : labels) {
        if (y < 0 || y >= n_classes) throw ArgumentError("probe label out of range");
        distinct.insert(y);
    }
    if (distinct.size() < 2) throw DataError("probe training data holds a single class");

    ProbeModel p;
    p.kind = kind;
    p.n_classes = n_classes;
    const int out_in = kind == ProbeKind::mlp ? kHiddenDim : dim;
    p.out.weights = Tensor2::zeros(n_classes, out_in);
    p.out.bias.assign(n_classes, 0.0);
    p.out.activation = Activation::identity;

    RngStream init_rng(seed, stream_id(kStreamProbeInit));
    if (kind == ProbeKind::mlp) {
        p.hidden.weights = Tensor2::zeros(kHiddenDim, dim);
        p.hidden.bias.assign(kHiddenDim, 0.0);
        p.hidden.activation = Activation::relu;
        const double sigma = std::sqrt(2.0 / dim);
        for (auto& v : p.hidden.weights.data) v = init_rng.normal(0.0, sigma);
    }
    const double out_sigma = std::sqrt(2.0 / (out_in + n_classes));
    for (auto& v : p.out.weights.data) v = init_rng.normal(0.0, out_sigma);

    // Flat packing: [hidden W, hidden b,] out W, out b.
    const std::size_t hidden_sz =
        kind == ProbeKind::mlp ? p.hidden.weights.size() + p.hidden.bias.size() : 0;
    const std::size_t total = hidden_sz + p.out.weights.size() + p.out.bias.size();
    std::vector<double> flat(total), grads(total);
    auto pack = [&]() {
        std::size_t o = 0;
        if (kind == ProbeKind::mlp) {
            std::copy(p.hidden.weights.data.begin(), p.hidden.weights.data.end(),
                      flat.begin() + o);
            o += p.hidden.weights.size();
            std::copy(p.hidden.bias.begin(), p.hidden.bias.end(), flat.begin() + o);
            o += p.hidden.bias.size();
        }
        std::copy(p.out.weights.data.begin(), p.out.weights.data.end(), flat.begin() + o);
        o += p.out.weights.size();
        std::copy(p.out.bias.begin(), p.out.bias.end(), flat.begin() + o);
    };
    auto unpack = [&]() {
        std::size_t o = 0;
        if (kind == ProbeKind::mlp) {
            std::copy(flat.begin() + o, flat.begin() + o + p.hidden.weights.size(),
                      p.hidden.weights.data.begin());
            o += p.hidden.weights.size();
            std::copy(flat.begin() + o, flat.begin() + o + p.hidden.bias.size(),
                      p.hidden.bias.begin());
            o += p.hidden.bias.size();
        }
        std::copy(flat.begin() + o, flat.begin() + o + p.out.weights.size(),
                  p.out.weights.data.begin());
        o += p.out.weights.size();
        std::copy(flat.begin() + o, flat.begin() + o + p.out.bias.size(), p.out.bias.begin());
    };
    pack();

    const std::size_t o_wh = 0;
    const std::size_t o_bh = o_wh + (kind == ProbeKind::mlp ? p.hidden.weights.size() : 0);
    const std::size_t o_wo = hidden_sz;
    const std::size_t o_bo = o_wo + p.out.weights.size();

    AdamState adam(total);
    RngStream shuffle_rng(seed, stream_id(kStreamProbeShuffle));
    std::vector<std::size_t> order(embeddings.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> hidden_out(kHiddenDim), logits(n_classes), dlogits(n_classes),
        dhidden(kHiddenDim);

    for (int epoch = 0; epoch < kEpochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        for (std::size_t start = 0; start < order.size(); start += kBatch) {
            const std::size_t end = std::min(order.size(), start + kBatch);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            std::fill(grads.begin(), grads.end(), 0.0);

            for (std::size_t i = start; i < end; ++i) {
                const std::vector<double>& x = embeddings[order[i]];
                const int y = labels[order[i]];

                const double* in = x.data();
                int in_dim = dim;
                if (kind == ProbeKind::mlp) {
                    for (int h = 0; h < kHiddenDim; ++h) {
                        double acc = flat[o_bh + h];
                        const double* row = flat.data() + o_wh + static_cast<std::size_t>(h) * dim;
                        for (int c = 0; c < dim; ++c) acc += row[c] * x[c];
                        hidden_out[h] = acc > 0.0 ? acc : 0.0;
                    }
                    in = hidden_out.data();
                    in_dim = kHiddenDim;
                }
                for (int k = 0; k < n_classes; ++k) {
                    double acc = flat[o_bo + k];
                    const double* row = flat.data() + o_wo + static_cast<std::size_t>(k) * in_dim;
                    for (int c = 0; c < in_dim; ++c) acc += row[c] * in[c];
                    logits[k] = acc;
                }

                if (kind == ProbeKind::linear_svm) {
                    // one-vs-rest hinge
                    for (int k = 0; k < n_classes; ++k) {
                        const double sk = k == y ? 1.0 : -1.0;
                        dlogits[k] = sk * logits[k] < 1.0 ? -sk * inv_b : 0.0;
                    }
                } else {
                    std::vector<double> prob = logits;
                    softmax_inplace(prob);
                    for (int k = 0; k < n_classes; ++k)
                        dlogits[k] = (prob[k] - (k == y ? 1.0 : 0.0)) * inv_b;
                }

                for (int k = 0; k < n_classes; ++k) {
                    if (dlogits[k] == 0.0) continue;
                    double* grow = grads.data() + o_wo + static_cast<std::size_t>(k) * in_dim;
                    for (int c = 0; c < in_dim; ++c) grow[c] += dlogits[k] * in[c];
                    grads[o_bo + k] += dlogits[k];
                }
                if (kind == ProbeKind::mlp) {
                    std::fill(dhidden.begin(), dhidden.end(), 0.0);
                    for (int k = 0; k < n_classes; ++k) {
                        if (dlogits[k] == 0.0) continue;
                        const double* row =
                            flat.data() + o_wo + static_cast<std::size_t>(k) * kHiddenDim;
                        for (int h = 0; h < kHiddenDim; ++h) dhidden[h] += row[h] * dlogits[k];
                    }
                    for (int h = 0; h < kHiddenDim; ++h) {
                        if (hidden_out[h] <= 0.0 || dhidden[h] == 0.0) continue;
                        double* grow = grads.data() + o_wh + static_cast<std::size_t>(h) * dim;
                        for (int c = 0; c < dim; ++c) grow[c] += dhidden[h] * x[c];
                        grads[o_bh + h] += dhidden[h];
                    }
                }
            }
            numerics::adam_step(flat, grads, adam);
        }
    }
    unpack();
    return p;
}

double eval_probe(const ProbeModel& probe, const std::vector<std::vector<double>>& embeddings,
                  const std::vector<int>& labels) {
    if (embeddings.size() != labels.size())
        throw ShapeError("eval_probe needs matching embeddings and labels");
    if (embeddings.empty()) return 0.0;
    int hits = 0;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        const std::vector<double> logits = probe_logits(probe, embeddings[i]);
        const int pred = static_cast<int>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        hits += pred == labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(embeddings.size());
}

std::vector<ProbeResult> leakage_audit(const model::ModelParams& params,
                                       const data::Dataset& dataset, std::uint64_t seed) {
    std::vector<std::vector<double>> train_emb, val_emb;
    std::vector<int> train_g, val_g, train_e, val_e;
    train_emb.reserve(dataset.train_ids.size());
    val_emb.reserve(dataset.val_ids.size());
    for (int id : dataset.train_ids) {
        train_emb.push_back(model::extract_embedding(params, dataset.profiles[id]));
        train_g.push_back(dataset.profiles[id].demographics.gender);
        train_e.push_back(dataset.profiles[id].demographics.ethnicity);
    }
    for (int id : dataset.val_ids) {
        val_emb.push_back(model::extract_embedding(params, dataset.profiles[id]));
        val_g.push_back(dataset.profiles[id].demographics.gender);
        val_e.push_back(dataset.profiles[id].demographics.ethnicity);
    }

    std::vector<ProbeResult> results;
    int salt = 0;
    for (ProbeKind kind : {ProbeKind::logistic, ProbeKind::linear_svm, ProbeKind::mlp}) {
        for (const scoring::BiasAttribute attr :
             {scoring::BiasAttribute::gender, scoring::BiasAttribute::ethnicity}) {
            const bool is_gender = attr == scoring::BiasAttribute::gender;
            const auto& ytr = is_gender ? train_g : train_e;
            const auto& yval = is_gender ? val_g : val_e;
            const int n_classes = is_gender ? 2 : 3;

            const ProbeModel probe =
                train_probe(train_emb, ytr, kind, n_classes, seed * 6 + salt);
            ProbeResult r;
            r.kind = kind;
            r.attribute = attr;
            r.chance_level = is_gender ? 0.5 : 1.0 / 3.0;
            r.train_accuracy = eval_probe(probe, train_emb, ytr);
            r.val_accuracy = eval_probe(probe, val_emb, yval);
            results.push_back(r);
            salt += 1;
        }
    }
    return results;
}

}  // namespace fairlens::probes
