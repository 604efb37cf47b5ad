#include "fairlens/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fairlens/errors.hpp"

namespace fairlens::model {

namespace {

using numerics::Activation;
using numerics::AdamState;
using numerics::DenseLayer;
using numerics::Tensor2;

// Offsets into the flat parameter vector. Order: embed, proj, h1, h2, out.
struct FlatLayout {
    std::size_t embed_rows = 0;
    std::size_t o_embed = 0, o_projw = 0, o_projb = 0;
    std::size_t o_w1 = 0, o_b1 = 0, o_w2 = 0, o_b2 = 0, o_wout = 0, o_bout = 0;
    std::size_t total = 0;

    static FlatLayout for_rows(std::size_t rows) {
        FlatLayout l;
        l.embed_rows = rows;
        l.o_embed = 0;
        l.o_projw = l.o_embed + rows * kTextEmbedDim;
        l.o_projb = l.o_projw + kTextOutDim * kTextEmbedDim;
        l.o_w1 = l.o_projb + kTextOutDim;
        l.o_b1 = l.o_w1 + kHidden1 * kFusionInDim;
        l.o_w2 = l.o_b1 + kHidden1;
        l.o_b2 = l.o_w2 + kHidden2 * kHidden1;
        l.o_wout = l.o_b2 + kHidden2;
        l.o_bout = l.o_wout + kHidden2;
        l.total = l.o_bout + 1;
        return l;
    }
};

struct Encoded {
    std::vector<std::pair<int, double>> token_rows;  // (embed row, count)
    double inv_count = 1.0;
    const double* face = nullptr;
    std::array<double, 7> comp{};
    double target = 0.0;
};

struct Workspace {
    std::array<double, kTextEmbedDim> ebar{};
    std::array<double, kTextOutDim> t32{};
    std::array<double, kFusionInDim> x{};
    std::array<double, kHidden1> h1{};
    std::array<double, kHidden2> h2{};
    double out = 0.0;
    // backward scratch
    std::array<double, kHidden2> dh2{};
    std::array<double, kHidden1> dh1{};
    std::array<double, kFusionInDim> dx{};
    std::array<double, kTextOutDim> dtpre{};
    std::array<double, kTextEmbedDim> debar{};
};

Encoded encode_profile(const data::Profile& p, const ScenarioSpec& scenario,
                       const TextEncoderParams& text, bool with_target) {
    Encoded e;
    std::map<int, double> rows;
    const auto& tokens = scenario.tokens_of(p);
    for (const auto& tok : tokens) rows[text.row_of(tok)] += 1.0;
    if (rows.empty()) rows[0] = 1.0;  // empty bio encodes as the unknown token
    e.token_rows.assign(rows.begin(), rows.end());
    double total = 0.0;
    for (const auto& [row, cnt] : e.token_rows) total += cnt;
    e.inv_count = 1.0 / total;
    e.face = scenario.face_of(p).data();
    e.comp = p.competencies.as_array();
    if (with_target) e.target = scenario.target_of(p);
    return e;
}

double sample_forward(const double* w, const FlatLayout& L, const Encoded& e, Workspace& ws) {
    ws.ebar.fill(0.0);
    for (const auto& [row, cnt] : e.token_rows) {
        const double* er = w + L.o_embed + static_cast<std::size_t>(row) * kTextEmbedDim;
        for (int d = 0; d < kTextEmbedDim; ++d) ws.ebar[d] += cnt * er[d];
    }
    for (int d = 0; d < kTextEmbedDim; ++d) ws.ebar[d] *= e.inv_count;

    for (int r = 0; r < kTextOutDim; ++r) {
        const double* row = w + L.o_projw + static_cast<std::size_t>(r) * kTextEmbedDim;
        double acc = w[L.o_projb + r];
        for (int d = 0; d < kTextEmbedDim; ++d) acc += row[d] * ws.ebar[d];
        ws.t32[r] = std::tanh(acc);
    }

    for (int d = 0; d < data::kFaceDim; ++d) ws.x[d] = e.face[d];
    for (int r = 0; r < kTextOutDim; ++r) ws.x[data::kFaceDim + r] = ws.t32[r];
    for (int c = 0; c < kCompDim; ++c) ws.x[data::kFaceDim + kTextOutDim + c] = e.comp[c];

    for (int r = 0; r < kHidden1; ++r) {
        const double* row = w + L.o_w1 + static_cast<std::size_t>(r) * kFusionInDim;
        double acc = w[L.o_b1 + r];
        for (int c = 0; c < kFusionInDim; ++c) acc += row[c] * ws.x[c];
        ws.h1[r] = acc > 0.0 ? acc : 0.0;
    }
    for (int r = 0; r < kHidden2; ++r) {
        const double* row = w + L.o_w2 + static_cast<std::size_t>(r) * kHidden1;
        double acc = w[L.o_b2 + r];
        for (int c = 0; c < kHidden1; ++c) acc += row[c] * ws.h1[c];
        ws.h2[r] = acc > 0.0 ? acc : 0.0;
    }
    double opre = w[L.o_bout];
    for (int c = 0; c < kHidden2; ++c) opre += w[L.o_wout + c] * ws.h2[c];
    ws.out = 1.0 / (1.0 + std::exp(-opre));
    return ws.out;
}

void sample_backward(const double* w, const FlatLayout& L, const Encoded& e, const Workspace& ws,
                     double dldo, double* g) {
    Workspace& s = const_cast<Workspace&>(ws);  // backward scratch lives in the workspace

    const double dopre = dldo * ws.out * (1.0 - ws.out);
    for (int c = 0; c < kHidden2; ++c) {
        g[L.o_wout + c] += dopre * ws.h2[c];
        s.dh2[c] = w[L.o_wout + c] * dopre;
    }
    g[L.o_bout] += dopre;

    for (int r = 0; r < kHidden2; ++r) {
        const double dpre = ws.h2[r] > 0.0 ? s.dh2[r] : 0.0;
        s.dh2[r] = dpre;
        if (dpre != 0.0) {
            double* grow = g + L.o_w2 + static_cast<std::size_t>(r) * kHidden1;
            for (int c = 0; c < kHidden1; ++c) grow[c] += dpre * ws.h1[c];
            g[L.o_b2 + r] += dpre;
        }
    }
    s.dh1.fill(0.0);
    for (int r = 0; r < kHidden2; ++r) {
        const double dpre = s.dh2[r];
        if (dpre == 0.0) continue;
        const double* row = w + L.o_w2 + static_cast<std::size_t>(r) * kHidden1;
        for (int c = 0; c < kHidden1; ++c) s.dh1[c] += row[c] * dpre;
    }

    s.dx.fill(0.0);
    for (int r = 0; r < kHidden1; ++r) {
        const double dpre = ws.h1[r] > 0.0 ? s.dh1[r] : 0.0;
        s.dh1[r] = dpre;
        if (dpre == 0.0) continue;
        double* grow = g + L.o_w1 + static_cast<std::size_t>(r) * kFusionInDim;
        const double* row = w + L.o_w1 + static_cast<std::size_t>(r) * kFusionInDim;
        for (int c = 0; c < kFusionInDim; ++c) {
            grow[c] += dpre * ws.x[c];
            s.dx[c] += row[c] * dpre;
        }
        g[L.o_b1 + r] += dpre;
    }

    s.debar.fill(0.0);
    for (int r = 0; r < kTextOutDim; ++r) {
        const double dt = s.dx[data::kFaceDim + r] * (1.0 - ws.t32[r] * ws.t32[r]);
        s.dtpre[r] = dt;
        if (dt == 0.0) continue;
        double* grow = g + L.o_projw + static_cast<std::size_t>(r) * kTextEmbedDim;
        const double* row = w + L.o_projw + static_cast<std::size_t>(r) * kTextEmbedDim;
        for (int d = 0; d < kTextEmbedDim; ++d) {
            grow[d] += dt * ws.ebar[d];
            s.debar[d] += row[d] * dt;
        }
        g[L.o_projb + r] += dt;
    }

    for (const auto& [row, cnt] : e.token_rows) {
        const double scale = cnt * e.inv_count;
        double* grow = g + L.o_embed + static_cast<std::size_t>(row) * kTextEmbedDim;
        for (int d = 0; d < kTextEmbedDim; ++d) grow[d] += scale * s.debar[d];
    }
}

void fill_normal(std::vector<double>& dst, std::size_t offset, std::size_t count, double sigma,
                 RngStream& rng) {
    for (std::size_t i = 0; i < count; ++i) dst[offset + i] = rng.normal(0.0, sigma);
}

void check_trainable(const data::Dataset& dataset, const ScenarioSpec& scenario) {
    if (dataset.profiles.empty() || dataset.train_ids.empty())
        throw StateError("dataset has no training split");
    for (const auto& p : dataset.profiles)
        if (!p.scores.has_value())
            throw StateError("dataset is not scored; run the scoring stage first");
    if (scenario.uses_agnostic_inputs())
        for (const auto& p : dataset.profiles)
            if (!p.agnostic_face.has_value())
                throw DataError(
                    "agnostic scenario requires agnostic face embeddings; run debias first");
}

}  // namespace

double ScenarioSpec::target_of(const data::Profile& p) const {
    if (!p.scores.has_value()) throw StateError("profile has no target scores");
    switch (kind) {
        case ScenarioKind::neutral: return p.scores->t_u;
        case ScenarioKind::biased:
        case ScenarioKind::agnostic:
            return bias_attribute == scoring::BiasAttribute::gender ? p.scores->t_g
                                                                    : p.scores->t_e;
    }
    return p.scores->t_u;
}

const std::vector<double>& ScenarioSpec::face_of(const data::Profile& p) const {
    if (!uses_agnostic_inputs()) return p.face;
    if (!p.agnostic_face.has_value())
        throw DataError("profile " + std::to_string(p.id) + " has no agnostic face embedding");
    return *p.agnostic_face;
}

const std::vector<std::string>& ScenarioSpec::tokens_of(const data::Profile& p) const {
    return uses_agnostic_inputs() ? p.bio.blinded_tokens : p.bio.tokens;
}

std::string ScenarioSpec::label() const {
    switch (kind) {
        case ScenarioKind::neutral: return "neutral";
        case ScenarioKind::biased:
            return bias_attribute == scoring::BiasAttribute::gender ? "biased_gender"
                                                                    : "biased_ethnicity";
        case ScenarioKind::agnostic:
            return bias_attribute == scoring::BiasAttribute::gender ? "agnostic_gender"
                                                                    : "agnostic_ethnicity";
    }
    return "neutral";
}

ModelParams build_model(const data::Dataset& dataset, const ScenarioSpec& scenario,
                        std::uint64_t seed) {
    std::set<std::string> tokens;
    for (int id : dataset.train_ids)
        for (const auto& tok : scenario.tokens_of(dataset.profiles[id])) tokens.insert(tok);
    if (tokens.empty()) throw DataError("training split yields an empty vocabulary");

    ModelParams m;
    m.scenario = scenario;
    m.text.vocab.assign(tokens.begin(), tokens.end());
    for (std::size_t i = 0; i < m.text.vocab.size(); ++i)
        m.text.index[m.text.vocab[i]] = static_cast<int>(i) + 1;

    const std::size_t rows = m.text.vocab.size() + 1;
    m.text.embed = Tensor2::zeros(rows, kTextEmbedDim);
    m.text.proj.weights = Tensor2::zeros(kTextOutDim, kTextEmbedDim);
    m.text.proj.bias.assign(kTextOutDim, 0.0);
    m.text.proj.activation = Activation::tanh;
    m.fusion_h1.weights = Tensor2::zeros(kHidden1, kFusionInDim);
    m.fusion_h1.bias.assign(kHidden1, 0.0);
    m.fusion_h1.activation = Activation::relu;
    m.fusion_h2.weights = Tensor2::zeros(kHidden2, kHidden1);
    m.fusion_h2.bias.assign(kHidden2, 0.0);
    m.fusion_h2.activation = Activation::relu;
    m.out.weights = Tensor2::zeros(1, kHidden2);
    m.out.bias.assign(1, 0.0);
    m.out.activation = Activation::sigmoid;

    // He for the relu layers, Glorot for tanh/sigmoid, small normal for the
    // token embeddings; biases start at zero.
    // Token embeddings start small: the trained paths regrow whatever the
    // target needs, while untrained tokens stay too faint for downstream
    // probes to read.
    RngStream embed_rng(seed, stream_id(kStreamModelInit, 0));
    for (auto& v : m.text.embed.data) v = embed_rng.normal(0.0, 0.03);
    RngStream proj_rng(seed, stream_id(kStreamModelInit, 1));
    const double proj_sigma = std::sqrt(2.0 / (kTextEmbedDim + kTextOutDim));
    for (auto& v : m.text.proj.weights.data) v = proj_rng.normal(0.0, proj_sigma);
    RngStream h1_rng(seed, stream_id(kStreamModelInit, 2));
    const double h1_sigma = std::sqrt(2.0 / kFusionInDim);
    for (auto& v : m.fusion_h1.weights.data) v = h1_rng.normal(0.0, h1_sigma);
    RngStream h2_rng(seed, stream_id(kStreamModelInit, 3));
    const double h2_sigma = std::sqrt(2.0 / kHidden1);
    for (auto& v : m.fusion_h2.weights.data) v = h2_rng.normal(0.0, h2_sigma);
    RngStream out_rng(seed, stream_id(kStreamModelInit, 4));
    const double out_sigma = std::sqrt(2.0 / (kHidden2 + 1));
    for (auto& v : m.out.weights.data) v = out_rng.normal(0.0, out_sigma);
    return m;
}

std::vector<double> encode_text(const TextEncoderParams& text,
                                const std::vector<std::string>& tokens) {
    std::vector<double> ebar(kTextEmbedDim, 0.0);
    if (tokens.empty()) {
        for (int d = 0; d < kTextEmbedDim; ++d) ebar[d] = text.embed.at(0, d);
    } else {
        for (const auto& tok : tokens) {
            const int row = text.row_of(tok);
            for (int d = 0; d < kTextEmbedDim; ++d) ebar[d] += text.embed.at(row, d);
        }
        for (double& v : ebar) v /= static_cast<double>(tokens.size());
    }
    return numerics::dense_forward(text.proj, ebar);
}

double forward(const ModelParams& params, const std::vector<double>& face,
               const std::vector<std::string>& tokens,
               const std::array<double, 7>& competencies) {
    if (face.size() != data::kFaceDim)
        throw ShapeError("face embedding must have dimension " + std::to_string(data::kFaceDim));
    const std::vector<double> t32 = encode_text(params.text, tokens);

    std::vector<double> x(kFusionInDim);
    for (int d = 0; d < data::kFaceDim; ++d) x[d] = face[d];
    for (int r = 0; r < kTextOutDim; ++r) x[data::kFaceDim + r] = t32[r];
    for (int c = 0; c < kCompDim; ++c) x[data::kFaceDim + kTextOutDim + c] = competencies[c];

    const auto h1 = numerics::dense_forward(params.fusion_h1, x);
    const auto h2 = numerics::dense_forward(params.fusion_h2, h1);
    return numerics::dense_forward(params.out, h2)[0];
}

std::size_t param_count(const ModelParams& params) {
    return FlatLayout::for_rows(params.text.embed.rows).total;
}

std::vector<double> flatten_params(const ModelParams& m) {
    const FlatLayout L = FlatLayout::for_rows(m.text.embed.rows);
    std::vector<double> flat(L.total);
    auto put = [&](std::size_t off, const std::vector<double>& src) {
        std::copy(src.begin(), src.end(), flat.begin() + off);
    };
    put(L.o_embed, m.text.embed.data);
    put(L.o_projw, m.text.proj.weights.data);
    put(L.o_projb, m.text.proj.bias);
    put(L.o_w1, m.fusion_h1.weights.data);
    put(L.o_b1, m.fusion_h1.bias);
    put(L.o_w2, m.fusion_h2.weights.data);
    put(L.o_b2, m.fusion_h2.bias);
    put(L.o_wout, m.out.weights.data);
    put(L.o_bout, m.out.bias);
    return flat;
}

void unflatten_params(ModelParams& m, const std::vector<double>& flat) {
    const FlatLayout L = FlatLayout::for_rows(m.text.embed.rows);
    if (flat.size() != L.total)
        throw ShapeError("flat parameter vector does not match the model layout");
    auto take = [&](std::size_t off, std::vector<double>& dst) {
        std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
    };
    take(L.o_embed, m.text.embed.data);
    take(L.o_projw, m.text.proj.weights.data);
    take(L.o_projb, m.text.proj.bias);
    take(L.o_w1, m.fusion_h1.weights.data);
    take(L.o_b1, m.fusion_h1.bias);
    take(L.o_w2, m.fusion_h2.weights.data);
    take(L.o_b2, m.fusion_h2.bias);
    take(L.o_wout, m.out.weights.data);
    take(L.o_bout, m.out.bias);
}

double batch_loss_grad(const ModelParams& params, const data::Dataset& dataset,
                       const std::vector<int>& ids, std::vector<double>* grad_out) {
    if (ids.empty()) throw ArgumentError("batch_loss_grad needs at least one profile id");
    const FlatLayout L = FlatLayout::for_rows(params.text.embed.rows);
    const std::vector<double> flat = flatten_params(params);
    if (grad_out) grad_out->assign(L.total, 0.0);

    Workspace ws;
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(ids.size());
    for (int id : ids) {
        const Encoded e =
            encode_profile(dataset.profiles.at(id), params.scenario, params.text, true);
        const double o = sample_forward(flat.data(), L, e, ws);
        loss += std::abs(o - e.target);
        if (grad_out) {
            const double dldo = (o > e.target ? 1.0 : (o < e.target ? -1.0 : 0.0)) * inv_b;
            sample_backward(flat.data(), L, e, ws, dldo, grad_out->data());
        }
    }
    return loss * inv_b;
}

TrainResult train(const data::Dataset& dataset, const ScenarioSpec& scenario,
                  const TrainConfig& config) {
    check_trainable(dataset, scenario);
    if (config.epochs < 0 || config.batch_size < 1)
        throw ConfigError("training needs epochs >= 0 and batch_size >= 1");

    TrainResult result;
    result.params = build_model(dataset, scenario, config.seed);
    ModelParams& m = result.params;

    const FlatLayout L = FlatLayout::for_rows(m.text.embed.rows);
    std::vector<double> flat = flatten_params(m);
    AdamState adam(L.total, config.adam_alpha, config.adam_beta1, config.adam_beta2);

    std::vector<Encoded> encoded;
    encoded.reserve(dataset.train_ids.size());
    for (int id : dataset.train_ids)
        encoded.push_back(encode_profile(dataset.profiles[id], scenario, m.text, true));

    std::vector<std::size_t> order(encoded.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    RngStream shuffle_rng(config.seed, stream_id(kStreamTrainShuffle));
    std::vector<double> grads(L.total, 0.0);
    Workspace ws;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

        double epoch_abs_err = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            std::fill(grads.begin(), grads.end(), 0.0);
            for (std::size_t i = start; i < end; ++i) {
                const Encoded& e = encoded[order[i]];
                const double o = sample_forward(flat.data(), L, e, ws);
                epoch_abs_err += std::abs(o - e.target);
                const double dldo = (o > e.target ? 1.0 : (o < e.target ? -1.0 : 0.0)) * inv_b;
                sample_backward(flat.data(), L, e, ws, dldo, grads.data());
            }
            numerics::adam_step(flat, grads, adam);
        }
        result.loss_history.push_back(epoch_abs_err / static_cast<double>(order.size()));
    }

    unflatten_params(m, flat);
    return result;
}

std::map<int, double> predict_split(const ModelParams& params, const data::Dataset& dataset,
                                    Split split) {
    const std::vector<int>& ids = split == Split::train ? dataset.train_ids : dataset.val_ids;
    const FlatLayout L = FlatLayout::for_rows(params.text.embed.rows);
    const std::vector<double> flat = flatten_params(params);
    Workspace ws;
    std::map<int, double> out;
    for (int id : ids) {
        const Encoded e =
            encode_profile(dataset.profiles.at(id), params.scenario, params.text, false);
        out[id] = sample_forward(flat.data(), L, e, ws);
    }
    return out;
}

std::vector<double> extract_embedding(const ModelParams& params, const data::Profile& profile) {
    const std::vector<double> t32 = encode_text(params.text, params.scenario.tokens_of(profile));
    const std::vector<double>& face = params.scenario.face_of(profile);
    const auto comp = profile.competencies.as_array();

    std::vector<double> x(kFusionInDim);
    for (int d = 0; d < data::kFaceDim; ++d) x[d] = face[d];
    for (int r = 0; r < kTextOutDim; ++r) x[data::kFaceDim + r] = t32[r];
    for (int c = 0; c < kCompDim; ++c) x[data::kFaceDim + kTextOutDim + c] = comp[c];
    return numerics::dense_forward(params.fusion_h1, x);
}

}  // namespace fairlens::model
