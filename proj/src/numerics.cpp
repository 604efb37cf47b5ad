#include "fairlens/numerics.hpp"

#include <cmath>
#include <string>

#include "fairlens/errors.hpp"

namespace fairlens::numerics {

Tensor2 Tensor2::zeros(std::size_t rows, std::size_t cols) {
    Tensor2 t;
    t.rows = rows;
    t.cols = cols;
    t.data.assign(rows * cols, 0.0);
    return t;
}

double activate(Activation a, double pre) {
    switch (a) {
        case Activation::identity: return pre;
        case Activation::relu: return pre > 0.0 ? pre : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-pre));
        case Activation::tanh: return std::tanh(pre);
    }
    return pre;
}

double activate_grad(Activation a, double pre, double out) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return out * (1.0 - out);
        case Activation::tanh: return 1.0 - out * out;
    }
    return 1.0;
}

std::vector<double> dense_affine(const DenseLayer& layer, const std::vector<double>& input) {
    if (input.size() != layer.weights.cols)
        throw ShapeError("dense layer expects input of length " +
                         std::to_string(layer.weights.cols) + ", got " +
                         std::to_string(input.size()));
    if (layer.bias.size() != layer.weights.rows)
        throw ShapeError("dense layer bias length does not match output dimension");

    std::vector<double> out(layer.weights.rows);
    const double* w = layer.weights.data.data();
    for (std::size_t r = 0; r < layer.weights.rows; ++r) {
        double acc = layer.bias[r];
        const double* row = w + r * layer.weights.cols;
        for (std::size_t c = 0; c < layer.weights.cols; ++c) acc += row[c] * input[c];
        out[r] = acc;
    }
    return out;
}

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& input) {
    std::vector<double> out = dense_affine(layer, input);
    for (double& v : out) v = activate(layer.activation, v);
    return out;
}

double mae_loss(const std::vector<double>& pred, const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty())
        throw ShapeError("mae_loss requires equal non-empty lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - target[i]);
    return acc / static_cast<double>(pred.size());
}

AdamState::AdamState(std::size_t n, double alpha, double beta1, double beta2, double eps)
    : m(n, 0.0), v(n, 0.0), t(0), alpha(alpha), beta1(beta1), beta2(beta2), eps(eps) {}

void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state) {
    if (grads.size() != params.size() || state.m.size() != params.size() ||
        state.v.size() != params.size())
        throw ShapeError("adam_step: parameter, gradient and state sizes must match");
    for (double g : grads)
        if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");

    state.t += 1;
    const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / b1t;
        const double v_hat = state.v[i] / b2t;
        params[i] -= state.alpha * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

double grad_check(const std::function<double(const std::vector<double>&)>& loss_fn,
                  const std::vector<double>& params, const std::vector<double>& analytic_grads,
                  double eps) {
    if (analytic_grads.size() != params.size())
        throw ShapeError("grad_check: gradient length must match parameter length");

    std::vector<double> probe = params;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        probe[i] = params[i] + eps;
        const double hi = loss_fn(probe);
        probe[i] = params[i] - eps;
        const double lo = loss_fn(probe);
        probe[i] = params[i];
        if (!std::isfinite(hi) || !std::isfinite(lo))
            throw NumericError("grad_check: loss is not finite near the evaluation point");

        const double numeric = (hi - lo) / (2.0 * eps);
        const double analytic = analytic_grads[i];
        const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    return worst;
}

}  // namespace fairlens::numerics
