#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace fairlens::numerics {

// Dense row-major matrix. Deliberately minimal: the training code in this
// project only ever needs matvec-style access.
struct Tensor2 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    static Tensor2 zeros(std::size_t rows, std::size_t cols);

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return rows * cols; }
};

enum class Activation : std::uint8_t { identity, relu, sigmoid, tanh };

double activate(Activation a, double pre);
// Derivative of the activation; takes both the pre-activation and the
// already-computed output so sigmoid/tanh do not re-evaluate.
double activate_grad(Activation a, double pre, double out);

struct DenseLayer {
    Tensor2 weights;           // out x in
    std::vector<double> bias;  // out
    Activation activation = Activation::identity;

    std::size_t in_dim() const { return weights.cols; }
    std::size_t out_dim() const { return weights.rows; }
};

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& input);
// Affine part only (weights * input + bias), used by backprop callers that
// need the pre-activation.
std::vector<double> dense_affine(const DenseLayer& layer, const std::vector<double>& input);

double mae_loss(const std::vector<double>& pred, const std::vector<double>& target);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;  // the usual default; recorded in every config echo

    AdamState() = default;
    explicit AdamState(std::size_t n, double alpha = 0.001, double beta1 = 0.9,
                       double beta2 = 0.999, double eps = 1e-8);
};

// One bias-corrected Adam update in place. Parameters, gradients and the
// state accumulators share a flat layout chosen by the caller.
void adam_step(std::vector<double>& params, const std::vector<double>& grads, AdamState& state);

// Max over parameters of the relative disagreement between the supplied
// analytic gradient and centered finite differences of loss_fn.
double grad_check(const std::function<double(const std::vector<double>&)>& loss_fn,
                  const std::vector<double>& params, const std::vector<double>& analytic_grads,
                  double eps);

}  // namespace fairlens::numerics
