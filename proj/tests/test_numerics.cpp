#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "fairlens/errors.hpp"
#include "fairlens/numerics.hpp"
#include "fairlens/rng.hpp"

using namespace fairlens;
using namespace fairlens::numerics;

TEST_CASE("dense_forward identity map") {
    DenseLayer layer;
    layer.weights = Tensor2::zeros(2, 2);
    layer.weights.at(0, 0) = 1.0;
    layer.weights.at(1, 1) = 1.0;
    layer.bias = {0.0, 0.0};
    layer.activation = Activation::identity;

    const auto out = dense_forward(layer, {3.0, -1.0});
    REQUIRE(out.size() == 2);
    CHECK(out[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("dense_forward zero weights through sigmoid gives 0.5") {
    DenseLayer layer;
    layer.weights = Tensor2::zeros(3, 4);
    layer.bias = {0.0, 0.0, 0.0};
    layer.activation = Activation::sigmoid;

    const auto out = dense_forward(layer, {1.5, -2.0, 0.25, 9.0});
    for (double v : out) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("dense_forward affine + relu hand oracle") {
    // w = [[1, 2]], b = 0.5, x = (1, -1): 1*1 + 2*(-1) + 0.5 = -0.5 -> relu -> 0
    DenseLayer layer;
    layer.weights = Tensor2::zeros(1, 2);
    layer.weights.at(0, 0) = 1.0;
    layer.weights.at(0, 1) = 2.0;
    layer.bias = {0.5};
    layer.activation = Activation::relu;

    const auto out = dense_forward(layer, {1.0, -1.0});
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 0.0);
}

TEST_CASE("dense_forward rejects dimension mismatch") {
    DenseLayer layer;
    layer.weights = Tensor2::zeros(2, 3);
    layer.bias = {0.0, 0.0};
    layer.activation = Activation::identity;
    CHECK_THROWS_AS(dense_forward(layer, {1.0, 2.0}), ShapeError);
}

TEST_CASE("mae_loss oracles") {
    CHECK(mae_loss({0.3, 0.7, 0.1}, {0.3, 0.7, 0.1}) == 0.0);
    CHECK(mae_loss({0.2, 0.8}, {0.0, 1.0}) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(mae_loss({1.0}, {0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(mae_loss({1.0, 2.0}, {1.0}), ShapeError);
}

TEST_CASE("mae_loss symmetry and non-negativity property") {
    RngStream rng(7, 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(8), b(8);
        for (std::size_t i = 0; i < 8; ++i) {
            a[i] = rng.uniform();
            b[i] = rng.uniform();
        }
        const double ab = mae_loss(a, b);
        const double ba = mae_loss(b, a);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
    }
    CHECK(mae_loss({0.5, 0.5}, {0.5, 0.5}) == 0.0);
}

TEST_CASE("adam_step zero gradient is a fixed point") {
    std::vector<double> params = {1.0, -2.5, 0.125};
    const std::vector<double> before = params;
    AdamState state(params.size());
    adam_step(params, {0.0, 0.0, 0.0}, state);
    CHECK(params == before);  // bit-identical
    CHECK(state.t == 1);
}

TEST_CASE("adam_step scalar hand oracle") {
    // f(w) = w^2 at w = 1: g = 2. m_hat = 2, v_hat = 4,
    // step = alpha * 2 / (2 + eps) ~= alpha, so w ~= 0.999.
    std::vector<double> params = {1.0};
    AdamState state(1);
    adam_step(params, {2.0}, state);
    CHECK(params[0] == doctest::Approx(0.999).epsilon(1e-9));
    CHECK(state.t == 1);
}

TEST_CASE("adam defaults follow the recipe") {
    AdamState state(4);
    CHECK(state.alpha == 0.001);
    CHECK(state.beta1 == 0.9);
    CHECK(state.beta2 == 0.999);
    CHECK(state.eps == 1e-8);
}

TEST_CASE("adam_step rejects bad input") {
    std::vector<double> params = {1.0, 2.0};
    AdamState state(2);
    CHECK_THROWS_AS(adam_step(params, {1.0}, state), ShapeError);
    CHECK_THROWS_AS(adam_step(params, {1.0, std::nan("")}, state), NumericError);
}

TEST_CASE("grad_check linear loss is exact") {
    // f(w) = 3 * sum(w): analytic gradient is 3 everywhere.
    auto loss = [](const std::vector<double>& w) {
        double s = 0.0;
        for (double v : w) s += 3.0 * v;
        return s;
    };
    const std::vector<double> params = {0.2, -1.0, 4.0};
    const std::vector<double> grads = {3.0, 3.0, 3.0};
    CHECK(grad_check(loss, params, grads, 1e-5) <= 1e-8);
}

TEST_CASE("grad_check single dense layer + MAE against finite differences") {
    // One dense layer 3 -> 2 (sigmoid) + MAE on one sample, parameters packed
    // as [W row-major, b]. The analytic gradient is derived by hand here and
    // must agree with the centered differences computed by grad_check.
    const std::vector<double> input = {0.3, -0.8, 0.5};
    const std::vector<double> target = {0.9, 0.2};

    auto unpack = [&](const std::vector<double>& p, DenseLayer& layer) {
        layer.weights = Tensor2::zeros(2, 3);
        for (std::size_t i = 0; i < 6; ++i) layer.weights.data[i] = p[i];
        layer.bias = {p[6], p[7]};
        layer.activation = Activation::sigmoid;
    };
    auto loss = [&](const std::vector<double>& p) {
        DenseLayer layer;
        unpack(p, layer);
        return mae_loss(dense_forward(layer, input), target);
    };

    RngStream rng(11, 3);
    std::vector<double> params(8);
    for (auto& v : params) v = rng.normal(0.0, 0.5);

    DenseLayer layer;
    unpack(params, layer);
    const auto out = dense_forward(layer, input);
    std::vector<double> grads(8, 0.0);
    for (std::size_t r = 0; r < 2; ++r) {
        const double douti = (out[r] > target[r] ? 1.0 : -1.0) / 2.0;  // d MAE / d out_r
        const double dpre = douti * out[r] * (1.0 - out[r]);           // sigmoid'
        for (std::size_t c = 0; c < 3; ++c) grads[r * 3 + c] = dpre * input[c];
        grads[6 + r] = dpre;
    }

    CHECK(grad_check(loss, params, grads, 1e-5) <= 1e-4);
}

TEST_CASE("grad_check reports numeric error on non-finite loss") {
    auto loss = [](const std::vector<double>&) { return std::numeric_limits<double>::infinity(); };
    CHECK_THROWS_AS(grad_check(loss, {1.0}, {0.0}, 1e-5), NumericError);
}

TEST_CASE("rng determinism and degenerate normal") {
    RngStream a(42, 5);
    RngStream b(42, 5);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(42, 5);
    CHECK(c.normal(3.25, 0.0) == 3.25);
}

TEST_CASE("rng uniform mean sanity over 1e5 draws") {
    RngStream rng(123, 0);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("rng distinct stream ids diverge within 1000 draws") {
    for (std::uint64_t s = 1; s <= 8; ++s) {
        RngStream a(99, 0);
        RngStream b(99, s);
        bool differs = false;
        for (int i = 0; i < 1000 && !differs; ++i) differs = a.next_u64() != b.next_u64();
        CHECK(differs);
    }
}

TEST_CASE("grad_check covers every activation kind") {
    // Single layer 2 -> 2 for each activation, MAE against a fixed target.
    const std::vector<double> input = {0.7, -0.4};
    const std::vector<double> target = {0.3, 0.6};
    for (Activation act : {Activation::identity, Activation::relu,
                           Activation::sigmoid, Activation::tanh}) {
        auto loss = [&](const std::vector<double>& p) {
            DenseLayer layer;
            layer.weights = Tensor2::zeros(2, 2);
            for (std::size_t i = 0; i < 4; ++i) layer.weights.data[i] = p[i];
            layer.bias = {p[4], p[5]};
            layer.activation = act;
            return mae_loss(dense_forward(layer, input), target);
        };

        RngStream rng(17, static_cast<std::uint64_t>(act));
        std::vector<double> params(6);
        for (auto& v : params) v = rng.normal(0.3, 0.4);

        DenseLayer layer;
        layer.weights = Tensor2::zeros(2, 2);
        for (std::size_t i = 0; i < 4; ++i) layer.weights.data[i] = params[i];
        layer.bias = {params[4], params[5]};
        layer.activation = act;

        std::vector<double> pre(2), out(2);
        for (std::size_t r = 0; r < 2; ++r) {
            pre[r] = layer.weights.at(r, 0) * input[0] + layer.weights.at(r, 1) * input[1] +
                     layer.bias[r];
            out[r] = activate(act, pre[r]);
        }
        std::vector<double> grads(6, 0.0);
        for (std::size_t r = 0; r < 2; ++r) {
            const double douti = (out[r] > target[r] ? 1.0 : -1.0) / 2.0;
            const double dpre = douti * activate_grad(act, pre[r], out[r]);
            grads[r * 2 + 0] = dpre * input[0];
            grads[r * 2 + 1] = dpre * input[1];
            grads[4 + r] = dpre;
        }
        CHECK(grad_check(loss, params, grads, 1e-5) <= 1e-4);
    }
}
