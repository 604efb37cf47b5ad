#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "fairlens/agnostic.hpp"
#include "fairlens/datagen.hpp"
#include "fairlens/errors.hpp"
#include "fairlens/probes.hpp"
#include "fairlens/rng.hpp"

using namespace fairlens;
using namespace fairlens::agnostic;

namespace {

struct FaceSet {
    std::vector<std::vector<double>> train_x, val_x;
    std::vector<data::Demographics> train_demo;
    std::vector<int> train_g, val_g, train_e, val_e;
};

FaceSet make_faces(const data::GenConfig& cfg) {
    const data::Dataset ds = data::generate_dataset(cfg);
    FaceSet fs;
    for (int id : ds.train_ids) {
        fs.train_x.push_back(ds.profiles[id].face);
        fs.train_demo.push_back(ds.profiles[id].demographics);
        fs.train_g.push_back(ds.profiles[id].demographics.gender);
        fs.train_e.push_back(ds.profiles[id].demographics.ethnicity);
    }
    for (int id : ds.val_ids) {
        fs.val_x.push_back(ds.profiles[id].face);
        fs.val_g.push_back(ds.profiles[id].demographics.gender);
        fs.val_e.push_back(ds.profiles[id].demographics.ethnicity);
    }
    return fs;
}

std::vector<std::vector<double>> transform_all(const AgnosticTransform& t,
                                               const std::vector<std::vector<double>>& x) {
    std::vector<std::vector<double>> out;
    out.reserve(x.size());
    for (const auto& f : x) out.push_back(apply_transform(t, f));
    return out;
}

double probe_acc(const std::vector<std::vector<double>>& xtr, const std::vector<int>& ytr,
                 const std::vector<std::vector<double>>& xval, const std::vector<int>& yval,
                 int n_classes) {
    const probes::ProbeModel p =
        probes::train_probe(xtr, ytr, probes::ProbeKind::logistic, n_classes, 404);
    return probes::eval_probe(p, xval, yval);
}

}  // anonymous namespace

TEST_CASE("delta_penalty formula oracles") {
    CHECK(delta_penalty(0.9) == 0.0);
    CHECK(delta_penalty(0.4) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
    CHECK(delta_penalty(1.0) == doctest::Approx(std::log(1.1)).epsilon(1e-12));
    CHECK(delta_penalty(0.0) == doctest::Approx(std::log(1.9)).epsilon(1e-12));

    CHECK_THROWS_AS(delta_penalty(-0.01), ArgumentError);
    CHECK_THROWS_AS(delta_penalty(1.01), ArgumentError);
}

TEST_CASE("delta_penalty is monotone in the distance to the target") {
    double prev = delta_penalty(0.0);
    for (double p = 0.1; p <= 0.9 + 1e-12; p += 0.1) {
        const double v = delta_penalty(p);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(delta_penalty(0.9) == 0.0);
    for (double p = 1.0; p > 0.9; p -= 0.05) CHECK(delta_penalty(p) > 0.0);
    for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.1) CHECK(delta_penalty(p) >= 0.0);
}

TEST_CASE("apply_transform preserves unit norm and is deterministic") {
    const AgnosticTransform t = init_transform(7);
    RngStream rng(3, 9);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> f(data::kFaceDim);
        double n = 0.0;
        for (double& v : f) {
            v = rng.normal(0.0, 1.0);
            n += v * v;
        }
        n = std::sqrt(n);
        for (double& v : f) v /= n;

        const auto fa = apply_transform(t, f);
        REQUIRE(fa.size() == data::kFaceDim);
        double na = 0.0;
        for (double v : fa) na += v * v;
        CHECK(std::abs(std::sqrt(na) - 1.0) <= 1e-9);

        const auto fa2 = apply_transform(t, f);
        CHECK(fa == fa2);
    }
}

TEST_CASE("transform objective gradient matches finite differences") {
    data::GenConfig cfg;
    cfg.n_profiles = 48;
    const data::Dataset ds = data::generate_dataset(cfg);
    std::vector<std::vector<double>> faces;
    std::vector<data::Demographics> demo;
    for (int i = 0; i < 8; ++i) {
        faces.push_back(ds.profiles[i].face);
        demo.push_back(ds.profiles[i].demographics);
    }

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        AgnosticTransform t = init_transform(seed);
        // Move off the near-identity init so no |fa - f| reconstruction kink
        // sits within finite-difference reach; the 0.9 target similarly
        // keeps |p* - p| away from the fresh adversary's output range.
        {
            std::vector<double> flat = flatten_transform(t);
            RngStream jitter(seed, 778);
            for (double& v : flat) v += jitter.normal(0.0, 0.15);
            unflatten_transform(t, flat);
        }
        const AdversaryProbe adv = init_adversaries(seed + 100);
        RemovalConfig rcfg;
        rcfg.penalty_target = 0.9;

        std::vector<double> analytic;
        transform_loss_grad(t, adv, faces, demo, rcfg, &analytic);

        AgnosticTransform probe_t = t;
        auto loss_fn = [&](const std::vector<double>& flat) {
            unflatten_transform(probe_t, flat);
            return transform_loss_grad(probe_t, adv, faces, demo, rcfg, nullptr);
        };
        const double err =
            numerics::grad_check(loss_fn, flatten_transform(t), analytic, 1e-5);
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("removal on default embeddings suppresses gender while keeping utility") {
    data::GenConfig cfg;
    cfg.n_profiles = 24000;
    cfg.seed = 42;
    const FaceSet fs = make_faces(cfg);

    RemovalConfig rcfg;
    rcfg.seed = 42;
    const AgnosticTransform t = train_agnostic_transform(fs.train_x, fs.train_demo, rcfg);

    const auto ttr = transform_all(t, fs.train_x);
    const auto tval = transform_all(t, fs.val_x);

    const double g_before = probe_acc(fs.train_x, fs.train_g, fs.val_x, fs.val_g, 2);
    const double g_after = probe_acc(ttr, fs.train_g, tval, fs.val_g, 2);
    const double e_before = probe_acc(fs.train_x, fs.train_e, fs.val_x, fs.val_e, 3);
    const double e_after = probe_acc(ttr, fs.train_e, tval, fs.val_e, 3);
    std::printf("removal: gender %.4f -> %.4f, ethnicity %.4f -> %.4f\n", g_before, g_after,
                e_before, e_after);

    CHECK(g_after <= 0.60);
    CHECK(g_before - g_after >= 0.2);
    CHECK(e_after < e_before);

    // Utility retention on the subspace orthogonal to the injected
    // demographic directions (axes 0..3 in the synthetic geometry).
    double sum_xy = 0, sum_x = 0, sum_y = 0, sum_xx = 0, sum_yy = 0;
    double abs_err = 0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < fs.val_x.size(); ++i) {
        for (int d = 4; d < data::kFaceDim; ++d) {
            const double x = fs.val_x[i][d];
            const double y = tval[i][d];
            sum_xy += x * y;
            sum_x += x;
            sum_y += y;
            sum_xx += x * x;
            sum_yy += y * y;
            abs_err += std::abs(y - x);
            n += 1;
        }
    }
    const double cov = sum_xy / n - (sum_x / n) * (sum_y / n);
    const double var_x = sum_xx / n - (sum_x / n) * (sum_x / n);
    const double var_y = sum_yy / n - (sum_y / n) * (sum_y / n);
    const double corr = cov / std::sqrt(var_x * var_y);
    std::printf("removal: orthogonal-subspace corr %.4f, recon mae %.5f\n", corr,
                abs_err / static_cast<double>(n));
    CHECK(corr >= 0.8);

    // Floor: the ideal transform that nulls the demographic axes and
    // renormalizes; its orthogonal reconstruction error is pure rescaling.
    double floor_err = 0;
    for (const auto& f : fs.val_x) {
        double keep = 0.0;
        for (int d = 4; d < data::kFaceDim; ++d) keep += f[d] * f[d];
        const double scale = keep > 0.0 ? 1.0 / std::sqrt(keep) : 1.0;
        for (int d = 4; d < data::kFaceDim; ++d) floor_err += std::abs(f[d] * scale - f[d]);
    }
    floor_err /= static_cast<double>(n);
    std::printf("removal: ideal-projection floor mae %.5f\n", floor_err);
    CHECK(abs_err / static_cast<double>(n) <= 2.0 * floor_err);
}

TEST_CASE("removal with nothing to remove stays near the identity") {
    data::GenConfig cfg;
    cfg.n_profiles = 4800;
    cfg.seed = 17;
    cfg.face_gender_leakage = 0.0;
    cfg.face_ethnicity_leakage = 0.0;
    const FaceSet fs = make_faces(cfg);

    RemovalConfig rcfg;
    rcfg.seed = 17;
    const AgnosticTransform t = train_agnostic_transform(fs.train_x, fs.train_demo, rcfg);

    const auto ttr = transform_all(t, fs.train_x);
    const auto tval = transform_all(t, fs.val_x);

    const double g_before = probe_acc(fs.train_x, fs.train_g, fs.val_x, fs.val_g, 2);
    const double g_after = probe_acc(ttr, fs.train_g, tval, fs.val_g, 2);
    std::printf("null removal: gender probe %.4f -> %.4f\n", g_before, g_after);
    CHECK(std::abs(g_before - 0.5) <= 0.03);
    CHECK(std::abs(g_after - 0.5) <= 0.03);

    double recon = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < fs.val_x.size(); ++i) {
        for (int d = 0; d < data::kFaceDim; ++d) {
            recon += std::abs(tval[i][d] - fs.val_x[i][d]);
            n += 1;
        }
    }
    std::printf("null removal: recon mae %.5f\n", recon / static_cast<double>(n));
    CHECK(recon / static_cast<double>(n) <= 0.05);
}

TEST_CASE("removal config validation") {
    RemovalConfig bad;
    bad.adversary_steps = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    RemovalConfig target;
    target.penalty_target = 0.4;
    CHECK_THROWS_AS(target.validate(), ConfigError);

    RemovalConfig ok;
    CHECK_NOTHROW(ok.validate());
}
