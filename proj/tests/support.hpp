#pragma once

// Test-side oracles, kept independent of the library paths they audit.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oracle {

// Nearest-class-mean classifier (LDA with shared isotropic covariance).
// Matches the Bayes rule for equal-prior Gaussians with equal covariance,
// which is exactly the synthetic face-embedding geometry.
class NearestMean {
public:
    void fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
             int n_classes) {
        const std::size_t dim = x.front().size();
        means_.assign(n_classes, std::vector<double>(dim, 0.0));
        std::vector<int> counts(n_classes, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            counts[y[i]] += 1;
            for (std::size_t d = 0; d < dim; ++d) means_[y[i]][d] += x[i][d];
        }
        for (int c = 0; c < n_classes; ++c)
            if (counts[c] > 0)
                for (double& v : means_[c]) v /= counts[c];
    }

    int predict(const std::vector<double>& x) const {
        int best = 0;
        double best_d = 1e300;
        for (std::size_t c = 0; c < means_.size(); ++c) {
            double d = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double diff = x[i] - means_[c][i];
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        return best;
    }

    double accuracy(const std::vector<std::vector<double>>& x, const std::vector<int>& y) const {
        int hits = 0;
        for (std::size_t i = 0; i < x.size(); ++i) hits += predict(x[i]) == y[i];
        return static_cast<double>(hits) / static_cast<double>(x.size());
    }

private:
    std::vector<std::vector<double>> means_;
};

// Plain full-batch gradient-descent logistic regression over bag-of-words
// counts. Deliberately simple: no Adam, no minibatching.
class BowLogistic {
public:
    void fit(const std::vector<std::map<int, int>>& bows, const std::vector<int>& y,
             int vocab_size, int iters = 200, double lr = 2.0) {
        w_.assign(vocab_size, 0.0);
        b_ = 0.0;
        const double n = static_cast<double>(bows.size());
        for (int it = 0; it < iters; ++it) {
            std::vector<double> gw(vocab_size, 0.0);
            double gb = 0.0;
            for (std::size_t i = 0; i < bows.size(); ++i) {
                const double err = prob(bows[i]) - y[i];
                for (const auto& [tok, cnt] : bows[i]) gw[tok] += err * cnt;
                gb += err;
            }
            for (int j = 0; j < vocab_size; ++j) w_[j] -= lr * gw[j] / n;
            b_ -= lr * gb / n;
        }
    }

    double prob(const std::map<int, int>& bow) const {
        double z = b_;
        for (const auto& [tok, cnt] : bow) z += w_[tok] * cnt;
        return 1.0 / (1.0 + std::exp(-z));
    }

    double accuracy(const std::vector<std::map<int, int>>& bows, const std::vector<int>& y) const {
        int hits = 0;
        for (std::size_t i = 0; i < bows.size(); ++i) hits += (prob(bows[i]) >= 0.5) == (y[i] == 1);
        return static_cast<double>(hits) / static_cast<double>(bows.size());
    }

private:
    std::vector<double> w_;
    double b_ = 0.0;
};

// Plug-in mutual information (nats) between two small discrete variables.
inline double discrete_mutual_information(const std::vector<int>& a, const std::vector<int>& b,
                                          int ka, int kb) {
    std::vector<double> joint(static_cast<std::size_t>(ka) * kb, 0.0);
    std::vector<double> pa(ka, 0.0), pb(kb, 0.0);
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[a[i] * kb + b[i]] += 1.0;
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
    }
    double mi = 0.0;
    for (int i = 0; i < ka; ++i) {
        for (int j = 0; j < kb; ++j) {
            const double pij = joint[i * kb + j] / n;
            if (pij <= 0.0) continue;
            mi += pij * std::log(pij / ((pa[i] / n) * (pb[j] / n)));
        }
    }
    return mi;
}

}  // namespace oracle
