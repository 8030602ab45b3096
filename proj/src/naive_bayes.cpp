#include <cmath>

#include "confusion/models.hpp"

namespace confusion::detail {

namespace {
constexpr double kVarianceFloor = 1e-9;
}

GaussianNBState train_gnb(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, std::size_t n_features) {
    GaussianNBState state;
    std::size_t counts[2] = {0, 0};
    for (int c = 0; c < 2; ++c) {
        state.mean[c].assign(n_features, 0.0);
        state.variance[c].assign(n_features, 0.0);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int c = y[i] == 1 ? 0 : 1; // slot 0 = Confused
        ++counts[c];
        for (std::size_t f = 0; f < n_features; ++f) state.mean[c][f] += x[i][f];
    }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < n_features; ++f) {
            state.mean[c][f] /= static_cast<double>(counts[c]);
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int c = y[i] == 1 ? 0 : 1;
        for (std::size_t f = 0; f < n_features; ++f) {
            const double d = x[i][f] - state.mean[c][f];
            state.variance[c][f] += d * d;
        }
    }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < n_features; ++f) {
            state.variance[c][f] =
                std::max(state.variance[c][f] / static_cast<double>(counts[c]),
                         kVarianceFloor);
        }
        state.log_prior[c] = std::log(static_cast<double>(counts[c]) /
                                      static_cast<double>(x.size()));
    }
    return state;
}

double gnb_p_confused(const GaussianNBState& state, std::span<const double> v) {
    double log_post[2];
    for (int c = 0; c < 2; ++c) {
        double lp = state.log_prior[c];
        for (std::size_t f = 0; f < v.size(); ++f) {
            const double var = state.variance[c][f];
            const double d = v[f] - state.mean[c][f];
            lp += -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
        }
        log_post[c] = lp;
    }
    // softmax over the two log posteriors
    const double m = std::max(log_post[0], log_post[1]);
    const double e0 = std::exp(log_post[0] - m);
    const double e1 = std::exp(log_post[1] - m);
    return e0 / (e0 + e1);
}

} // namespace confusion::detail
