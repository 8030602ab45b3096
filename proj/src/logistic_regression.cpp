#include <cmath>
#include <vector>

#include "confusion/models.hpp"

namespace confusion::detail {

namespace {

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

double logistic_objective(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, const std::vector<double>& w,
                          double bias, double l2, std::vector<double>& grad_w,
                          double& grad_b) {
    const std::size_t n = x.size();
    const std::size_t d = w.size();
    grad_w.assign(d, 0.0);
    grad_b = 0.0;
    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = bias;
        for (std::size_t f = 0; f < d; ++f) z += w[f] * x[i][f];
        const double p = sigmoid(z);
        const double target = static_cast<double>(y[i]);
        // numerically safe cross entropy via log1p
        if (z >= 0) {
            loss += (1.0 - target) * z + std::log1p(std::exp(-z));
        } else {
            loss += -target * z + std::log1p(std::exp(z));
        }
        const double err = p - target;
        for (std::size_t f = 0; f < d; ++f) grad_w[f] += err * x[i][f];
        grad_b += err;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    grad_b *= inv_n;
    for (std::size_t f = 0; f < d; ++f) {
        grad_w[f] = grad_w[f] * inv_n + l2 * w[f];
        loss += 0.5 * l2 * w[f] * w[f];
    }
    return loss;
}

namespace {

double inf_norm(const std::vector<double>& v, double extra) {
    double m = std::fabs(extra);
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace

LogisticState train_logistic(const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y, const ModelParams& params,
                             std::size_t n_features) {
    LogisticState state;
    state.weights.assign(n_features, 0.0);
    state.bias = 0.0;

    std::vector<double> grad_w, trial_grad_w, trial_w(n_features);
    double grad_b = 0, trial_grad_b = 0;
    double loss = logistic_objective(x, y, state.weights, state.bias,
                                    params.l2_penalty, grad_w, grad_b);
    double step = 1.0;
    constexpr double kGradTol = 1e-6;
    constexpr double kArmijo = 1e-4;

    std::size_t iter = 0;
    for (; iter < params.max_iters; ++iter) {
        const double gnorm = inf_norm(grad_w, grad_b);
        if (gnorm < kGradTol) break;

        double g2 = grad_b * grad_b;
        for (double g : grad_w) g2 += g * g;

        // Backtracking line search along the negative gradient.
        double t = std::min(step * 2.0, 1e4);
        double trial_loss = 0;
        while (true) {
            for (std::size_t f = 0; f < n_features; ++f) {
                trial_w[f] = state.weights[f] - t * grad_w[f];
            }
            const double trial_b = state.bias - t * grad_b;
            trial_loss = logistic_objective(x, y, trial_w, trial_b, params.l2_penalty,
                                           trial_grad_w, trial_grad_b);
            if (trial_loss <= loss - kArmijo * t * g2 || t < 1e-14) {
                state.weights = trial_w;
                state.bias = trial_b;
                loss = trial_loss;
                grad_w = trial_grad_w;
                grad_b = trial_grad_b;
                step = t;
                break;
            }
            t *= 0.5;
        }
    }
    state.iterations = iter;
    state.final_grad_norm = inf_norm(grad_w, grad_b);
    return state;
}

double logistic_p_confused(const LogisticState& state, std::span<const double> v) {
    double z = state.bias;
    for (std::size_t f = 0; f < v.size(); ++f) z += state.weights[f] * v[f];
    return sigmoid(z);
}

} // namespace confusion::detail
