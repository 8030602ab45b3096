#include "confusion/smote.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "confusion/common.hpp"
#include "confusion/parallel.hpp"
#include "confusion/rng.hpp"

namespace confusion {

namespace {

// k nearest neighbours per row (self excluded), brute force, ties broken by
// index for determinism.
std::vector<std::vector<std::size_t>>
nearest_neighbours(const std::vector<FeatureVector>& points, std::size_t k,
                   bool standardize) {
    const std::size_t n = points.size();
    const std::size_t d = points.empty() ? 0 : points[0].values.size();

    std::vector<double> scale(d, 1.0);
    if (standardize) {
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0;
            for (const FeatureVector& p : points) mean += p.values[j];
            mean /= static_cast<double>(n);
            double var = 0;
            for (const FeatureVector& p : points) {
                var += (p.values[j] - mean) * (p.values[j] - mean);
            }
            var /= static_cast<double>(n);
            scale[j] = var > 0 ? 1.0 / std::sqrt(var) : 0.0;
        }
    }

    std::vector<std::vector<std::size_t>> result(n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double d2 = 0;
            for (std::size_t f = 0; f < d; ++f) {
                const double diff = (points[i].values[f] - points[j].values[f]) * scale[f];
                d2 += diff * diff;
            }
            dist.emplace_back(d2, j);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        result[i].reserve(k);
        for (std::size_t t = 0; t < k; ++t) result[i].push_back(dist[t].second);
    });
    return result;
}

} // namespace

std::vector<FeatureVector> smote(const std::vector<FeatureVector>& minority,
                                 const SmoteConfig& config, std::size_t n_synthetic) {
    if (minority.size() < 2) {
        throw InputError("smote: need at least 2 minority rows");
    }
    std::size_t k = config.k_neighbors;
    if (k < 1) k = 1;
    if (k > minority.size() - 1) {
        k = minority.size() - 1; // clamp; the caller's k exceeds the pool
    }

    const auto neighbours =
        nearest_neighbours(minority, k, config.standardize_distances);

    // Single sequential stream: base index, neighbour pick, lambda.
    Rng rng(mix_seed(config.seed, 0x534d4f54)); // "SMOT"
    std::vector<FeatureVector> synthetic;
    synthetic.reserve(n_synthetic);
    const std::size_t d = minority[0].values.size();
    for (std::size_t s = 0; s < n_synthetic; ++s) {
        const std::size_t base_idx = s % minority.size(); // round-robin base
        const FeatureVector& base = minority[base_idx];
        const FeatureVector& partner =
            minority[neighbours[base_idx][rng.next_index(k)]];
        const double lambda = rng.next_unit();

        FeatureVector out;
        out.post_id = "synth_" + std::to_string(s);
        out.values.resize(d);
        for (std::size_t f = 0; f < d; ++f) {
            out.values[f] =
                base.values[f] + lambda * (partner.values[f] - base.values[f]);
        }
        out.label = base.label;
        out.is_synthetic = true;
        synthetic.push_back(std::move(out));
    }
    return synthetic;
}

FeatureMatrix balance_training_set(const FeatureMatrix& train, const SmoteConfig& config) {
    if (!(config.target_ratio > 0.0 && config.target_ratio <= 1.0)) {
        throw std::invalid_argument("balance_training_set: target_ratio must be in (0,1]");
    }
    std::vector<FeatureVector> confused, nonconfused;
    for (const FeatureVector& row : train.rows) {
        if (!row.label) continue;
        (*row.label == BinaryLabel::Confused ? confused : nonconfused).push_back(row);
    }
    if (confused.empty() || nonconfused.empty()) {
        throw InputError("balance_training_set: both classes must be present");
    }
    const bool confused_minority = confused.size() <= nonconfused.size();
    const auto& minority = confused_minority ? confused : nonconfused;
    const auto& majority = confused_minority ? nonconfused : confused;

    const std::size_t target = static_cast<std::size_t>(
        std::llround(config.target_ratio * static_cast<double>(majority.size())));
    FeatureMatrix out;
    out.schema = train.schema;
    out.rows = train.rows;
    if (target <= minority.size()) {
        return out; // already balanced or better
    }
    std::vector<FeatureVector> synthetic =
        smote(minority, config, target - minority.size());
    for (auto& row : synthetic) out.rows.push_back(std::move(row));
    return out;
}

} // namespace confusion
