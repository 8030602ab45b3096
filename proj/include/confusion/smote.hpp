#pragma once

#include <cstdint>
#include <vector>

#include "confusion/features.hpp"

namespace confusion {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    double target_ratio = 1.0; // minority/majority after balancing, in (0,1]
    std::uint64_t seed = 0;
    bool standardize_distances = false; // z-score features for the kNN search only
};

// n_synthetic interpolated minority points: base cycles round-robin over the
// minority rows, the partner is drawn uniformly among the base's k nearest
// minority neighbours, and the point is base + lambda * (neighbour - base)
// with lambda uniform in [0,1]. Throws on fewer than 2 minority rows;
// k is clamped to minority-1 when oversized.
std::vector<FeatureVector> smote(const std::vector<FeatureVector>& minority,
                                 const SmoteConfig& config, std::size_t n_synthetic);

// Appends synthetic minority rows until minority == round(ratio * majority).
// Original rows are untouched and keep their order.
FeatureMatrix balance_training_set(const FeatureMatrix& train, const SmoteConfig& config);

} // namespace confusion
