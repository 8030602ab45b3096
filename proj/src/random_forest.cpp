#include <algorithm>
#include <cmath>
#include <numeric>

#include "confusion/models.hpp"
#include "confusion/parallel.hpp"
#include "confusion/rng.hpp"

namespace confusion::detail {

namespace {

struct SplitCandidate {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0;
    double impurity = 0; // weighted child Gini
};

struct TreeBuilder {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;
    const ModelParams& params;
    std::size_t n_features;
    Rng rng;
    Tree tree;

    std::vector<std::size_t> indices;           // bootstrap sample, partitioned in place
    std::vector<std::size_t> feature_order;     // shuffled per node
    std::vector<std::pair<double, int>> scratch; // (value, label) sort buffer

    TreeBuilder(const std::vector<std::vector<double>>& x_,
                const std::vector<int>& y_, const ModelParams& params_,
                std::size_t n_features_, std::uint64_t seed)
        : x(x_), y(y_), params(params_), n_features(n_features_), rng(seed) {}

    void build() {
        const std::size_t n = x.size();
        indices.resize(n);
        for (std::size_t i = 0; i < n; ++i) indices[i] = rng.next_index(n);
        feature_order.resize(n_features);
        std::iota(feature_order.begin(), feature_order.end(), 0);
        scratch.reserve(n);
        tree.nodes.reserve(64);
        grow(0, n, 1);
    }

    int make_leaf(std::size_t begin, std::size_t end) {
        TreeNode node;
        for (std::size_t i = begin; i < end; ++i) {
            node.n_confused += static_cast<std::uint32_t>(y[indices[i]]);
            ++node.n_total;
        }
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size() - 1);
    }

    // Best Gini split of indices[begin,end) on one feature; nullopt-like
    // invalid result when the feature is constant over the node.
    SplitCandidate best_split_on(std::size_t feature, std::size_t begin,
                                 std::size_t end, std::size_t total_confused) {
        SplitCandidate best;
        best.feature = feature;
        const std::size_t n = end - begin;
        scratch.clear();
        for (std::size_t i = begin; i < end; ++i) {
            scratch.emplace_back(x[indices[i]][feature], y[indices[i]]);
        }
        std::sort(scratch.begin(), scratch.end());
        if (scratch.front().first == scratch.back().first) {
            return best; // constant feature
        }
        const double total = static_cast<double>(n);
        double best_impurity = 2.0;
        double left_confused = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_confused += scratch[i].second;
            if (scratch[i].first == scratch[i + 1].first) continue;
            const double n_left = static_cast<double>(i + 1);
            const double n_right = total - n_left;
            if (n_left < params.min_leaf || n_right < params.min_leaf) continue;
            const double pl = left_confused / n_left;
            const double pr = (static_cast<double>(total_confused) - left_confused) / n_right;
            const double gini = (n_left / total) * 2.0 * pl * (1.0 - pl) +
                                (n_right / total) * 2.0 * pr * (1.0 - pr);
            if (gini < best_impurity) {
                best_impurity = gini;
                best.valid = true;
                best.threshold = 0.5 * (scratch[i].first + scratch[i + 1].first);
                best.impurity = gini;
            }
        }
        return best;
    }

    int grow(std::size_t begin, std::size_t end, std::size_t depth) {
        const std::size_t n = end - begin;
        std::size_t confused = 0;
        for (std::size_t i = begin; i < end; ++i) confused += static_cast<std::size_t>(y[indices[i]]);

        const bool pure = confused == 0 || confused == n;
        const bool too_deep = params.max_depth > 0 && depth > params.max_depth;
        if (pure || too_deep || n < 2 * params.min_leaf || n < 2) {
            return make_leaf(begin, end);
        }

        // Candidate features: first max_features_per_split of a fresh shuffle.
        // When none of them admits a split, keep walking the shuffled list so
        // consistent data always shatters.
        for (std::size_t i = feature_order.size(); i > 1; --i) {
            std::swap(feature_order[i - 1], feature_order[rng.next_index(i)]);
        }
        SplitCandidate best;
        std::size_t tried = 0;
        for (std::size_t f : feature_order) {
            if (tried >= params.max_features_per_split && best.valid) break;
            SplitCandidate cand = best_split_on(f, begin, end, confused);
            ++tried;
            if (cand.valid && (!best.valid || cand.impurity < best.impurity)) {
                best = cand;
            }
        }
        if (!best.valid) {
            return make_leaf(begin, end); // duplicate rows with mixed labels
        }

        auto mid_it = std::partition(
            indices.begin() + static_cast<std::ptrdiff_t>(begin),
            indices.begin() + static_cast<std::ptrdiff_t>(end),
            [&](std::size_t idx) { return x[idx][best.feature] < best.threshold; });
        const std::size_t mid =
            static_cast<std::size_t>(mid_it - indices.begin());

        TreeNode node;
        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        tree.nodes.push_back(node);
        const int node_id = static_cast<int>(tree.nodes.size() - 1);
        const int left = grow(begin, mid, depth + 1);
        const int right = grow(mid, end, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = left;
        tree.nodes[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }
};

} // namespace

ForestState train_forest(const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y, const ModelParams& params,
                         std::size_t n_features) {
    ForestState forest;
    forest.trees.resize(params.n_trees);
    parallel_for(params.n_trees, [&](std::size_t t) {
        TreeBuilder builder(x, y, params, n_features, mix_seed(params.seed, t));
        builder.build();
        forest.trees[t] = std::move(builder.tree);
    });
    return forest;
}

double forest_p_confused(const ForestState& forest, std::span<const double> v) {
    double sum = 0;
    for (const Tree& tree : forest.trees) {
        int node = 0;
        while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
            const TreeNode& tn = tree.nodes[static_cast<std::size_t>(node)];
            node = v[static_cast<std::size_t>(tn.feature)] < tn.threshold ? tn.left
                                                                          : tn.right;
        }
        const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(node)];
        sum += leaf.n_total > 0
                   ? static_cast<double>(leaf.n_confused) / static_cast<double>(leaf.n_total)
                   : 0.5;
    }
    return sum / static_cast<double>(forest.trees.size());
}

} // namespace confusion::detail
