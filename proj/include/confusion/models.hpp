#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "confusion/features.hpp"

namespace confusion {

enum class ModelKind { RandomForest, GaussianNB, LogisticRegression };

const char* to_string(ModelKind kind);

struct ModelParams {
    ModelKind kind = ModelKind::RandomForest;
    std::size_t n_trees = 100;
    std::size_t max_features_per_split = 0; // 0: floor(log2 d) + 1
    std::size_t max_depth = 0;              // 0: unlimited
    std::size_t min_leaf = 1;
    double l2_penalty = 1e-4;  // logistic regression only
    std::size_t max_iters = 200; // logistic regression only
    std::uint64_t seed = 0;
};

// feature < 0 marks a leaf carrying class counts; inner nodes route
// x[feature] < threshold to left.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    std::uint32_t n_confused = 0;
    std::uint32_t n_total = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;
};

struct ForestState {
    std::vector<Tree> trees;
};

struct GaussianNBState {
    // index 0 = Confused, 1 = NonConfused
    std::vector<double> mean[2];
    std::vector<double> variance[2]; // floored at 1e-9
    double log_prior[2] = {0, 0};
};

struct LogisticState {
    std::vector<double> weights;
    double bias = 0;
    std::size_t iterations = 0;
    double final_grad_norm = 0;
};

struct TrainingMeta {
    std::size_t n_train = 0;
    std::size_t n_confused = 0;
    std::size_t n_nonconfused = 0;
    std::size_t n_synthetic = 0;
    std::size_t n_degenerate_imputed = 0;
    double wall_time_seconds = 0;
};

struct Prediction {
    BinaryLabel label = BinaryLabel::NonConfused;
    double p_confused = 0;
};

struct TrainedModel {
    ModelParams params;
    std::vector<std::string> feature_names;
    std::uint64_t schema_hash = 0;
    TrainingMeta meta;
    std::variant<ForestState, GaussianNBState, LogisticState> state;

    ModelKind kind() const { return params.kind; }
    double p_confused(std::span<const double> x) const;
    // Ties at 0.5 resolve to Confused.
    Prediction predict(std::span<const double> x) const;
};

// Trains on the labelled rows. Requires both classes present.
TrainedModel train(const FeatureMatrix& matrix, const ModelParams& params);

// Schema-checked prediction over every labelled row.
std::vector<Prediction> predict_matrix(const TrainedModel& model, const FeatureMatrix& matrix);

// Single-file JSON container: format_version, kind, params, schema, state,
// checksum. Round trips bit-identically.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

namespace detail {
// Objective the logistic trainer descends: mean negative log-likelihood plus
// (l2/2)*||w||^2, bias unpenalized. Exposed so gradient checks can probe
// arbitrary points.
double logistic_objective(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, const std::vector<double>& weights,
                          double bias, double l2_penalty, std::vector<double>& grad_w,
                          double& grad_b);
} // namespace detail

} // namespace confusion
