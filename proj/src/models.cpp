#include "confusion/models.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "confusion/common.hpp"

namespace confusion {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::GaussianNB: return "gaussian_nb";
        case ModelKind::LogisticRegression: return "logistic_regression";
    }
    return "random_forest";
}

namespace detail {
ForestState train_forest(const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y, const ModelParams& params,
                         std::size_t n_features);
GaussianNBState train_gnb(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, std::size_t n_features);
LogisticState train_logistic(const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y, const ModelParams& params,
                             std::size_t n_features);
double forest_p_confused(const ForestState& forest, std::span<const double> v);
double gnb_p_confused(const GaussianNBState& state, std::span<const double> v);
double logistic_p_confused(const LogisticState& state, std::span<const double> v);
} // namespace detail

TrainedModel train(const FeatureMatrix& matrix, const ModelParams& params) {
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<std::vector<double>> x;
    std::vector<int> y; // 1 = Confused
    TrainingMeta meta;
    for (const FeatureVector& row : matrix.rows) {
        if (!row.label) continue;
        x.push_back(row.values);
        y.push_back(*row.label == BinaryLabel::Confused ? 1 : 0);
        if (*row.label == BinaryLabel::Confused) ++meta.n_confused;
        else ++meta.n_nonconfused;
        if (row.is_synthetic) ++meta.n_synthetic;
        if (row.degenerate) ++meta.n_degenerate_imputed;
    }
    meta.n_train = x.size();
    if (x.empty()) {
        throw InputError("train: no labelled rows");
    }
    if (meta.n_confused == 0 || meta.n_nonconfused == 0) {
        throw InputError("train: both classes must be present");
    }

    TrainedModel model;
    model.params = params;
    model.feature_names = matrix.schema.names;
    model.schema_hash = matrix.schema.hash;

    const std::size_t d = matrix.schema.size();
    if (model.params.max_features_per_split == 0) {
        model.params.max_features_per_split =
            static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(d)))) + 1;
    }
    model.params.max_features_per_split =
        std::min(model.params.max_features_per_split, d);

    switch (params.kind) {
        case ModelKind::RandomForest:
            model.state = detail::train_forest(x, y, model.params, d);
            break;
        case ModelKind::GaussianNB:
            model.state = detail::train_gnb(x, y, d);
            break;
        case ModelKind::LogisticRegression:
            model.state = detail::train_logistic(x, y, model.params, d);
            break;
    }
    meta.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    model.meta = meta;
    return model;
}

double TrainedModel::p_confused(std::span<const double> x) const {
    if (x.size() != feature_names.size()) {
        throw std::invalid_argument("predict: feature count mismatch");
    }
    if (const auto* forest = std::get_if<ForestState>(&state)) {
        return detail::forest_p_confused(*forest, x);
    }
    if (const auto* gnb = std::get_if<GaussianNBState>(&state)) {
        return detail::gnb_p_confused(*gnb, x);
    }
    return detail::logistic_p_confused(std::get<LogisticState>(state), x);
}

Prediction TrainedModel::predict(std::span<const double> x) const {
    Prediction pred;
    pred.p_confused = p_confused(x);
    // >= 0.5 goes to Confused: recall on the positive class wins ties.
    pred.label = pred.p_confused >= 0.5 ? BinaryLabel::Confused : BinaryLabel::NonConfused;
    return pred;
}

std::vector<Prediction> predict_matrix(const TrainedModel& model,
                                       const FeatureMatrix& matrix) {
    if (matrix.schema.hash != model.schema_hash) {
        throw InputError("predict: schema hash mismatch (model " +
                         to_hex(model.schema_hash) + ", data " +
                         to_hex(matrix.schema.hash) + ")");
    }
    std::vector<Prediction> out;
    out.reserve(matrix.rows.size());
    for (const FeatureVector& row : matrix.rows) {
        if (!row.label) continue;
        out.push_back(model.predict(row.values));
    }
    return out;
}

} // namespace confusion
