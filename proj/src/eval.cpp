#include "confusion/eval.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "confusion/common.hpp"
#include "confusion/rng.hpp"

namespace confusion {

FoldPlan stratified_folds(const std::vector<BinaryLabel>& labels, std::size_t k,
                          std::uint64_t seed) {
    if (k < 2) {
        throw std::invalid_argument("stratified_folds: k must be >= 2");
    }
    std::vector<std::size_t> confused, nonconfused;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == BinaryLabel::Confused ? confused : nonconfused).push_back(i);
    }
    if (confused.size() < k || nonconfused.size() < k) {
        throw InputError("stratified_folds: class count below k (" +
                         std::to_string(confused.size()) + " confused, " +
                         std::to_string(nonconfused.size()) + " non-confused, k=" +
                         std::to_string(k) + ")");
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(labels.size(), 0);
    Rng rng(mix_seed(seed, 0x464f4c44)); // "FOLD"
    for (auto* rows : {&confused, &nonconfused}) {
        rng.shuffle(*rows);
        for (std::size_t j = 0; j < rows->size(); ++j) {
            plan.assignments[(*rows)[j]] = j % k; // round-robin deal
        }
    }
    return plan;
}

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                             std::size_t tn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    auto f1_of = [](std::optional<double> precision,
                    std::optional<double> recall) -> std::optional<double> {
        if (!precision || !recall) return std::nullopt;
        if (*precision + *recall == 0.0) return 0.0;
        return 2.0 * *precision * *recall / (*precision + *recall);
    };
    m.confused.precision = ratio(tp, tp + fp);
    m.confused.recall = ratio(tp, tp + fn);
    m.confused.f1 = f1_of(m.confused.precision, m.confused.recall);
    m.nonconfused.precision = ratio(tn, tn + fn);
    m.nonconfused.recall = ratio(tn, tn + fp);
    m.nonconfused.f1 = f1_of(m.nonconfused.precision, m.nonconfused.recall);
    if (m.confused.f1 && m.nonconfused.f1) {
        m.macro_f1 = 0.5 * (*m.confused.f1 + *m.nonconfused.f1);
    }
    const std::size_t n = tp + fp + fn + tn;
    m.accuracy = n == 0 ? 0.0
                        : static_cast<double>(tp + tn) / static_cast<double>(n);
    return m;
}

Metrics compute_metrics(const std::vector<BinaryLabel>& predictions,
                        const std::vector<BinaryLabel>& truth) {
    if (predictions.size() != truth.size()) {
        throw std::invalid_argument("compute_metrics: length mismatch");
    }
    if (predictions.empty()) {
        throw std::invalid_argument("compute_metrics: empty input");
    }
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_c = predictions[i] == BinaryLabel::Confused;
        const bool true_c = truth[i] == BinaryLabel::Confused;
        if (pred_c && true_c) ++tp;
        else if (pred_c && !true_c) ++fp;
        else if (!pred_c && true_c) ++fn;
        else ++tn;
    }
    return Metrics::from_counts(tp, fp, fn, tn);
}

namespace {

std::string config_snapshot(const ModelParams& params, const SmoteConfig& smote_cfg,
                            std::size_t k, std::uint64_t seed,
                            const FeatureMatrix& matrix) {
    nlohmann::ordered_json j;
    j["model"] = {{"kind", to_string(params.kind)},
                  {"n_trees", params.n_trees},
                  {"max_features_per_split", params.max_features_per_split},
                  {"max_depth", params.max_depth},
                  {"min_leaf", params.min_leaf},
                  {"l2_penalty", params.l2_penalty},
                  {"max_iters", params.max_iters},
                  {"seed", params.seed}};
    j["smote"] = {{"k_neighbors", smote_cfg.k_neighbors},
                  {"target_ratio", smote_cfg.target_ratio},
                  {"seed", smote_cfg.seed},
                  {"standardize_distances", smote_cfg.standardize_distances}};
    j["k"] = k;
    j["seed"] = seed;
    j["schema_hash"] = to_hex(matrix.schema.hash);
    j["features"] = matrix.schema.names;
    return j.dump();
}

} // namespace

EvaluationReport cross_validate(const FeatureMatrix& matrix, const ModelParams& params,
                                const SmoteConfig& smote_cfg, std::size_t k,
                                std::uint64_t seed) {
    std::vector<BinaryLabel> labels;
    std::vector<std::size_t> labelled_rows;
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        if (!matrix.rows[i].label) continue;
        if (matrix.rows[i].is_synthetic) {
            throw InputError("cross_validate: input matrix already contains "
                             "synthetic rows");
        }
        labels.push_back(*matrix.rows[i].label);
        labelled_rows.push_back(i);
    }
    const FoldPlan plan = stratified_folds(labels, k, seed);

    EvaluationReport report;
    report.seed = seed;
    report.config_json = config_snapshot(params, smote_cfg, k, seed, matrix);
    report.dataset_fingerprint = to_hex(matrix.fingerprint());

    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t fold = 0; fold < k; ++fold) {
        const auto t0 = std::chrono::steady_clock::now();
        FeatureMatrix train_matrix, test_matrix;
        train_matrix.schema = matrix.schema;
        test_matrix.schema = matrix.schema;
        for (std::size_t j = 0; j < labelled_rows.size(); ++j) {
            const FeatureVector& row = matrix.rows[labelled_rows[j]];
            if (plan.assignments[j] == fold) {
                test_matrix.rows.push_back(row);
            } else {
                train_matrix.rows.push_back(row);
            }
        }

        SmoteConfig fold_smote = smote_cfg;
        fold_smote.seed = mix_seed(mix_seed(seed, fold), 0x01);
        ModelParams fold_params = params;
        fold_params.seed = mix_seed(mix_seed(seed, fold), 0x02);

        FoldResult result;
        result.fold = fold;
        const std::size_t real_rows = train_matrix.rows.size();
        FeatureMatrix balanced;
        try {
            balanced = balance_training_set(train_matrix, fold_smote);
        } catch (const std::exception& e) {
            throw std::runtime_error("cross_validate: fold " + std::to_string(fold) +
                                     ": " + e.what());
        }
        result.n_train_real = real_rows;
        result.n_train_synthetic = balanced.rows.size() - real_rows;

        TrainedModel model;
        try {
            model = train(balanced, fold_params);
        } catch (const std::exception& e) {
            throw std::runtime_error("cross_validate: fold " + std::to_string(fold) +
                                     ": " + e.what());
        }

        std::vector<BinaryLabel> predictions, truth;
        predictions.reserve(test_matrix.rows.size());
        for (const FeatureVector& row : test_matrix.rows) {
            if (row.is_synthetic) ++result.n_synthetic_in_test;
            predictions.push_back(model.predict(row.values).label);
            truth.push_back(*row.label);
            result.test_ids.push_back(row.post_id);
        }
        result.metrics = compute_metrics(predictions, truth);
        result.metrics.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        tp += result.metrics.tp;
        fp += result.metrics.fp;
        fn += result.metrics.fn;
        tn += result.metrics.tn;
        report.folds.push_back(std::move(result));
    }
    report.pooled = Metrics::from_counts(tp, fp, fn, tn);
    for (const FoldResult& fold : report.folds) {
        report.pooled.wall_time_seconds += fold.metrics.wall_time_seconds;
    }
    return report;
}

const std::vector<std::string>& cross_domain_incompatible_features() {
    static const std::vector<std::string> names = {
        "question_stem_rate",
        "confusion_expressions_rate",
        "incompleteness_rate",
        "opinion_rate",
    };
    return names;
}

EvaluationReport cross_domain_evaluate(const FeatureMatrix& train_matrix,
                                       const FeatureMatrix& test_matrix,
                                       const ModelParams& params,
                                       const SmoteConfig& smote_cfg,
                                       bool drop_incompatible) {
    std::vector<std::string> shared;
    for (const std::string& name : train_matrix.schema.names) {
        if (!test_matrix.schema.index_of(name)) continue;
        if (drop_incompatible) {
            const auto& bad = cross_domain_incompatible_features();
            if (std::find(bad.begin(), bad.end(), name) != bad.end()) continue;
        }
        shared.push_back(name);
    }
    if (shared.empty()) {
        throw InputError("cross_domain_evaluate: no shared features between domains");
    }
    const FeatureMatrix train_proj = project(train_matrix, shared);
    const FeatureMatrix test_proj = project(test_matrix, shared);

    const auto t0 = std::chrono::steady_clock::now();
    EvaluationReport report;
    report.seed = params.seed;
    report.config_json =
        config_snapshot(params, smote_cfg, 1, params.seed, train_proj);
    report.dataset_fingerprint =
        to_hex(train_proj.fingerprint() ^ test_proj.fingerprint());

    FeatureMatrix balanced = balance_training_set(train_proj, smote_cfg);
    TrainedModel model = train(balanced, params);

    FoldResult result;
    result.fold = 0;
    result.n_train_real = train_proj.rows.size();
    result.n_train_synthetic = balanced.rows.size() - train_proj.rows.size();
    std::vector<BinaryLabel> predictions, truth;
    for (const FeatureVector& row : test_proj.rows) {
        if (!row.label) continue;
        if (row.is_synthetic) ++result.n_synthetic_in_test;
        predictions.push_back(model.predict(row.values).label);
        truth.push_back(*row.label);
        result.test_ids.push_back(row.post_id);
    }
    if (predictions.empty()) {
        throw InputError("cross_domain_evaluate: test matrix has no labelled rows");
    }
    result.metrics = compute_metrics(predictions, truth);
    result.metrics.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.pooled = result.metrics;
    report.folds.push_back(std::move(result));
    return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

ordered_json metrics_to_json(const Metrics& m, bool with_timing) {
    ordered_json j;
    j["confusion_matrix"] = {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
    j["confused"] = {{"precision", optional_number(m.confused.precision)},
                     {"recall", optional_number(m.confused.recall)},
                     {"f1", optional_number(m.confused.f1)}};
    j["nonconfused"] = {{"precision", optional_number(m.nonconfused.precision)},
                        {"recall", optional_number(m.nonconfused.recall)},
                        {"f1", optional_number(m.nonconfused.f1)}};
    j["macro_f1"] = optional_number(m.macro_f1);
    j["accuracy"] = m.accuracy;
    if (with_timing) {
        j["wall_time_seconds"] = m.wall_time_seconds;
    }
    return j;
}

} // namespace

std::string EvaluationReport::to_json(bool with_timing) const {
    ordered_json j;
    j["seed"] = seed;
    j["dataset_fingerprint"] = dataset_fingerprint;
    j["config"] = nlohmann::ordered_json::parse(
        config_json.empty() ? "{}" : config_json);
    j["folds"] = ordered_json::array();
    for (const FoldResult& fold : folds) {
        ordered_json f;
        f["fold"] = fold.fold;
        f["metrics"] = metrics_to_json(fold.metrics, with_timing);
        f["n_train_real"] = fold.n_train_real;
        f["n_train_synthetic"] = fold.n_train_synthetic;
        f["n_synthetic_in_test"] = fold.n_synthetic_in_test;
        f["test_ids"] = fold.test_ids;
        j["folds"].push_back(std::move(f));
    }
    j["pooled"] = metrics_to_json(pooled, with_timing);
    return j.dump(2);
}

namespace {

std::string csv_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : "";
}

void metrics_csv_row(std::ostringstream& out, const std::string& run_id,
                     const std::string& fold, const Metrics& m) {
    out << run_id << ',' << fold << ",Confused," << csv_cell(m.confused.precision)
        << ',' << csv_cell(m.confused.recall) << ',' << csv_cell(m.confused.f1) << ','
        << format_double(m.accuracy) << ',' << m.tp << ',' << m.fp << ',' << m.fn
        << ',' << m.tn << '\n';
}

} // namespace

std::string EvaluationReport::to_csv() const {
    std::ostringstream out;
    out << "run_id,fold,class,precision,recall,f1,accuracy,tp,fp,fn,tn\n";
    const std::string run_id = dataset_fingerprint + "-" + std::to_string(seed);
    for (const FoldResult& fold : folds) {
        metrics_csv_row(out, run_id, std::to_string(fold.fold), fold.metrics);
    }
    metrics_csv_row(out, run_id, "pooled", pooled);
    return out.str();
}

void emit_report(const EvaluationReport& report, const std::string& json_path,
                 const std::string& csv_path) {
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::binary);
        if (!out) {
            throw InputError("cannot write report: " + json_path);
        }
        out << report.to_json() << '\n';
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) {
            throw InputError("cannot write report: " + csv_path);
        }
        out << report.to_csv();
    }
}

} // namespace confusion
