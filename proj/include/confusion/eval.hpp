#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confusion/features.hpp"
#include "confusion/models.hpp"
#include "confusion/smote.hpp"

namespace confusion {

struct FoldPlan {
    std::size_t k = 10;
    std::vector<std::size_t> assignments; // per-row fold index
    std::uint64_t seed = 0;
};

// Per-class seeded shuffle, then round-robin dealing; every fold's class
// count is within one row of every other fold's. Requires each class
// count >= k.
FoldPlan stratified_folds(const std::vector<BinaryLabel>& labels, std::size_t k,
                          std::uint64_t seed);

struct ClassMetrics {
    std::optional<double> precision; // absent when the denominator is zero
    std::optional<double> recall;
    std::optional<double> f1;
};

struct Metrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0; // Confused is positive
    ClassMetrics confused;
    ClassMetrics nonconfused;
    std::optional<double> macro_f1;
    double accuracy = 0;
    double wall_time_seconds = 0;

    std::size_t n_test() const { return tp + fp + fn + tn; }
    static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
};

Metrics compute_metrics(const std::vector<BinaryLabel>& predictions,
                        const std::vector<BinaryLabel>& truth);

struct FoldResult {
    std::size_t fold = 0;
    Metrics metrics;
    std::vector<std::string> test_ids;
    std::size_t n_train_real = 0;
    std::size_t n_train_synthetic = 0;
    std::size_t n_synthetic_in_test = 0; // leakage guard, must stay 0
};

struct EvaluationReport {
    std::vector<FoldResult> folds;
    Metrics pooled; // micro-aggregated counts over folds
    std::string config_json;
    std::string dataset_fingerprint;
    std::uint64_t seed = 0;

    // with_timing=false drops wall-time fields for byte comparisons
    std::string to_json(bool with_timing = true) const;
    std::string to_csv() const; // one row per fold plus a pooled row
};

// Per fold: SMOTE-balance the training rows only, train, predict untouched
// real test rows. Synthetic rows never reach a test fold.
EvaluationReport cross_validate(const FeatureMatrix& matrix, const ModelParams& params,
                                const SmoteConfig& smote_cfg, std::size_t k,
                                std::uint64_t seed);

// Feature names the cross-domain analysis drops by default.
const std::vector<std::string>& cross_domain_incompatible_features();

// Projects both matrices onto the shared feature names (optionally minus the
// incompatible set), SMOTE+trains on the full training matrix and evaluates
// on every labelled test row.
EvaluationReport cross_domain_evaluate(const FeatureMatrix& train_matrix,
                                       const FeatureMatrix& test_matrix,
                                       const ModelParams& params, const SmoteConfig& smote_cfg,
                                       bool drop_incompatible = true);

// JSON (full) and CSV (flat metrics) renderings.
void emit_report(const EvaluationReport& report, const std::string& json_path,
                 const std::string& csv_path);

} // namespace confusion
