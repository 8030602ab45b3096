#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "confusion/features.hpp"

namespace confusion::stats {

// I_x(a,b), absolute error below 1e-12 over the usual range.
double regularized_incomplete_beta(double x, double a, double b);

// P(F_{df1,df2} > f).
double f_survival(double f, double df1, double df2);

double normal_cdf(double z);
double normal_quantile(double p);

struct AnovaResult {
    double F = 0;
    double p = 1;
    double eta_squared = 0;
    double mean_a = 0, sd_a = 0;
    double mean_b = 0, sd_b = 0;
    std::size_t n_a = 0, n_b = 0;
};

// One-way two-group ANOVA with df (1, n1+n2-2). Throws on groups smaller
// than 2 or when every value across both groups is identical.
AnovaResult anova_two_group(std::span<const double> group_a, std::span<const double> group_b);

struct ShapiroResult {
    double W = 0;
    double p = 0;
};

// Royston's approximation (AS R94), 3 <= n <= 5000. Larger samples are
// subsampled uniformly with the given seed.
ShapiroResult shapiro_wilk(std::span<const double> sample, std::uint64_t subsample_seed = 0);

struct LeveneResult {
    double W_stat = 0;
    double p = 1;
};

// Brown-Forsythe variant: absolute deviations from group medians through the
// two-group ANOVA.
LeveneResult levene(std::span<const double> group_a, std::span<const double> group_b);

// Sample Pearson correlation. Throws on length mismatch, n < 2 or a
// constant input.
double pearson_r(std::span<const double> x, std::span<const double> y);

// Step-up FDR control: sort ascending, find the largest k with
// p(k) <= k*q/m, reject 1..k. Returns the rejected names.
std::vector<std::string>
benjamini_hochberg(const std::vector<std::pair<std::string, double>>& pvalues, double q);

enum class ScreeningMode { Off, Advisory, Strict };

struct SelectionConfig {
    double q = 0.05;
    double r_threshold = 0.9;
    ScreeningMode screening = ScreeningMode::Advisory;
    double screening_alpha = 0.05;
    std::uint64_t seed = 0; // Shapiro-Wilk subsampling
};

struct FeatureTestResult {
    std::string feature;
    double F = 0;
    double p = 1;
    double eta_squared = 0;
    double mean_confused = 0, sd_confused = 0;
    double mean_nonconfused = 0, sd_nonconfused = 0;
    std::size_t n_confused = 0, n_nonconfused = 0;
};

struct CollinearityDrop {
    std::string dropped;
    std::string kept;
    double r = 0;
};

struct SelectionReport {
    std::vector<FeatureTestResult> results; // eta^2 descending, name ascending
    std::vector<std::string> dropped_zero_variance;
    std::vector<std::string> rejected_by_normality;   // screening flags
    std::vector<std::string> rejected_by_homogeneity; // screening flags
    std::vector<CollinearityDrop> rejected_by_collinearity;
    std::vector<std::string> retained_after_bh;
    std::vector<std::string> retained; // final set fed to training
    SelectionConfig config;

    bool is_retained(std::string_view feature) const;
    std::string drop_reason(std::string_view feature) const;
    std::string to_json() const;
    std::string to_csv() const;
    static SelectionReport from_json(const std::string& text);
};

// Pairs with |r| above threshold processed in descending |r|; the smaller-F
// member is dropped (ties: lexicographically later name). Returns the
// retained names and the drop log.
std::pair<std::vector<std::string>, std::vector<CollinearityDrop>>
collinearity_filter(const FeatureMatrix& matrix,
                    const std::map<std::string, double>& f_by_feature,
                    double threshold);

// Full battery: screening, per-feature ANOVA, BH over surviving p-values,
// collinearity filter, ranked report. Requires both classes with >= 2 rows.
SelectionReport select_features(const FeatureMatrix& matrix, const SelectionConfig& config);

} // namespace confusion::stats
