#include "confusion/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "confusion/common.hpp"
#include "confusion/parallel.hpp"
#include "confusion/rng.hpp"

namespace confusion::stats {

namespace {

double mean_of(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

AnovaResult anova_two_group(std::span<const double> group_a,
                            std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2) {
        throw std::invalid_argument("anova_two_group: each group needs >= 2 values");
    }
    AnovaResult r;
    r.n_a = group_a.size();
    r.n_b = group_b.size();
    r.mean_a = mean_of(group_a);
    r.mean_b = mean_of(group_b);
    r.sd_a = sample_sd(group_a, r.mean_a);
    r.sd_b = sample_sd(group_b, r.mean_b);

    const double n1 = static_cast<double>(r.n_a);
    const double n2 = static_cast<double>(r.n_b);
    const double grand = (n1 * r.mean_a + n2 * r.mean_b) / (n1 + n2);

    const double ss_between = n1 * (r.mean_a - grand) * (r.mean_a - grand) +
                              n2 * (r.mean_b - grand) * (r.mean_b - grand);
    double ss_within = 0;
    for (double x : group_a) ss_within += (x - r.mean_a) * (x - r.mean_a);
    for (double x : group_b) ss_within += (x - r.mean_b) * (x - r.mean_b);

    const double ss_total = ss_between + ss_within;
    if (ss_total == 0.0) {
        throw std::invalid_argument(
            "anova_two_group: zero variance across both groups");
    }
    r.eta_squared = ss_between / ss_total;

    const double df_within = n1 + n2 - 2.0;
    if (ss_within == 0.0) {
        // Perfect separation: F diverges. Keep it finite for serialization.
        r.F = std::numeric_limits<double>::max();
        r.p = 0.0;
        return r;
    }
    r.F = ss_between / (ss_within / df_within);
    r.p = f_survival(r.F, 1.0, df_within);
    return r;
}

ShapiroResult shapiro_wilk(std::span<const double> sample, std::uint64_t subsample_seed) {
    std::vector<double> x(sample.begin(), sample.end());
    if (x.size() > 5000) {
        Rng rng(mix_seed(subsample_seed, 0x5357)); // uniform subsample, fixed seed
        rng.shuffle(x);
        x.resize(5000);
    }
    const std::size_t n = x.size();
    if (n < 3) {
        throw std::invalid_argument("shapiro_wilk: n must be >= 3");
    }
    std::sort(x.begin(), x.end());
    if (x.front() == x.back()) {
        throw std::invalid_argument("shapiro_wilk: zero-variance sample");
    }

    // Royston's AS R94 approximation.
    const double an = static_cast<double>(n);
    const std::size_t n2 = n / 2;
    std::vector<double> m(n2);
    double summ2 = 0;
    for (std::size_t i = 0; i < n2; ++i) {
        m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
        summ2 += 2.0 * m[i] * m[i];
    }
    // For odd n the middle order statistic has expected value 0 and drops out.
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);

    // m[i] are the low-half expected order statistics (negative). The final
    // weights are positive and pair with the mirrored differences below.
    std::vector<double> a(n2);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        const double a1 = 0.221157 * rsn - 0.147981 * rsn * rsn -
                          2.071190 * std::pow(rsn, 3) + 4.434685 * std::pow(rsn, 4) -
                          2.706056 * std::pow(rsn, 5) - m[0] / ssumm2;
        std::size_t i1;
        double fac;
        if (n > 5) {
            const double a2 = 0.042981 * rsn - 0.293762 * rsn * rsn -
                              1.752461 * std::pow(rsn, 3) + 5.682633 * std::pow(rsn, 4) -
                              3.582633 * std::pow(rsn, 5) - m[1] / ssumm2;
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[0] = a1;
            a[1] = a2;
        } else {
            i1 = 1;
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
            a[0] = a1;
        }
        for (std::size_t i = i1; i < n2; ++i) a[i] = -m[i] / fac;
    }

    const double xbar = mean_of(x);
    double ssq = 0;
    for (double v : x) ssq += (v - xbar) * (v - xbar);
    double w_num = 0;
    for (std::size_t i = 0; i < n2; ++i) {
        w_num += a[i] * (x[n - 1 - i] - x[i]);
    }
    double W = (w_num * w_num) / ssq;
    if (W > 1.0) W = 1.0;

    ShapiroResult result;
    result.W = W;
    if (n == 3) {
        const double pi6 = 1.90985931710274;
        const double stqr = 1.04719755119660;
        double pw = pi6 * (std::asin(std::sqrt(W)) - stqr);
        result.p = std::clamp(pw, 0.0, 1.0);
        return result;
    }
    const double w1 = 1.0 - W;
    double mu, sigma, y;
    if (n <= 11) {
        const double gamma = -2.273 + 0.459 * an;
        y = std::log(w1);
        if (y >= gamma) {
            result.p = 1e-99;
            return result;
        }
        y = -std::log(gamma - y);
        mu = 0.5440 - 0.39978 * an + 0.025054 * an * an - 6.714e-4 * an * an * an;
        sigma = std::exp(1.3822 - 0.77857 * an + 0.062767 * an * an -
                         0.0020322 * an * an * an);
    } else {
        const double ln_n = std::log(an);
        y = std::log(w1);
        mu = -1.5861 - 0.31082 * ln_n - 0.083751 * ln_n * ln_n +
             0.0038915 * ln_n * ln_n * ln_n;
        sigma = std::exp(-0.4803 - 0.082676 * ln_n + 0.0030302 * ln_n * ln_n);
    }
    result.p = 1.0 - normal_cdf((y - mu) / sigma); // upper tail
    return result;
}

LeveneResult levene(std::span<const double> group_a, std::span<const double> group_b) {
    if (group_a.size() < 2 || group_b.size() < 2) {
        throw std::invalid_argument("levene: each group needs >= 2 values");
    }
    const double med_a = median_of({group_a.begin(), group_a.end()});
    const double med_b = median_of({group_b.begin(), group_b.end()});
    std::vector<double> dev_a, dev_b;
    dev_a.reserve(group_a.size());
    dev_b.reserve(group_b.size());
    for (double x : group_a) dev_a.push_back(std::fabs(x - med_a));
    for (double x : group_b) dev_b.push_back(std::fabs(x - med_b));

    LeveneResult r;
    bool all_equal = true;
    const double first = dev_a.empty() ? 0 : dev_a[0];
    for (double v : dev_a) all_equal = all_equal && v == first;
    for (double v : dev_b) all_equal = all_equal && v == first;
    if (all_equal) {
        r.W_stat = 0.0; // identical absolute deviations
        r.p = 1.0;
        return r;
    }
    AnovaResult anova = anova_two_group(dev_a, dev_b);
    r.W_stat = anova.F;
    r.p = anova.p;
    return r;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("pearson_r: length mismatch");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("pearson_r: need at least 2 points");
    }
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::invalid_argument("pearson_r: correlation undefined for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<std::string>
benjamini_hochberg(const std::vector<std::pair<std::string, double>>& pvalues, double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("benjamini_hochberg: q must lie in (0,1)");
    }
    for (const auto& [name, p] : pvalues) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("benjamini_hochberg: p for '" + name +
                                        "' outside [0,1]");
        }
    }
    std::vector<std::size_t> order(pvalues.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pvalues[a].second != pvalues[b].second) {
            return pvalues[a].second < pvalues[b].second;
        }
        return pvalues[a].first < pvalues[b].first;
    });
    const double m = static_cast<double>(pvalues.size());
    std::size_t last_k = 0; // largest k with p(k) <= k*q/m
    for (std::size_t k = 1; k <= order.size(); ++k) {
        if (pvalues[order[k - 1]].second <= static_cast<double>(k) * q / m) {
            last_k = k;
        }
    }
    std::vector<std::string> rejected;
    rejected.reserve(last_k);
    for (std::size_t k = 0; k < last_k; ++k) {
        rejected.push_back(pvalues[order[k]].first);
    }
    return rejected;
}

std::pair<std::vector<std::string>, std::vector<CollinearityDrop>>
collinearity_filter(const FeatureMatrix& matrix,
                    const std::map<std::string, double>& f_by_feature,
                    double threshold) {
    struct Pair {
        double abs_r;
        double r;
        std::size_t a, b;
    };
    const std::size_t d = matrix.schema.size();
    std::vector<std::vector<double>> cols(d);
    for (std::size_t i = 0; i < d; ++i) cols[i] = matrix.column(i);

    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double r;
            try {
                r = pearson_r(cols[i], cols[j]);
            } catch (const std::invalid_argument&) {
                continue; // constant column, nothing to correlate
            }
            if (std::fabs(r) > threshold) {
                pairs.push_back({std::fabs(r), r, i, j});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
        const auto& an = matrix.schema.names;
        return std::make_pair(an[a.a], an[a.b]) < std::make_pair(an[b.a], an[b.b]);
    });

    std::vector<bool> retained(d, true);
    std::vector<CollinearityDrop> drops;
    for (const Pair& p : pairs) {
        if (!retained[p.a] || !retained[p.b]) continue; // only against survivors
        const std::string& name_a = matrix.schema.names[p.a];
        const std::string& name_b = matrix.schema.names[p.b];
        auto f_of = [&](const std::string& name) {
            auto it = f_by_feature.find(name);
            return it == f_by_feature.end() ? 0.0 : it->second;
        };
        const double fa = f_of(name_a);
        const double fb = f_of(name_b);
        std::size_t drop;
        if (fa != fb) {
            drop = fa < fb ? p.a : p.b;
        } else {
            drop = name_a < name_b ? p.b : p.a; // tie: later name goes
        }
        retained[drop] = false;
        const std::size_t keep = drop == p.a ? p.b : p.a;
        drops.push_back({matrix.schema.names[drop], matrix.schema.names[keep], p.r});
    }
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < d; ++i) {
        if (retained[i]) kept.push_back(matrix.schema.names[i]);
    }
    return {kept, drops};
}

SelectionReport select_features(const FeatureMatrix& matrix, const SelectionConfig& config) {
    SelectionReport report;
    report.config = config;

    std::vector<double> confused_col, nonconfused_col;
    std::size_t n_confused = 0, n_nonconfused = 0;
    for (const FeatureVector& row : matrix.rows) {
        if (!row.label) continue;
        if (*row.label == BinaryLabel::Confused) ++n_confused;
        else ++n_nonconfused;
    }
    if (n_confused < 2 || n_nonconfused < 2) {
        throw InputError("select_features: both classes need >= 2 rows");
    }

    const std::size_t d = matrix.schema.size();
    std::vector<FeatureTestResult> results(d);
    std::vector<int> status(d, 0); // 0 tested, 1 zero-variance, 2 screened out
    std::vector<int> screen_normality(d, 0);
    std::vector<int> screen_homogeneity(d, 0);

    parallel_for(d, [&](std::size_t i) {
        std::vector<double> a, b;
        a.reserve(n_confused);
        b.reserve(n_nonconfused);
        for (const FeatureVector& row : matrix.rows) {
            if (!row.label) continue;
            (*row.label == BinaryLabel::Confused ? a : b).push_back(row.values[i]);
        }
        const std::string& name = matrix.schema.names[i];
        FeatureTestResult& out = results[i];
        out.feature = name;
        out.n_confused = a.size();
        out.n_nonconfused = b.size();

        bool constant = true;
        for (double v : a) constant = constant && v == a[0];
        for (double v : b) constant = constant && v == a[0];
        if (constant) {
            status[i] = 1;
            return;
        }

        if (config.screening != ScreeningMode::Off) {
            auto fails_normality = [&](const std::vector<double>& g) {
                if (g.size() < 3) return false;
                bool all_same = true;
                for (double v : g) all_same = all_same && v == g[0];
                if (all_same) return true; // degenerate within one group
                return shapiro_wilk(g, mix_seed(config.seed, i)).p < config.screening_alpha;
            };
            if (fails_normality(a) || fails_normality(b)) {
                screen_normality[i] = 1;
            }
            try {
                if (levene(a, b).p < config.screening_alpha) {
                    screen_homogeneity[i] = 1;
                }
            } catch (const std::invalid_argument&) {
                // degenerate deviations; leave the gate silent
            }
            if (config.screening == ScreeningMode::Strict &&
                (screen_normality[i] || screen_homogeneity[i])) {
                status[i] = 2;
                return;
            }
        }

        AnovaResult anova = anova_two_group(a, b);
        out.F = anova.F;
        out.p = anova.p;
        out.eta_squared = anova.eta_squared;
        out.mean_confused = anova.mean_a;
        out.sd_confused = anova.sd_a;
        out.mean_nonconfused = anova.mean_b;
        out.sd_nonconfused = anova.sd_b;
    });

    std::vector<std::pair<std::string, double>> pvalues;
    std::map<std::string, double> f_by_feature;
    std::vector<std::string> tested_names;
    for (std::size_t i = 0; i < d; ++i) {
        const std::string& name = matrix.schema.names[i];
        if (screen_normality[i]) report.rejected_by_normality.push_back(name);
        if (screen_homogeneity[i]) report.rejected_by_homogeneity.push_back(name);
        if (status[i] == 1) {
            report.dropped_zero_variance.push_back(name);
            continue;
        }
        if (status[i] == 2) continue;
        report.results.push_back(results[i]);
        pvalues.emplace_back(name, results[i].p);
        f_by_feature[name] = results[i].F;
        tested_names.push_back(name);
    }

    std::sort(report.results.begin(), report.results.end(),
              [](const FeatureTestResult& a, const FeatureTestResult& b) {
                  if (a.eta_squared != b.eta_squared) {
                      return a.eta_squared > b.eta_squared;
                  }
                  return a.feature < b.feature;
              });

    report.retained_after_bh = benjamini_hochberg(pvalues, config.q);
    std::sort(report.retained_after_bh.begin(), report.retained_after_bh.end());

    if (!report.retained_after_bh.empty()) {
        FeatureMatrix bh_matrix = project(matrix, report.retained_after_bh);
        auto [kept, drops] =
            collinearity_filter(bh_matrix, f_by_feature, config.r_threshold);
        report.rejected_by_collinearity = std::move(drops);
        report.retained = std::move(kept);
    }
    // Order the final set by effect size, matching the report ranking.
    std::vector<std::string> ordered;
    for (const FeatureTestResult& r : report.results) {
        if (std::find(report.retained.begin(), report.retained.end(), r.feature) !=
            report.retained.end()) {
            ordered.push_back(r.feature);
        }
    }
    report.retained = std::move(ordered);
    return report;
}

bool SelectionReport::is_retained(std::string_view feature) const {
    for (const std::string& name : retained) {
        if (name == feature) return true;
    }
    return false;
}

std::string SelectionReport::drop_reason(std::string_view feature) const {
    if (is_retained(feature)) return "";
    for (const std::string& name : dropped_zero_variance) {
        if (name == feature) return "zero_variance";
    }
    for (const CollinearityDrop& drop : rejected_by_collinearity) {
        if (drop.dropped == feature) return "collinear_with:" + drop.kept;
    }
    if (config.screening == ScreeningMode::Strict) {
        for (const std::string& name : rejected_by_normality) {
            if (name == feature) return "screening_normality";
        }
        for (const std::string& name : rejected_by_homogeneity) {
            if (name == feature) return "screening_homogeneity";
        }
    }
    return "benjamini_hochberg";
}

namespace {

const char* screening_name(ScreeningMode mode) {
    switch (mode) {
        case ScreeningMode::Off: return "off";
        case ScreeningMode::Advisory: return "advisory";
        case ScreeningMode::Strict: return "strict";
    }
    return "advisory";
}

} // namespace

std::string SelectionReport::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = {{"q", config.q},
                   {"r_threshold", config.r_threshold},
                   {"screening", screening_name(config.screening)},
                   {"screening_alpha", config.screening_alpha},
                   {"seed", config.seed}};
    j["results"] = nlohmann::ordered_json::array();
    for (const FeatureTestResult& r : results) {
        j["results"].push_back({{"feature", r.feature},
                                {"F", r.F},
                                {"p", r.p},
                                {"eta2", r.eta_squared},
                                {"mean_confused", r.mean_confused},
                                {"sd_confused", r.sd_confused},
                                {"mean_nonconfused", r.mean_nonconfused},
                                {"sd_nonconfused", r.sd_nonconfused},
                                {"n_confused", r.n_confused},
                                {"n_nonconfused", r.n_nonconfused},
                                {"retained", is_retained(r.feature)},
                                {"drop_reason", drop_reason(r.feature)}});
    }
    j["dropped_zero_variance"] = dropped_zero_variance;
    j["rejected_by_normality"] = rejected_by_normality;
    j["rejected_by_homogeneity"] = rejected_by_homogeneity;
    j["rejected_by_collinearity"] = nlohmann::ordered_json::array();
    for (const CollinearityDrop& drop : rejected_by_collinearity) {
        j["rejected_by_collinearity"].push_back(
            {{"dropped", drop.dropped}, {"kept", drop.kept}, {"r", drop.r}});
    }
    j["retained_after_bh"] = retained_after_bh;
    j["retained"] = retained;
    return j.dump(2);
}

std::string SelectionReport::to_csv() const {
    std::ostringstream out;
    out << "feature,F,p,eta2,mean_confused,sd_confused,mean_nonconfused,"
           "sd_nonconfused,retained,drop_reason\n";
    for (const FeatureTestResult& r : results) {
        out << r.feature << ',' << format_double(r.F) << ',' << format_double(r.p)
            << ',' << format_double(r.eta_squared) << ','
            << format_double(r.mean_confused) << ',' << format_double(r.sd_confused)
            << ',' << format_double(r.mean_nonconfused) << ','
            << format_double(r.sd_nonconfused) << ','
            << (is_retained(r.feature) ? "1" : "0") << ',' << drop_reason(r.feature)
            << '\n';
    }
    for (const std::string& name : dropped_zero_variance) {
        out << name << ",,,,,,,,0,zero_variance\n";
    }
    return out.str();
}

SelectionReport SelectionReport::from_json(const std::string& text) {
    SelectionReport report;
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        const auto& config = j.at("config");
        report.config.q = config.at("q").get<double>();
        report.config.r_threshold = config.at("r_threshold").get<double>();
        report.config.screening_alpha = config.at("screening_alpha").get<double>();
        report.config.seed = config.at("seed").get<std::uint64_t>();
        const std::string mode = config.at("screening").get<std::string>();
        report.config.screening = mode == "off"      ? ScreeningMode::Off
                                  : mode == "strict" ? ScreeningMode::Strict
                                                     : ScreeningMode::Advisory;
        for (const auto& r : j.at("results")) {
            FeatureTestResult out;
            out.feature = r.at("feature").get<std::string>();
            out.F = r.at("F").get<double>();
            out.p = r.at("p").get<double>();
            out.eta_squared = r.at("eta2").get<double>();
            out.mean_confused = r.at("mean_confused").get<double>();
            out.sd_confused = r.at("sd_confused").get<double>();
            out.mean_nonconfused = r.at("mean_nonconfused").get<double>();
            out.sd_nonconfused = r.at("sd_nonconfused").get<double>();
            out.n_confused = r.at("n_confused").get<std::size_t>();
            out.n_nonconfused = r.at("n_nonconfused").get<std::size_t>();
            report.results.push_back(std::move(out));
        }
        report.dropped_zero_variance =
            j.at("dropped_zero_variance").get<std::vector<std::string>>();
        report.rejected_by_normality =
            j.at("rejected_by_normality").get<std::vector<std::string>>();
        report.rejected_by_homogeneity =
            j.at("rejected_by_homogeneity").get<std::vector<std::string>>();
        for (const auto& d : j.at("rejected_by_collinearity")) {
            report.rejected_by_collinearity.push_back({d.at("dropped").get<std::string>(),
                                                       d.at("kept").get<std::string>(),
                                                       d.at("r").get<double>()});
        }
        report.retained_after_bh =
            j.at("retained_after_bh").get<std::vector<std::string>>();
        report.retained = j.at("retained").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed selection report: ") + e.what());
    }
    return report;
}

} // namespace confusion::stats
