#include <doctest.h>

#include <algorithm>
#include <set>

#include <json.hpp>

#include "confusion/common.hpp"
#include "confusion/eval.hpp"
#include "confusion/rng.hpp"
#include "support.hpp"

using namespace confusion;

namespace {

std::vector<std::string> config_feature_names(const std::string& config_json) {
    return nlohmann::json::parse(config_json)
        .at("features")
        .get<std::vector<std::string>>();
}

FeatureVector vec(const std::string& id, std::vector<double> values, BinaryLabel label) {
    FeatureVector v;
    v.post_id = id;
    v.values = std::move(values);
    v.label = label;
    return v;
}

// learnable two-feature matrix with a 1:3-ish imbalance
FeatureMatrix small_matrix(std::size_t n_confused, std::size_t n_nonconfused,
                           std::uint64_t seed, double shift = 2.5) {
    FeatureMatrix m;
    m.schema = FeatureSchema::from_names({"a", "b"});
    Rng rng(seed);
    for (std::size_t i = 0; i < n_confused; ++i) {
        m.rows.push_back(vec("c" + std::to_string(i),
                             {rng.next_normal() + shift, rng.next_normal()},
                             BinaryLabel::Confused));
    }
    for (std::size_t i = 0; i < n_nonconfused; ++i) {
        m.rows.push_back(vec("n" + std::to_string(i),
                             {rng.next_normal(), rng.next_normal()},
                             BinaryLabel::NonConfused));
    }
    return m;
}

} // namespace

TEST_CASE("stratified_folds dealing") {
    SUBCASE("10+10 into 10 folds: one of each per fold") {
        std::vector<BinaryLabel> labels;
        for (int i = 0; i < 10; ++i) labels.push_back(BinaryLabel::Confused);
        for (int i = 0; i < 10; ++i) labels.push_back(BinaryLabel::NonConfused);
        FoldPlan plan = stratified_folds(labels, 10, 3);
        std::vector<int> confused_per_fold(10, 0), nonconfused_per_fold(10, 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == BinaryLabel::Confused) ++confused_per_fold[plan.assignments[i]];
            else ++nonconfused_per_fold[plan.assignments[i]];
        }
        for (int f = 0; f < 10; ++f) {
            CHECK(confused_per_fold[f] == 1);
            CHECK(nonconfused_per_fold[f] == 1);
        }
    }

    SUBCASE("11+10 into 10 folds: exactly one fold holds 2 confused") {
        std::vector<BinaryLabel> labels;
        for (int i = 0; i < 11; ++i) labels.push_back(BinaryLabel::Confused);
        for (int i = 0; i < 10; ++i) labels.push_back(BinaryLabel::NonConfused);
        FoldPlan plan = stratified_folds(labels, 10, 5);
        std::vector<int> confused_per_fold(10, 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == BinaryLabel::Confused) ++confused_per_fold[plan.assignments[i]];
        }
        CHECK(std::count(confused_per_fold.begin(), confused_per_fold.end(), 2) == 1);
        CHECK(std::count(confused_per_fold.begin(), confused_per_fold.end(), 1) == 9);
    }

    SUBCASE("class smaller than k errors") {
        std::vector<BinaryLabel> labels;
        for (int i = 0; i < 5; ++i) labels.push_back(BinaryLabel::Confused);
        for (int i = 0; i < 100; ++i) labels.push_back(BinaryLabel::NonConfused);
        CHECK_THROWS_AS(stratified_folds(labels, 10, 1), InputError);
    }

    SUBCASE("per-fold class proportions within one row over random shapes") {
        Rng rng(14);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t k = 2 + rng.next_index(9);
            const std::size_t nc = k + rng.next_index(50);
            const std::size_t nn = k + rng.next_index(50);
            std::vector<BinaryLabel> labels;
            for (std::size_t i = 0; i < nc; ++i) labels.push_back(BinaryLabel::Confused);
            for (std::size_t i = 0; i < nn; ++i) labels.push_back(BinaryLabel::NonConfused);
            FoldPlan plan = stratified_folds(labels, k, trial);
            std::vector<std::size_t> cf(k, 0), nf(k, 0);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels[i] == BinaryLabel::Confused) ++cf[plan.assignments[i]];
                else ++nf[plan.assignments[i]];
            }
            for (std::size_t f = 0; f < k; ++f) {
                CHECK(cf[f] >= nc / k);
                CHECK(cf[f] <= nc / k + 1);
                CHECK(nf[f] >= nn / k);
                CHECK(nf[f] <= nn / k + 1);
            }
        }
    }
}

TEST_CASE("compute_metrics") {
    using BL = BinaryLabel;
    SUBCASE("perfect classifier") {
        std::vector<BL> truth = {BL::Confused, BL::NonConfused, BL::Confused};
        Metrics m = compute_metrics(truth, truth);
        CHECK(*m.confused.precision == doctest::Approx(1.0));
        CHECK(*m.confused.recall == doctest::Approx(1.0));
        CHECK(*m.confused.f1 == doctest::Approx(1.0));
        CHECK(m.accuracy == doctest::Approx(1.0));
    }

    SUBCASE("hand confusion matrix: tp=2 fp=1 fn=1 tn=6") {
        std::vector<BL> truth, pred;
        auto push = [&](BL t, BL p, int times) {
            for (int i = 0; i < times; ++i) {
                truth.push_back(t);
                pred.push_back(p);
            }
        };
        push(BL::Confused, BL::Confused, 2);
        push(BL::NonConfused, BL::Confused, 1);
        push(BL::Confused, BL::NonConfused, 1);
        push(BL::NonConfused, BL::NonConfused, 6);
        Metrics m = compute_metrics(pred, truth);
        CHECK(m.tp == 2);
        CHECK(m.fp == 1);
        CHECK(m.fn == 1);
        CHECK(m.tn == 6);
        CHECK(*m.confused.precision == doctest::Approx(2.0 / 3.0));
        CHECK(*m.confused.recall == doctest::Approx(2.0 / 3.0));
        CHECK(*m.confused.f1 == doctest::Approx(2.0 / 3.0));
        CHECK(m.n_test() == 10);
    }

    SUBCASE("degenerate predictor: undefined precision is flagged, not NaN") {
        std::vector<BL> truth = {BL::Confused, BL::NonConfused, BL::Confused};
        std::vector<BL> pred(3, BL::NonConfused);
        Metrics m = compute_metrics(pred, truth);
        CHECK_FALSE(m.confused.precision.has_value());
        CHECK(*m.confused.recall == doctest::Approx(0.0));
        CHECK_FALSE(m.confused.f1.has_value());
    }
}

TEST_CASE("cross_validate: leakage freedom and fold partition") {
    FeatureMatrix matrix = small_matrix(24, 72, 99);
    ModelParams params;
    params.n_trees = 10;
    params.seed = 1;
    SmoteConfig smote_cfg;
    smote_cfg.seed = 1;

    EvaluationReport report = cross_validate(matrix, params, smote_cfg, 6, 42);
    REQUIRE(report.folds.size() == 6);

    std::set<std::string> seen;
    std::size_t total_tested = 0;
    for (const FoldResult& fold : report.folds) {
        CHECK(fold.n_synthetic_in_test == 0);
        CHECK(fold.n_train_synthetic > 0); // 1:3 imbalance forces synthesis
        for (const std::string& id : fold.test_ids) {
            CHECK(seen.insert(id).second); // each row tested exactly once
        }
        total_tested += fold.test_ids.size();
    }
    CHECK(total_tested == matrix.rows.size());

    // pooled counts equal the fold sums
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const FoldResult& fold : report.folds) {
        tp += fold.metrics.tp;
        fp += fold.metrics.fp;
        fn += fold.metrics.fn;
        tn += fold.metrics.tn;
    }
    CHECK(report.pooled.tp == tp);
    CHECK(report.pooled.fp == fp);
    CHECK(report.pooled.fn == fn);
    CHECK(report.pooled.tn == tn);

    // separable data classifies well
    CHECK(*report.pooled.confused.f1 > 0.8);
}

TEST_CASE("cross_validate refuses pre-balanced input") {
    FeatureMatrix matrix = small_matrix(20, 40, 5);
    matrix.rows[0].is_synthetic = true;
    CHECK_THROWS_AS(cross_validate(matrix, ModelParams{}, SmoteConfig{}, 4, 1),
                    InputError);
}

TEST_CASE("micro-pooled F1 equals F1 of the concatenated stream") {
    // metric algebra on random fold-shaped prediction streams
    Rng rng(808);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<BinaryLabel> all_pred, all_truth;
        std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
        const std::size_t folds = 2 + rng.next_index(8);
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<BinaryLabel> pred, truth;
            const std::size_t n = 2 + rng.next_index(30);
            bool saw_pos = false;
            for (std::size_t i = 0; i < n; ++i) {
                const bool t = rng.next_unit() < 0.4 || (!saw_pos && i == n - 1);
                saw_pos = saw_pos || t;
                truth.push_back(t ? BinaryLabel::Confused : BinaryLabel::NonConfused);
                pred.push_back(rng.next_unit() < 0.5 ? BinaryLabel::Confused
                                                     : BinaryLabel::NonConfused);
            }
            Metrics m = compute_metrics(pred, truth);
            tp += m.tp;
            fp += m.fp;
            fn += m.fn;
            tn += m.tn;
            all_pred.insert(all_pred.end(), pred.begin(), pred.end());
            all_truth.insert(all_truth.end(), truth.begin(), truth.end());
        }
        Metrics pooled = Metrics::from_counts(tp, fp, fn, tn);
        Metrics stream = compute_metrics(all_pred, all_truth);
        CHECK(pooled.tp == stream.tp);
        CHECK(pooled.fn == stream.fn);
        if (pooled.confused.f1 && stream.confused.f1) {
            CHECK(std::fabs(*pooled.confused.f1 - *stream.confused.f1) <= 1e-12);
        } else {
            CHECK(pooled.confused.f1.has_value() == stream.confused.f1.has_value());
        }
    }

    // and the cross_validate pooled block uses exactly the summed counts
    FeatureMatrix matrix = small_matrix(30, 60, 123, 1.0);
    ModelParams params;
    params.n_trees = 15;
    SmoteConfig smote_cfg;
    EvaluationReport report = cross_validate(matrix, params, smote_cfg, 5, 7);
    Metrics direct = Metrics::from_counts(report.pooled.tp, report.pooled.fp,
                                          report.pooled.fn, report.pooled.tn);
    REQUIRE(report.pooled.confused.f1.has_value());
    CHECK(*report.pooled.confused.f1 == doctest::Approx(*direct.confused.f1).epsilon(1e-13));
}

TEST_CASE("forcing p=0.5 everywhere yields recall 1.0 on the confused class") {
    // a one-leaf forest with counts 1/1 predicts exactly 0.5 for any input
    FeatureMatrix pair;
    pair.schema = FeatureSchema::from_names({"a", "b"});
    pair.rows.push_back(vec("x", {1.0, 1.0}, BinaryLabel::Confused));
    pair.rows.push_back(vec("y", {1.0, 1.0}, BinaryLabel::NonConfused));
    ModelParams params;
    params.n_trees = 1;
    for (std::uint64_t seed = 0;; ++seed) {
        REQUIRE(seed < 50);
        params.seed = seed;
        TrainedModel model = train(pair, params);
        const auto& forest = std::get<ForestState>(model.state);
        if (forest.trees[0].nodes.size() != 1 ||
            forest.trees[0].nodes[0].n_confused != 1) {
            continue;
        }
        FeatureMatrix test = small_matrix(10, 20, 77);
        std::vector<BinaryLabel> predictions, truth;
        for (const auto& row : test.rows) {
            predictions.push_back(model.predict(row.values).label);
            truth.push_back(*row.label);
        }
        Metrics m = compute_metrics(predictions, truth);
        CHECK(*m.confused.recall == doctest::Approx(1.0));
        break;
    }
}

TEST_CASE("cross_domain_evaluate") {
    FeatureMatrix domain_a = small_matrix(25, 75, 1000, 3.5);
    FeatureMatrix domain_b = small_matrix(25, 75, 2000, 3.5);
    ModelParams params;
    params.n_trees = 20;
    params.seed = 4;
    SmoteConfig smote_cfg;
    smote_cfg.seed = 4;

    SUBCASE("transfer between same-generator domains performs") {
        EvaluationReport r =
            cross_domain_evaluate(domain_a, domain_b, params, smote_cfg, false);
        CHECK(*r.pooled.confused.f1 > 0.75);
        CHECK(r.folds[0].n_synthetic_in_test == 0);
    }

    SUBCASE("train == test dominates CV pooled score") {
        EvaluationReport self =
            cross_domain_evaluate(domain_a, domain_a, params, smote_cfg, false);
        EvaluationReport cv = cross_validate(domain_a, params, smote_cfg, 5, 4);
        CHECK(*self.pooled.confused.f1 >= *cv.pooled.confused.f1 - 1e-12);
    }

    SUBCASE("disjoint schemas error") {
        FeatureMatrix other;
        other.schema = FeatureSchema::from_names({"p", "q"});
        other.rows.push_back(vec("z", {0.0, 0.0}, BinaryLabel::Confused));
        CHECK_THROWS_AS(cross_domain_evaluate(domain_a, other, params, smote_cfg, false),
                        InputError);
    }

    SUBCASE("incompatible features are dropped from the shared schema") {
        FeatureMatrix with_stem;
        with_stem.schema = FeatureSchema::from_names({"a", "question_stem_rate"});
        Rng rng(9);
        for (int i = 0; i < 30; ++i) {
            with_stem.rows.push_back(vec("c" + std::to_string(i),
                                         {rng.next_normal() + 2, rng.next_unit()},
                                         BinaryLabel::Confused));
            with_stem.rows.push_back(vec("n" + std::to_string(i),
                                         {rng.next_normal(), rng.next_unit()},
                                         BinaryLabel::NonConfused));
        }
        EvaluationReport r =
            cross_domain_evaluate(with_stem, with_stem, params, smote_cfg, true);
        CHECK(config_feature_names(r.config_json) == std::vector<std::string>{"a"});
    }
}

TEST_CASE("report emission round trip and determinism") {
    FeatureMatrix matrix = small_matrix(15, 45, 31);
    ModelParams params;
    params.n_trees = 8;
    SmoteConfig smote_cfg;
    EvaluationReport r1 = cross_validate(matrix, params, smote_cfg, 5, 11);
    EvaluationReport r2 = cross_validate(matrix, params, smote_cfg, 5, 11);

    // identical seeds: byte-identical apart from wall-time fields
    CHECK(r1.to_json(false) == r2.to_json(false));
    CHECK(r1.to_csv() == r2.to_csv());

    const std::string json_path = (testsupport::temp_dir() / "report.json").string();
    const std::string csv_path = (testsupport::temp_dir() / "report.csv").string();
    emit_report(r1, json_path, csv_path);

    // CSV: one row per fold plus the pooled row plus the header
    const std::string csv = testsupport::read_file(csv_path);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5 + 1 + 1);
    CHECK(csv.rfind("run_id,fold,class,precision,recall,f1,accuracy,tp,fp,fn,tn\n", 0) == 0);

    // JSON parses and mirrors the pooled counts
    const std::string json_text = testsupport::read_file(json_path);
    CHECK(json_text.find("\"pooled\"") != std::string::npos);
}
