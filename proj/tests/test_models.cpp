#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "confusion/common.hpp"
#include "confusion/models.hpp"
#include "confusion/parallel.hpp"
#include "confusion/rng.hpp"
#include "support.hpp"

using namespace confusion;

namespace {

FeatureVector vec(const std::string& id, std::vector<double> values,
                  std::optional<BinaryLabel> label) {
    FeatureVector v;
    v.post_id = id;
    v.values = std::move(values);
    v.label = label;
    return v;
}

// 20 points, two far-apart clusters: linearly separable with a wide margin.
FeatureMatrix separable_toy() {
    FeatureMatrix m;
    m.schema = FeatureSchema::from_names({"x1", "x2"});
    Rng rng(404);
    for (int i = 0; i < 10; ++i) {
        m.rows.push_back(vec("c" + std::to_string(i),
                             {3.0 + 0.3 * rng.next_unit(), 3.0 + 0.3 * rng.next_unit()},
                             BinaryLabel::Confused));
        m.rows.push_back(vec("n" + std::to_string(i),
                             {-3.0 - 0.3 * rng.next_unit(), -3.0 - 0.3 * rng.next_unit()},
                             BinaryLabel::NonConfused));
    }
    return m;
}

double training_accuracy(const TrainedModel& model, const FeatureMatrix& m) {
    std::size_t correct = 0, total = 0;
    for (const auto& row : m.rows) {
        if (!row.label) continue;
        ++total;
        if (model.predict(row.values).label == *row.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

} // namespace

TEST_CASE("all three classifiers memorize the separable toy set") {
    FeatureMatrix toy = separable_toy();
    for (ModelKind kind :
         {ModelKind::RandomForest, ModelKind::GaussianNB, ModelKind::LogisticRegression}) {
        ModelParams params;
        params.kind = kind;
        params.seed = 17;
        TrainedModel model = train(toy, params);
        CHECK(training_accuracy(model, toy) == doctest::Approx(1.0));
    }
}

TEST_CASE("single unlimited tree shatters consistent data") {
    FeatureMatrix toy = separable_toy();
    ModelParams params;
    params.kind = ModelKind::RandomForest;
    params.n_trees = 1;
    params.seed = 9;
    TrainedModel model = train(toy, params);
    CHECK(training_accuracy(model, toy) == doctest::Approx(1.0));
}

TEST_CASE("train preconditions") {
    FeatureMatrix empty;
    empty.schema = FeatureSchema::from_names({"x"});
    CHECK_THROWS_AS(train(empty, ModelParams{}), InputError);

    FeatureMatrix one_class;
    one_class.schema = FeatureSchema::from_names({"x"});
    for (int i = 0; i < 5; ++i) {
        one_class.rows.push_back(vec("p", {double(i)}, BinaryLabel::Confused));
    }
    CHECK_THROWS_AS(train(one_class, ModelParams{}), InputError);
}

TEST_CASE("gaussian naive bayes puts the boundary near zero for symmetric classes") {
    FeatureMatrix m;
    m.schema = FeatureSchema::from_names({"x"});
    auto draws = testsupport::normal_draws(500, 2024);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const bool confused = i % 2 == 0;
        m.rows.push_back(vec("p" + std::to_string(i),
                             {draws[i] + (confused ? 1.0 : -1.0)},
                             confused ? BinaryLabel::Confused : BinaryLabel::NonConfused));
    }
    ModelParams params;
    params.kind = ModelKind::GaussianNB;
    TrainedModel model = train(m, params);

    // bisect the decision boundary
    double lo = -3, hi = 3;
    REQUIRE(model.predict(std::vector<double>{lo}).label == BinaryLabel::NonConfused);
    REQUIRE(model.predict(std::vector<double>{hi}).label == BinaryLabel::Confused);
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (model.predict(std::vector<double>{mid}).label == BinaryLabel::Confused) hi = mid;
        else lo = mid;
    }
    CHECK(std::fabs(0.5 * (lo + hi)) < 0.2);
}

TEST_CASE("gaussian naive bayes is invariant to positive feature scaling") {
    FeatureMatrix m = separable_toy();
    ModelParams params;
    params.kind = ModelKind::GaussianNB;
    TrainedModel base = train(m, params);

    FeatureMatrix scaled = m;
    for (auto& row : scaled.rows) row.values[0] *= 37.5;
    TrainedModel scaled_model = train(scaled, params);

    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x = {6 * rng.next_unit() - 3, 6 * rng.next_unit() - 3};
        std::vector<double> xs = {x[0] * 37.5, x[1]};
        CHECK(base.predict(x).label == scaled_model.predict(xs).label);
    }
}

TEST_CASE("tie at exactly 0.5 resolves to Confused") {
    // two identical rows with opposite labels: the tree cannot split, the
    // root leaf holds counts 1/1, so every prediction is exactly 0.5
    FeatureMatrix m;
    m.schema = FeatureSchema::from_names({"x"});
    m.rows.push_back(vec("a", {1.0}, BinaryLabel::Confused));
    m.rows.push_back(vec("b", {1.0}, BinaryLabel::NonConfused));
    ModelParams params;
    params.kind = ModelKind::RandomForest;
    params.n_trees = 1;
    params.seed = 1; // bootstrap of 2 rows; try seeds until both rows drawn
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        params.seed = seed;
        TrainedModel model = train(m, params);
        const auto* forest = std::get_if<ForestState>(&model.state);
        REQUIRE(forest != nullptr);
        if (forest->trees[0].nodes.size() == 1 &&
            forest->trees[0].nodes[0].n_confused == 1 &&
            forest->trees[0].nodes[0].n_total == 2) {
            Prediction pred = model.predict(std::vector<double>{1.0});
            CHECK(pred.p_confused == doctest::Approx(0.5));
            CHECK(pred.label == BinaryLabel::Confused);
            return;
        }
    }
    FAIL("no bootstrap draw contained both rows in 50 seeds");
}

TEST_CASE("degenerate all-zero vector gets a defined prediction") {
    FeatureMatrix toy = separable_toy();
    for (ModelKind kind :
         {ModelKind::RandomForest, ModelKind::GaussianNB, ModelKind::LogisticRegression}) {
        ModelParams params;
        params.kind = kind;
        TrainedModel model = train(toy, params);
        Prediction pred = model.predict(std::vector<double>{0.0, 0.0});
        CHECK(pred.p_confused >= 0.0);
        CHECK(pred.p_confused <= 1.0);
    }
}

TEST_CASE("logistic regression gradient matches central differences") {
    Rng rng(606);
    std::vector<double> scratch_g;
    double scratch_b;
    auto loss_only = [&](const std::vector<std::vector<double>>& x,
                         const std::vector<int>& y, const std::vector<double>& w,
                         double b, double l2) {
        return detail::logistic_objective(x, y, w, b, l2, scratch_g, scratch_b);
    };

    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 12 + rng.next_index(20);
        const std::size_t d = 1 + rng.next_index(4);
        std::vector<std::vector<double>> x(n, std::vector<double>(d));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < d; ++f) x[i][f] = rng.next_normal();
            y[i] = rng.next_unit() < 0.5 ? 1 : 0;
        }
        // random probe point, away from the optimum
        std::vector<double> w(d);
        for (double& wf : w) wf = 2.0 * rng.next_normal();
        const double bias = rng.next_normal();
        const double l2 = 1e-4;

        std::vector<double> grad_w;
        double grad_b = 0;
        detail::logistic_objective(x, y, w, bias, l2, grad_w, grad_b);

        const double h = 1e-5;
        for (std::size_t f = 0; f < d; ++f) {
            std::vector<double> wp = w, wm = w;
            wp[f] += h;
            wm[f] -= h;
            const double numeric =
                (loss_only(x, y, wp, bias, l2) - loss_only(x, y, wm, bias, l2)) / (2 * h);
            const double denom = std::max(1e-6, std::fabs(numeric) + std::fabs(grad_w[f]));
            CHECK(std::fabs(numeric - grad_w[f]) / denom < 1e-6);
        }
        const double numeric_b =
            (loss_only(x, y, w, bias + h, l2) - loss_only(x, y, w, bias - h, l2)) / (2 * h);
        const double denom_b = std::max(1e-6, std::fabs(numeric_b) + std::fabs(grad_b));
        CHECK(std::fabs(numeric_b - grad_b) / denom_b < 1e-6);
    }
}

TEST_CASE("random forest determinism across runs and thread counts") {
    FeatureMatrix toy = separable_toy();
    ModelParams params;
    params.kind = ModelKind::RandomForest;
    params.n_trees = 25;
    params.seed = 555;

    set_max_threads(1);
    TrainedModel serial = train(toy, params);
    set_max_threads(4);
    TrainedModel parallel = train(toy, params);
    set_max_threads(0);

    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x = {8 * rng.next_unit() - 4, 8 * rng.next_unit() - 4};
        const double pa = serial.p_confused(x);
        const double pb = parallel.p_confused(x);
        CHECK(std::memcmp(&pa, &pb, sizeof(double)) == 0); // bit-identical
    }
}

TEST_CASE("forest probabilities are leaf-count rationals in [0,1]") {
    FeatureMatrix toy = separable_toy();
    ModelParams params;
    params.n_trees = 10;
    params.seed = 2;
    TrainedModel model = train(toy, params);
    Rng rng(12);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x = {10 * rng.next_unit() - 5, 10 * rng.next_unit() - 5};
        const double p = model.p_confused(x);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("ensemble accuracy does not collapse relative to one tree") {
    // statistical guard over 20 seeded trials on a noisy but learnable set
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(7000 + seed);
        FeatureMatrix m;
        m.schema = FeatureSchema::from_names({"a", "b", "c"});
        for (int i = 0; i < 120; ++i) {
            const bool confused = i % 2 == 0;
            std::vector<double> x = {rng.next_normal() + (confused ? 1.2 : 0.0),
                                     rng.next_normal(), rng.next_normal()};
            m.rows.push_back(vec("p" + std::to_string(i), x,
                                 confused ? BinaryLabel::Confused
                                          : BinaryLabel::NonConfused));
        }
        ModelParams one;
        one.n_trees = 1;
        one.seed = seed;
        ModelParams hundred;
        hundred.n_trees = 100;
        hundred.seed = seed;
        const double acc1 = training_accuracy(train(m, one), m);
        const double acc100 = training_accuracy(train(m, hundred), m);
        if (acc100 >= acc1 - 0.05) ++ok;
    }
    CHECK(ok == 20);
}

TEST_CASE("model save/load round trip is bit-identical") {
    FeatureMatrix toy = separable_toy();
    for (ModelKind kind :
         {ModelKind::RandomForest, ModelKind::GaussianNB, ModelKind::LogisticRegression}) {
        ModelParams params;
        params.kind = kind;
        params.n_trees = 12;
        params.seed = 31;
        TrainedModel model = train(toy, params);

        const std::string path =
            (testsupport::temp_dir() / ("model_" + std::string(to_string(kind)) + ".json"))
                .string();
        save_model(model, path);
        TrainedModel loaded = load_model(path);
        CHECK(loaded.schema_hash == model.schema_hash);
        CHECK(loaded.feature_names == model.feature_names);

        Rng rng(63);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> x = {8 * rng.next_unit() - 4, 8 * rng.next_unit() - 4};
            const double pa = model.p_confused(x);
            const double pb = loaded.p_confused(x);
            CHECK(std::memcmp(&pa, &pb, sizeof(double)) == 0);
            CHECK(model.predict(x).label == loaded.predict(x).label);
        }
    }
}

TEST_CASE("model file integrity guards") {
    FeatureMatrix toy = separable_toy();
    ModelParams params;
    params.n_trees = 3;
    TrainedModel model = train(toy, params);
    const std::string path = (testsupport::temp_dir() / "guard.json").string();
    save_model(model, path);

    SUBCASE("corrupted state fails the checksum") {
        std::string text = testsupport::read_file(path);
        const auto pos = text.find("\"threshold\":[");
        REQUIRE(pos != std::string::npos);
        // nudge the first threshold digit
        for (std::size_t i = pos; i < text.size(); ++i) {
            if (std::isdigit(static_cast<unsigned char>(text[i]))) {
                text[i] = text[i] == '9' ? '8' : static_cast<char>(text[i] + 1);
                break;
            }
        }
        const std::string bad = testsupport::write_file("corrupt.json", text);
        CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("checksum"), InputError);
    }

    SUBCASE("future format version is rejected") {
        std::string text = testsupport::read_file(path);
        const auto pos = text.find("\"format_version\":1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, std::strlen("\"format_version\":1"), "\"format_version\":2");
        const std::string bad = testsupport::write_file("version.json", text);
        CHECK_THROWS_WITH_AS(load_model(bad), doctest::Contains("version"), InputError);
    }

    SUBCASE("schema mismatch at prediction time") {
        FeatureMatrix other;
        other.schema = FeatureSchema::from_names({"something", "else"});
        other.rows.push_back(vec("q", {1.0, 2.0}, BinaryLabel::Confused));
        CHECK_THROWS_WITH_AS(predict_matrix(model, other), doctest::Contains("schema"),
                             InputError);
    }

    SUBCASE("not json at all") {
        const std::string bad = testsupport::write_file("garbage.json", "not json {{{");
        CHECK_THROWS_AS(load_model(bad), InputError);
    }
}

TEST_CASE("degenerate rows are counted in training metadata") {
    FeatureMatrix m = separable_toy();
    FeatureVector degenerate = vec("z", {0.0, 0.0}, BinaryLabel::Confused);
    degenerate.degenerate = true;
    m.rows.push_back(degenerate);
    ModelParams params;
    params.n_trees = 5;
    TrainedModel model = train(m, params);
    CHECK(model.meta.n_degenerate_imputed == 1);
    CHECK(model.meta.n_train == 21);
}
