#include <doctest.h>

#include <algorithm>

#include "confusion/features.hpp"
#include "confusion/lexicon.hpp"
#include "confusion/synthgen.hpp"
#include "confusion/textproc.hpp"

using namespace confusion;

namespace {

const LexiconRegistry& seed_registry() {
    static const LexiconRegistry registry = LexiconRegistry::load(CONFUSION_LEXICON_DIR);
    return registry;
}

} // namespace

TEST_CASE("generator vocabulary is class-neutral") {
    const LexiconRegistry& registry = seed_registry();
    std::vector<std::string> neutral = synthgen::filler_vocabulary();
    for (int variant : {0, 1}) {
        const auto& topic = synthgen::topic_vocabulary(variant);
        neutral.insert(neutral.end(), topic.begin(), topic.end());
    }
    // join everything into one stream: no category may fire at all
    for (const Lexicon& lex : registry.lexicons()) {
        CHECK(match_category(neutral, lex) == 0);
    }
}

TEST_CASE("planted phrases resolve to real lexicon entries") {
    const LexiconRegistry& registry = seed_registry();
    for (const std::string& name : synthgen::planted_categories()) {
        CHECK(registry.has(name));
    }
}

TEST_CASE("planted categories are enriched roughly threefold") {
    synthgen::GeneratorConfig config;
    config.n_posts = 1500;
    config.seed = 12;
    Corpus corpus = synthgen::generate(config);
    REQUIRE(corpus.posts.size() == 1500);

    const LexiconRegistry& registry = seed_registry();
    FeatureSchema schema = FeatureSchema::for_registry(registry);
    FeatureMatrix matrix = featurize_corpus(corpus, registry, schema);

    for (const std::string& category : synthgen::planted_categories()) {
        const std::size_t idx = *schema.index_of(category + "_rate");
        double mean_confused = 0, mean_nonconfused = 0;
        std::size_t nc = 0, nn = 0;
        for (const FeatureVector& row : matrix.rows) {
            if (*row.label == BinaryLabel::Confused) {
                mean_confused += row.values[idx];
                ++nc;
            } else {
                mean_nonconfused += row.values[idx];
                ++nn;
            }
        }
        mean_confused /= static_cast<double>(nc);
        mean_nonconfused /= static_cast<double>(nn);
        const double ratio = mean_confused / mean_nonconfused;
        CHECK(ratio > 2.0);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("a single decision stump already separates the classes decently") {
    synthgen::GeneratorConfig config;
    config.n_posts = 1000;
    config.seed = 3;
    Corpus corpus = synthgen::generate(config);
    const LexiconRegistry& registry = seed_registry();
    FeatureMatrix matrix =
        featurize_corpus(corpus, registry, FeatureSchema::for_registry(registry));

    // best single-feature threshold on the first planted category
    const std::size_t idx = *matrix.schema.index_of("negations_rate");
    std::vector<std::pair<double, int>> points;
    for (const FeatureVector& row : matrix.rows) {
        points.emplace_back(row.values[idx],
                            *row.label == BinaryLabel::Confused ? 1 : 0);
    }
    std::sort(points.begin(), points.end());
    std::size_t total_confused = 0;
    for (const auto& [v, y] : points) total_confused += y;

    double best_acc = 0;
    std::size_t left_confused = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        left_confused += points[i].second;
        if (points[i].first == points[i + 1].first) continue;
        // left -> NonConfused, right -> Confused
        const std::size_t correct = (i + 1 - left_confused) +
                                    (total_confused - left_confused);
        best_acc = std::max(best_acc,
                            static_cast<double>(correct) /
                                static_cast<double>(points.size()));
    }
    CHECK(best_acc >= 0.75);
}

TEST_CASE("variants share the signal but differ in topics") {
    synthgen::GeneratorConfig a;
    a.n_posts = 50;
    a.variant = 0;
    a.seed = 5;
    synthgen::GeneratorConfig b = a;
    b.variant = 1;
    Corpus ca = synthgen::generate(a);
    Corpus cb = synthgen::generate(b);
    CHECK(ca.domain.name != cb.domain.name);

    // topic words of the other variant never appear
    for (const Post& post : ca.posts) {
        for (const std::string& w : synthgen::topic_vocabulary(1)) {
            CHECK(post.text.find(" " + w + " ") == std::string::npos);
        }
    }
}

TEST_CASE("generation is deterministic per seed") {
    synthgen::GeneratorConfig config;
    config.n_posts = 30;
    config.seed = 77;
    Corpus a = synthgen::generate(config);
    Corpus b = synthgen::generate(config);
    REQUIRE(a.posts.size() == b.posts.size());
    for (std::size_t i = 0; i < a.posts.size(); ++i) {
        CHECK(a.posts[i].text == b.posts[i].text);
    }
}
