#include "confusion/synthgen.hpp"

#include <algorithm>

#include "confusion/rng.hpp"

namespace confusion::synthgen {

namespace {

// Phrase pool per planted category. Every phrase appears in the shipped seed
// lexicons; the generator test enforces that.
struct PlantedCategory {
    const char* name;
    std::vector<const char*> phrases;
};

const std::vector<PlantedCategory>& planted() {
    static const std::vector<PlantedCategory> categories = {
        {"negations", {"do not", "don't", "couldn't", "not", "cannot"}},
        {"question_bigram",
         {"can someone", "what if", "any suggestion", "could anyone", "can anyone"}},
        {"first_person_singular", {"i", "me", "my", "i'm", "myself"}},
        {"confusion_expressions",
         {"don't understand", "confused", "puzzled", "stuck", "unclear"}},
        {"gratitude_politeness",
         {"please", "appreciate", "thank you", "would like", "grateful"}},
    };
    return categories;
}

} // namespace

const std::vector<std::string>& planted_categories() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const PlantedCategory& c : planted()) out.emplace_back(c.name);
        return out;
    }();
    return names;
}

const std::vector<std::string>& filler_vocabulary() {
    // Class-neutral words that hit no lexicon category.
    static const std::vector<std::string> words = {
        "week",  "section", "page",   "item",  "part",   "point", "note",
        "value", "level",   "group",  "detail", "case",  "table", "figure",
        "result", "data",   "term",   "area",  "chart",  "sample",
    };
    return words;
}

const std::vector<std::string>& topic_vocabulary(int variant) {
    static const std::vector<std::string> topic_a = {
        "matrix",     "algebra",    "equation", "proof",    "theorem",
        "integral",   "polynomial", "fraction", "gradient", "axiom",
    };
    static const std::vector<std::string> topic_b = {
        "anatomy", "clinical", "diagnosis", "symptom", "vaccine",
        "dosage",  "protein",  "neuron",    "therapy", "molecule",
    };
    return variant % 2 == 0 ? topic_a : topic_b;
}

Corpus generate(const GeneratorConfig& config) {
    Corpus corpus;
    corpus.domain = Domain{Domain::Kind::Other,
                           config.variant % 2 == 0 ? "synthA" : "synthB"};
    Rng rng(mix_seed(config.seed, 0x47454eull + static_cast<std::uint64_t>(config.variant)));

    const auto& filler = filler_vocabulary();
    const auto& topic = topic_vocabulary(config.variant);
    const std::size_t n_confused = static_cast<std::size_t>(
        std::llround(config.confused_fraction * static_cast<double>(config.n_posts)));

    for (std::size_t i = 0; i < config.n_posts; ++i) {
        const bool confused = i < n_confused;
        const double category_rate = confused
                                         ? config.base_category_rate * config.enrichment
                                         : config.base_category_rate;
        // Confused sentences start shorter; planted insertions roughly even
        // the lengths out so length alone cannot separate the classes.
        const std::size_t base_len_lo = confused ? 8 : 11;
        const std::size_t n_sentences = 3 + rng.next_index(3);

        std::string text;
        for (std::size_t s = 0; s < n_sentences; ++s) {
            std::vector<std::string> words;
            const std::size_t core = base_len_lo + rng.next_index(5);
            for (std::size_t w = 0; w < core; ++w) {
                if (rng.next_unit() < 0.3) {
                    words.push_back(topic[rng.next_index(topic.size())]);
                } else {
                    words.push_back(filler[rng.next_index(filler.size())]);
                }
            }
            for (const PlantedCategory& category : planted()) {
                if (rng.next_unit() >= category_rate) continue;
                const char* phrase =
                    category.phrases[rng.next_index(category.phrases.size())];
                words.insert(words.begin() + static_cast<std::ptrdiff_t>(
                                                 rng.next_index(words.size() + 1)),
                             phrase);
            }
            if (!text.empty()) text.push_back(' ');
            for (std::size_t w = 0; w < words.size(); ++w) {
                if (w > 0) text.push_back(' ');
                text += words[w];
            }
            const double qm_rate = confused ? 0.35 : 0.12;
            text.push_back(rng.next_unit() < qm_rate ? '?' : '.');
        }

        Post post;
        post.id = corpus.domain.name + "_" + std::to_string(i);
        post.text = std::move(text);
        post.confusion_score = confused ? 5 + static_cast<int>(rng.next_index(3))
                                        : 1 + static_cast<int>(rng.next_index(3));
        post.domain = corpus.domain;
        corpus.labels.push_back(confused ? BinaryLabel::Confused
                                         : BinaryLabel::NonConfused);
        corpus.posts.push_back(std::move(post));
    }
    return corpus;
}

} // namespace confusion::synthgen
