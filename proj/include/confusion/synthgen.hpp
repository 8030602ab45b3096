#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "confusion/corpus.hpp"

namespace confusion::synthgen {

// Synthetic forum corpus with a planted linguistic signal: confused posts
// draw phrases from five lexicon categories at a multiple of the
// non-confused base rate, over class-neutral filler and per-variant topic
// vocabulary. Used by the test and calibration suites.
struct GeneratorConfig {
    std::size_t n_posts = 2000;
    double confused_fraction = 0.25;
    int variant = 0;                  // 0/1 pick disjoint topic vocabularies
    double base_category_rate = 0.2;  // per category, per sentence, non-confused
    double enrichment = 3.0;          // confused multiplier on the base rate
    std::uint64_t seed = 0;
};

const std::vector<std::string>& planted_categories();
const std::vector<std::string>& filler_vocabulary();
const std::vector<std::string>& topic_vocabulary(int variant);

Corpus generate(const GeneratorConfig& config);

} // namespace confusion::synthgen
