#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace confusion {

// Byte offsets into the original text, [begin,end).
struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Token indices, [begin,end).
struct TokenRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct TokenizedPost {
    std::vector<std::string> tokens;   // lowercase word tokens
    std::vector<TokenRange> sentences; // disjoint, ordered, cover all tokens
    std::size_t n_letters = 0;         // alphabetic code points over all tokens
    std::size_t question_marks = 0;    // raw '?' occurrences in the source text
};

struct DescriptiveFeatures {
    std::size_t n_words = 0;
    std::size_t n_sentences = 0;
    double words_per_sentence = 0.0;
    double letters_per_word = 0.0;
    std::optional<double> ttr; // absent for an empty token list
};

// Lowercased word tokens. Letters and digits form tokens, internal
// apostrophes are kept ("don't" stays one token), everything else separates.
std::vector<std::string> tokenize(std::string_view text);

// Sentences end at '.', '?', '!' or end of text; runs of terminators collapse
// into one boundary. Spans cover the non-terminator stretches.
std::vector<SentenceSpan> split_sentences(std::string_view text);

std::size_t count_question_marks(std::string_view text);

// Full per-post pass: sentence-aligned tokens plus letter and '?' counts.
TokenizedPost analyze(std::string_view text);

// Distinct tokens over total tokens. Throws InputError on an empty list.
double type_token_ratio(const std::vector<std::string>& tokens);

DescriptiveFeatures descriptive_features(const TokenizedPost& post);

} // namespace confusion
