#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace confusion {

// Which class a category tends to mark. Metadata only; matching ignores it.
enum class PolarityHint { ConfusedIndicator, NonConfusedIndicator, Neutral };

// One named category of lowercase phrases, each 1-4 tokens.
class Lexicon {
public:
    Lexicon(std::string name, const std::vector<std::string>& phrases, PolarityHint hint);

    const std::string& name() const { return name_; }
    PolarityHint polarity_hint() const { return hint_; }
    std::size_t size() const { return phrases_.size(); }
    std::size_t max_tokens() const { return max_tokens_; }
    bool contains(std::string_view phrase) const;
    const std::unordered_set<std::string>& phrases() const { return phrases_; }

private:
    std::string name_;
    std::unordered_set<std::string> phrases_; // space-joined token runs
    std::size_t max_tokens_ = 1;
    PolarityHint hint_ = PolarityHint::Neutral;
};

// Greedy longest match, left to right, non-overlapping within this category.
// Tokens must already be lowercase.
std::size_t match_category(const std::vector<std::string>& tokens, const Lexicon& lexicon);

class LexiconRegistry {
public:
    // The categories every registry must provide, one file each.
    static const std::vector<std::string>& required_categories();

    // Reads <category>.txt per required category plus any extra .txt files.
    // One phrase per line, '#' starts a comment, blank lines ignored.
    // Throws InputError on a missing or empty category file.
    static LexiconRegistry load(const std::string& directory);

    static LexiconRegistry from_lexicons(std::vector<Lexicon> lexicons);

    const std::vector<Lexicon>& lexicons() const { return lexicons_; } // sorted by name
    const Lexicon& at(std::string_view name) const;
    bool has(std::string_view name) const;

private:
    LexiconRegistry() = default;
    std::vector<Lexicon> lexicons_;
};

} // namespace confusion
