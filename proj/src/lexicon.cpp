#include "confusion/lexicon.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "confusion/common.hpp"

namespace confusion {

namespace {

// Polarity metadata per category, following the summary-of-findings split.
const std::map<std::string, PolarityHint>& polarity_table() {
    static const std::map<std::string, PolarityHint> table = {
        {"negations", PolarityHint::ConfusedIndicator},
        {"question_stem", PolarityHint::ConfusedIndicator},
        {"question_bigram", PolarityHint::ConfusedIndicator},
        {"confusion_expressions", PolarityHint::ConfusedIndicator},
        {"incompleteness", PolarityHint::ConfusedIndicator},
        {"error_words", PolarityHint::ConfusedIndicator},
        {"problem_solving", PolarityHint::ConfusedIndicator},
        {"pedagogical", PolarityHint::ConfusedIndicator},
        {"gratitude_politeness", PolarityHint::ConfusedIndicator},
        {"first_person_singular", PolarityHint::ConfusedIndicator},
        {"all_pronouns", PolarityHint::ConfusedIndicator},
        {"negative_sentiment", PolarityHint::ConfusedIndicator},
        {"negative_emotion", PolarityHint::ConfusedIndicator},
        {"second_person_pronouns", PolarityHint::NonConfusedIndicator},
        {"third_person_pronouns", PolarityHint::NonConfusedIndicator},
        {"demonstrative_determiners", PolarityHint::NonConfusedIndicator},
        {"opinion", PolarityHint::NonConfusedIndicator},
        {"future_words", PolarityHint::NonConfusedIndicator},
        {"positive_sentiment", PolarityHint::NonConfusedIndicator},
        {"positive_emotion", PolarityHint::NonConfusedIndicator},
        {"arousal", PolarityHint::NonConfusedIndicator},
    };
    return table;
}

// Collapses inner whitespace, lowercases, and validates the 1-4 token shape.
std::string normalize_phrase(const std::string& raw, const std::string& category) {
    std::istringstream in(lower_ascii(trim(raw)));
    std::string token;
    std::string out;
    std::size_t n_tokens = 0;
    while (in >> token) {
        for (char c : token) {
            if (c == '.' || c == '?' || c == '!') {
                throw InputError("lexicon " + category + ": entry '" + raw +
                                 "' contains a sentence terminator");
            }
        }
        if (!out.empty()) out.push_back(' ');
        out += token;
        ++n_tokens;
    }
    if (n_tokens == 0 || n_tokens > 4) {
        throw InputError("lexicon " + category + ": entry '" + raw +
                         "' must have 1-4 tokens");
    }
    return out;
}

} // namespace

Lexicon::Lexicon(std::string name, const std::vector<std::string>& phrases,
                 PolarityHint hint)
    : name_(std::move(name)), hint_(hint) {
    for (const std::string& raw : phrases) {
        std::string phrase = normalize_phrase(raw, name_);
        std::size_t tokens = 1 + static_cast<std::size_t>(
                                     std::count(phrase.begin(), phrase.end(), ' '));
        max_tokens_ = std::max(max_tokens_, tokens);
        phrases_.insert(std::move(phrase));
    }
    if (phrases_.empty()) {
        throw InputError("lexicon " + name_ + ": no entries");
    }
}

bool Lexicon::contains(std::string_view phrase) const {
    return phrases_.count(std::string(phrase)) > 0;
}

std::size_t match_category(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
    std::size_t count = 0;
    std::size_t i = 0;
    std::string candidate;
    while (i < tokens.size()) {
        const std::size_t longest =
            std::min(lexicon.max_tokens(), tokens.size() - i);
        std::size_t matched = 0;
        for (std::size_t len = longest; len >= 1; --len) {
            candidate.clear();
            for (std::size_t j = 0; j < len; ++j) {
                if (j > 0) candidate.push_back(' ');
                candidate += tokens[i + j];
            }
            if (lexicon.contains(candidate)) {
                matched = len;
                break;
            }
        }
        if (matched > 0) {
            ++count;
            i += matched;
        } else {
            ++i;
        }
    }
    return count;
}

const std::vector<std::string>& LexiconRegistry::required_categories() {
    static const std::vector<std::string> categories = {
        "all_pronouns",
        "arousal",
        "confusion_expressions",
        "demonstrative_determiners",
        "error_words",
        "first_person_singular",
        "future_words",
        "gratitude_politeness",
        "incompleteness",
        "negations",
        "negative_emotion",
        "negative_sentiment",
        "opinion",
        "pedagogical",
        "positive_emotion",
        "positive_sentiment",
        "problem_solving",
        "question_bigram",
        "question_stem",
        "second_person_pronouns",
        "third_person_pronouns",
    };
    return categories;
}

LexiconRegistry LexiconRegistry::load(const std::string& directory) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(directory)) {
        throw InputError("lexicon directory not found: " + directory);
    }

    auto read_phrases = [](const fs::path& file) {
        std::ifstream in(file);
        if (!in) {
            throw InputError("cannot open lexicon file: " + file.string());
        }
        std::vector<std::string> phrases;
        std::string line;
        while (std::getline(in, line)) {
            std::string s = trim(line);
            if (s.empty() || s[0] == '#') continue;
            phrases.push_back(s);
        }
        return phrases;
    };

    std::vector<Lexicon> lexicons;
    std::vector<std::string> seen;
    for (const std::string& category : required_categories()) {
        fs::path file = fs::path(directory) / (category + ".txt");
        if (!fs::exists(file)) {
            throw InputError("missing lexicon category file: " + file.string());
        }
        std::vector<std::string> phrases = read_phrases(file);
        if (phrases.empty()) {
            throw InputError("empty lexicon category file: " + file.string());
        }
        PolarityHint hint = PolarityHint::Neutral;
        auto it = polarity_table().find(category);
        if (it != polarity_table().end()) hint = it->second;
        lexicons.emplace_back(category, phrases, hint);
        seen.push_back(category);
    }

    // Extra .txt files become user-defined categories.
    std::vector<fs::path> extras;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string name = entry.path().stem().string();
        if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
        extras.push_back(entry.path());
    }
    std::sort(extras.begin(), extras.end());
    for (const fs::path& file : extras) {
        std::vector<std::string> phrases = read_phrases(file);
        if (phrases.empty()) {
            throw InputError("empty lexicon category file: " + file.string());
        }
        lexicons.emplace_back(file.stem().string(), phrases, PolarityHint::Neutral);
    }

    return from_lexicons(std::move(lexicons));
}

LexiconRegistry LexiconRegistry::from_lexicons(std::vector<Lexicon> lexicons) {
    LexiconRegistry registry;
    std::sort(lexicons.begin(), lexicons.end(),
              [](const Lexicon& a, const Lexicon& b) { return a.name() < b.name(); });
    for (std::size_t i = 1; i < lexicons.size(); ++i) {
        if (lexicons[i].name() == lexicons[i - 1].name()) {
            throw InputError("duplicate lexicon category: " + lexicons[i].name());
        }
    }
    registry.lexicons_ = std::move(lexicons);
    return registry;
}

const Lexicon& LexiconRegistry::at(std::string_view name) const {
    for (const Lexicon& lex : lexicons_) {
        if (lex.name() == name) return lex;
    }
    throw std::out_of_range("no lexicon category named '" + std::string(name) + "'");
}

bool LexiconRegistry::has(std::string_view name) const {
    for (const Lexicon& lex : lexicons_) {
        if (lex.name() == name) return true;
    }
    return false;
}

} // namespace confusion
