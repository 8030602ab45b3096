#include "confusion/textproc.hpp"

#include <unordered_set>

#include "confusion/common.hpp"

namespace confusion {

namespace {

// Minimal UTF-8 decoder; malformed bytes decode as U+FFFD and separate tokens.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((b0 & 0xe0) == 0xc0) {
        extra = 1;
        cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
        extra = 2;
        cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xfffd;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
        ++i;
        return 0xfffd;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xc0) != 0x80) {
            ++i;
            return 0xfffd;
        }
        cp = (cp << 6) | (b & 0x3f);
    }
    i += static_cast<std::size_t>(extra) + 1;
    return cp;
}

bool is_letter(char32_t cp) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
    if (cp >= 0xc0 && cp <= 0xff && cp != 0xd7 && cp != 0xf7) return true; // Latin-1
    if (cp >= 0x100 && cp <= 0x24f) return true;                           // Latin extended
    if (cp >= 0x370 && cp <= 0x3ff && cp != 0x3a2) return true;            // Greek
    if (cp >= 0x400 && cp <= 0x4ff) return true;                           // Cyrillic
    return false;
}

bool is_digit(char32_t cp) {
    return cp >= '0' && cp <= '9';
}

bool is_apostrophe(char32_t cp) {
    return cp == '\'' || cp == 0x2019;
}

char32_t to_lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xc0 && cp <= 0xde && cp != 0xd7) return cp + 0x20;
    if (cp >= 0x391 && cp <= 0x3a9 && cp != 0x3a2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42f) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40f) return cp + 0x50;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

struct TokenAccumulator {
    std::vector<std::string> tokens;
    std::size_t letters = 0;

    std::string current;
    std::size_t current_letters = 0;
    bool has_word_char = false; // letters/digits seen, not just apostrophes
    std::size_t pending_apostrophes = 0;

    void word_char(char32_t cp) {
        // Apostrophes count only between word characters: "don't" keeps its
        // quote, "'hello'" loses both.
        for (; pending_apostrophes > 0; --pending_apostrophes) {
            if (has_word_char) current.push_back('\'');
        }
        pending_apostrophes = 0;
        if (is_letter(cp)) ++current_letters;
        append_utf8(current, to_lower_cp(cp));
        has_word_char = true;
    }

    void apostrophe() {
        if (has_word_char) ++pending_apostrophes;
    }

    void flush() {
        pending_apostrophes = 0;
        if (has_word_char) {
            tokens.push_back(std::move(current));
            letters += current_letters;
        }
        current.clear();
        current_letters = 0;
        has_word_char = false;
    }
};

TokenAccumulator tokenize_impl(std::string_view text) {
    TokenAccumulator acc;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t cp = decode_utf8(text, i);
        if (is_letter(cp) || is_digit(cp)) {
            acc.word_char(cp);
        } else if (is_apostrophe(cp)) {
            acc.apostrophe();
        } else {
            acc.flush();
        }
    }
    acc.flush();
    return acc;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    return tokenize_impl(text).tokens;
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
    std::vector<SentenceSpan> spans;
    std::size_t start = 0;
    std::size_t i = 0;
    auto close = [&](std::size_t end) {
        if (end > start) spans.push_back({start, end});
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '.' || c == '?' || c == '!') {
            close(i);
            ++i;
            while (i < text.size() &&
                   (text[i] == '.' || text[i] == '?' || text[i] == '!')) {
                ++i; // terminator runs collapse into one boundary
            }
            start = i;
        } else {
            ++i;
        }
    }
    close(text.size());
    return spans;
}

std::size_t count_question_marks(std::string_view text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '?') ++n;
    }
    return n;
}

TokenizedPost analyze(std::string_view text) {
    TokenizedPost post;
    post.question_marks = count_question_marks(text);
    for (const SentenceSpan& span : split_sentences(text)) {
        TokenAccumulator acc =
            tokenize_impl(text.substr(span.begin, span.end - span.begin));
        if (acc.tokens.empty()) continue; // whitespace or symbol-only stretch
        TokenRange range{post.tokens.size(), post.tokens.size() + acc.tokens.size()};
        for (std::string& t : acc.tokens) post.tokens.push_back(std::move(t));
        post.n_letters += acc.letters;
        post.sentences.push_back(range);
    }
    return post;
}

double type_token_ratio(const std::vector<std::string>& tokens) {
    if (tokens.empty()) {
        throw InputError("type_token_ratio: undefined for an empty token list");
    }
    std::unordered_set<std::string_view> types;
    types.reserve(tokens.size());
    for (const std::string& t : tokens) types.insert(t);
    return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
}

DescriptiveFeatures descriptive_features(const TokenizedPost& post) {
    DescriptiveFeatures f;
    f.n_words = post.tokens.size();
    f.n_sentences = post.sentences.size();
    if (f.n_words == 0) {
        return f; // all-zero record, ttr left unset
    }
    if (f.n_sentences > 0) {
        f.words_per_sentence =
            static_cast<double>(f.n_words) / static_cast<double>(f.n_sentences);
    }
    f.letters_per_word =
        static_cast<double>(post.n_letters) / static_cast<double>(f.n_words);
    f.ttr = type_token_ratio(post.tokens);
    return f;
}

} // namespace confusion
