#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confusion/textproc.hpp"

namespace confusion {

enum class BinaryLabel { Confused, NonConfused };

const char* to_string(BinaryLabel label);
std::optional<BinaryLabel> parse_label(std::string_view s);

// How score-4 posts are handled. IncludeAsConfused is the default.
enum class NeutralPolicy { IncludeAsConfused, Exclude };

struct Domain {
    enum class Kind { Education, Humanities, Medicine, Other };
    Kind kind = Kind::Other;
    std::string name; // original spelling for Other, canonical otherwise

    static Domain parse(std::string_view s);
    std::string str() const;
    bool operator==(const Domain&) const = default;
};

struct Post {
    std::string id;
    std::string text; // verbatim; normalization is the tokenizer's job
    int confusion_score = 0;
    Domain domain;
};

// score > 4 -> Confused, score < 4 -> NonConfused, score == 4 by policy.
// Throws InputError outside [1,7].
std::optional<BinaryLabel> binarize(int score, NeutralPolicy policy);

struct Corpus {
    std::vector<Post> posts;
    std::vector<std::optional<BinaryLabel>> labels; // parallel; nullopt = excluded
    Domain domain;                                  // Other("mixed") when not uniform

    std::size_t count(BinaryLabel label) const;
    std::size_t count_excluded() const;
};

// Maps logical fields to physical columns of the input file.
struct Manifest {
    std::string text_col = "Text";
    std::string score_col = "Confusion";
    std::string domain_col = "Domain"; // consulted when domain_value is empty
    std::string domain_value;          // fixed domain applied to every row
    std::string id_col = "Id";         // optional; row numbers when absent
    char delimiter = ',';

    // key=value file with keys text_col, score_col, domain, domain_col,
    // id_col, delimiter (comma|tab). Unknown keys are rejected.
    static Manifest load(const std::string& path);
};

struct IngestSummary {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t skipped_empty_text = 0;
    std::size_t skipped_bad_score = 0;
    std::size_t skipped_bad_row = 0;
    std::string to_json() const;
};

struct LoadResult {
    Corpus corpus;
    IngestSummary summary;
};

// Streams the file once, keeps one Post per valid row, counts skips.
// Throws InputError on unreadable files, missing mapped columns and
// zero valid rows.
LoadResult load_corpus(const std::string& path, const Manifest& manifest,
                       NeutralPolicy policy = NeutralPolicy::IncludeAsConfused);

// Normalized corpus cache (Id,Text,Confusion,Domain), loadable with the
// default manifest.
void write_corpus_csv(const Corpus& corpus, const std::string& path);

// Prediction inputs carry no ground truth: the score column is optional and
// ignored when absent, empty-text rows are skipped.
std::vector<Post> load_posts_for_prediction(const std::string& path,
                                            const Manifest& manifest);

struct DescriptiveStats {
    std::size_t n_posts = 0;
    double mean_sentences_per_post = 0, sd_sentences_per_post = 0;
    double mean_words_per_post = 0, sd_words_per_post = 0;
    double mean_words_per_sentence = 0, sd_words_per_sentence = 0;
    double mean_letters_per_word = 0, sd_letters_per_word = 0;
};

// Per-class means and sample SDs of the four descriptive measures.
// features runs parallel to corpus.posts; classes with no posts are absent.
std::map<BinaryLabel, DescriptiveStats>
corpus_stats(const Corpus& corpus, const std::vector<DescriptiveFeatures>& features);

} // namespace confusion
