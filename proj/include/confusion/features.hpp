#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confusion/corpus.hpp"
#include "confusion/lexicon.hpp"
#include "confusion/textproc.hpp"

namespace confusion {

// Ordered feature names plus a hash that changes iff names or order change.
struct FeatureSchema {
    std::vector<std::string> names;
    std::uint64_t hash = 0;

    static FeatureSchema from_names(std::vector<std::string> names);

    // Descriptive block, then one "<category>_rate" per lexicon in name
    // order, then neutral_sentiment_rate.
    static FeatureSchema for_registry(const LexiconRegistry& registry);

    std::size_t size() const { return names.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::string hash_hex() const;
};

struct FeatureVector {
    std::string post_id;
    std::vector<double> values;
    std::optional<BinaryLabel> label;
    bool is_synthetic = false;
    bool degenerate = false; // empty post: all-zero values, TTR imputed
};

struct FeatureMatrix {
    FeatureSchema schema;
    std::vector<FeatureVector> rows;

    std::vector<double> column(std::size_t index) const;
    std::uint64_t fingerprint() const; // content hash for report provenance
};

// One post's vector under the schema: descriptive counts, raw '?' count,
// per-word category rates, neutral sentiment complement.
FeatureVector featurize(const Post& post, const TokenizedPost& tokenized,
                        const LexiconRegistry& registry, const FeatureSchema& schema);

// One vector per labelled post, order preserving; excluded posts skipped.
FeatureMatrix featurize_corpus(const Corpus& corpus, const LexiconRegistry& registry,
                               const FeatureSchema& schema);

// Raw per-category match counts; used for prediction explanations.
std::map<std::string, std::size_t> category_counts(const TokenizedPost& tokenized,
                                                   const LexiconRegistry& registry);

void write_feature_csv(const FeatureMatrix& matrix, const std::string& path);
FeatureMatrix read_feature_csv(const std::string& path);

// Column subset in the given order; names absent from the schema throw.
FeatureMatrix project(const FeatureMatrix& matrix, const std::vector<std::string>& names);

} // namespace confusion
