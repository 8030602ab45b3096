#include "confusion/features.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

#include "confusion/common.hpp"
#include "confusion/csv.hpp"
#include "confusion/parallel.hpp"

namespace confusion {

namespace {

const char* kDescriptive[] = {"n_words",           "n_sentences",
                              "words_per_sentence", "letters_per_word",
                              "ttr",                "question_mark_count"};

std::uint64_t hash_names(const std::vector<std::string>& names) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const std::string& name : names) {
        h = fnv1a64(name, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

} // namespace

FeatureSchema FeatureSchema::from_names(std::vector<std::string> names) {
    FeatureSchema schema;
    schema.names = std::move(names);
    schema.hash = hash_names(schema.names);
    return schema;
}

FeatureSchema FeatureSchema::for_registry(const LexiconRegistry& registry) {
    std::vector<std::string> names;
    for (const char* d : kDescriptive) names.emplace_back(d);
    for (const Lexicon& lex : registry.lexicons()) {
        names.push_back(lex.name() + "_rate");
    }
    names.emplace_back("neutral_sentiment_rate");
    return from_names(std::move(names));
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    return std::nullopt;
}

std::string FeatureSchema::hash_hex() const {
    return to_hex(hash);
}

std::vector<double> FeatureMatrix::column(std::size_t index) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const FeatureVector& row : rows) out.push_back(row.values.at(index));
    return out;
}

std::uint64_t FeatureMatrix::fingerprint() const {
    std::uint64_t h = schema.hash;
    for (const FeatureVector& row : rows) {
        h = fnv1a64(row.post_id, h);
        for (double v : row.values) {
            h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof(v)), h);
        }
        h = fnv1a64(row.label ? to_string(*row.label) : "-", h);
        h = fnv1a64(row.is_synthetic ? "s" : "r", h);
    }
    return h;
}

FeatureVector featurize(const Post& post, const TokenizedPost& tokenized,
                        const LexiconRegistry& registry, const FeatureSchema& schema) {
    if (schema.hash != FeatureSchema::for_registry(registry).hash) {
        throw std::invalid_argument(
            "featurize: schema was not derived from this registry");
    }
    FeatureVector vec;
    vec.post_id = post.id;
    vec.values.assign(schema.size(), 0.0);

    const std::size_t n_words = tokenized.tokens.size();
    if (n_words == 0) {
        vec.degenerate = true; // all-zero vector, TTR imputed to 0
        return vec;
    }

    DescriptiveFeatures d = descriptive_features(tokenized);
    std::size_t slot = 0;
    vec.values[slot++] = static_cast<double>(d.n_words);
    vec.values[slot++] = static_cast<double>(d.n_sentences);
    vec.values[slot++] = d.words_per_sentence;
    vec.values[slot++] = d.letters_per_word;
    vec.values[slot++] = d.ttr.value_or(0.0);
    vec.values[slot++] = static_cast<double>(tokenized.question_marks);

    double positive_rate = 0;
    double negative_rate = 0;
    for (const Lexicon& lex : registry.lexicons()) {
        const double rate =
            static_cast<double>(match_category(tokenized.tokens, lex)) /
            static_cast<double>(n_words);
        vec.values[slot++] = rate;
        if (lex.name() == "positive_sentiment") positive_rate = rate;
        if (lex.name() == "negative_sentiment") negative_rate = rate;
    }
    vec.values[slot++] = std::max(0.0, 1.0 - positive_rate - negative_rate);
    return vec;
}

FeatureMatrix featurize_corpus(const Corpus& corpus, const LexiconRegistry& registry,
                               const FeatureSchema& schema) {
    FeatureMatrix matrix;
    matrix.schema = schema;

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
        if (corpus.labels[i]) kept.push_back(i);
    }
    matrix.rows.resize(kept.size());
    std::string first_error;
    std::mutex error_mutex;
    parallel_for(kept.size(), [&](std::size_t j) {
        const std::size_t i = kept[j];
        try {
            TokenizedPost tokenized = analyze(corpus.posts[i].text);
            matrix.rows[j] = featurize(corpus.posts[i], tokenized, registry, schema);
            matrix.rows[j].label = corpus.labels[i];
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty()) {
                first_error = "post " + corpus.posts[i].id + ": " + e.what();
            }
        }
    });
    if (!first_error.empty()) {
        throw std::runtime_error("featurize_corpus: " + first_error);
    }
    return matrix;
}

std::map<std::string, std::size_t> category_counts(const TokenizedPost& tokenized,
                                                   const LexiconRegistry& registry) {
    std::map<std::string, std::size_t> counts;
    for (const Lexicon& lex : registry.lexicons()) {
        counts[lex.name()] = match_category(tokenized.tokens, lex);
    }
    return counts;
}

void write_feature_csv(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write feature file: " + path);
    }
    out << "post_id,label,is_synthetic";
    for (const std::string& name : matrix.schema.names) {
        out << ',' << csv_escape(name, ',');
    }
    out << '\n';
    for (const FeatureVector& row : matrix.rows) {
        out << csv_escape(row.post_id, ',') << ','
            << (row.label ? to_string(*row.label) : "") << ','
            << (row.is_synthetic ? "1" : "0");
        for (double v : row.values) out << ',' << format_double(v);
        out << '\n';
    }
}

FeatureMatrix read_feature_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open feature file: " + path);
    }
    CsvReader reader(in, ',');
    std::vector<std::string> header;
    if (!reader.next(header) || header.size() < 4 || header[0] != "post_id" ||
        header[1] != "label" || header[2] != "is_synthetic") {
        throw InputError("not a feature CSV (bad header): " + path);
    }
    FeatureMatrix matrix;
    matrix.schema = FeatureSchema::from_names(
        std::vector<std::string>(header.begin() + 3, header.end()));

    const std::size_t n_words_idx = matrix.schema.index_of("n_words").value_or(
        matrix.schema.size());

    std::vector<std::string> fields;
    std::size_t lineno = 1;
    while (reader.next(fields)) {
        ++lineno;
        if (fields.size() != header.size()) {
            throw InputError(path + ":" + std::to_string(lineno) +
                             ": wrong column count");
        }
        FeatureVector row;
        row.post_id = fields[0];
        if (!fields[1].empty()) {
            auto label = parse_label(fields[1]);
            if (!label) {
                throw InputError(path + ":" + std::to_string(lineno) +
                                 ": bad label '" + fields[1] + "'");
            }
            row.label = label;
        }
        row.is_synthetic = fields[2] == "1" || lower_ascii(fields[2]) == "true";
        row.values.reserve(matrix.schema.size());
        for (std::size_t i = 3; i < fields.size(); ++i) {
            double v = 0;
            auto res = std::from_chars(fields[i].data(),
                                       fields[i].data() + fields[i].size(), v);
            if (res.ec != std::errc()) {
                throw InputError(path + ":" + std::to_string(lineno) +
                                 ": bad number '" + fields[i] + "'");
            }
            row.values.push_back(v);
        }
        row.degenerate = n_words_idx < matrix.schema.size() &&
                         row.values[n_words_idx] == 0.0 && !row.is_synthetic;
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

FeatureMatrix project(const FeatureMatrix& matrix, const std::vector<std::string>& names) {
    std::vector<std::size_t> indices;
    indices.reserve(names.size());
    for (const std::string& name : names) {
        auto idx = matrix.schema.index_of(name);
        if (!idx) {
            throw InputError("project: feature '" + name + "' not in schema");
        }
        indices.push_back(*idx);
    }
    FeatureMatrix out;
    out.schema = FeatureSchema::from_names(names);
    out.rows.reserve(matrix.rows.size());
    for (const FeatureVector& row : matrix.rows) {
        FeatureVector r;
        r.post_id = row.post_id;
        r.label = row.label;
        r.is_synthetic = row.is_synthetic;
        r.degenerate = row.degenerate;
        r.values.reserve(indices.size());
        for (std::size_t idx : indices) r.values.push_back(row.values[idx]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

} // namespace confusion
