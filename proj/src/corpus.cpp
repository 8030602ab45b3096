#include "confusion/corpus.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "confusion/common.hpp"
#include "confusion/csv.hpp"

namespace confusion {

const char* to_string(BinaryLabel label) {
    return label == BinaryLabel::Confused ? "Confused" : "NonConfused";
}

std::optional<BinaryLabel> parse_label(std::string_view s) {
    std::string l = lower_ascii(s);
    if (l == "confused") return BinaryLabel::Confused;
    if (l == "nonconfused" || l == "non-confused" || l == "non_confused") {
        return BinaryLabel::NonConfused;
    }
    return std::nullopt;
}

Domain Domain::parse(std::string_view s) {
    std::string l = lower_ascii(trim(s));
    Domain d;
    if (l == "education" || l == "edu") {
        d.kind = Kind::Education;
        d.name = "Education";
    } else if (l == "humanities" || l == "hm") {
        d.kind = Kind::Humanities;
        d.name = "Humanities";
    } else if (l == "medicine" || l == "med") {
        d.kind = Kind::Medicine;
        d.name = "Medicine";
    } else {
        d.kind = Kind::Other;
        d.name = trim(s);
    }
    return d;
}

std::string Domain::str() const {
    return name;
}

std::optional<BinaryLabel> binarize(int score, NeutralPolicy policy) {
    if (score < 1 || score > 7) {
        throw InputError("binarize: confusion score " + std::to_string(score) +
                         " outside [1,7]");
    }
    if (score > 4) return BinaryLabel::Confused;
    if (score < 4) return BinaryLabel::NonConfused;
    if (policy == NeutralPolicy::IncludeAsConfused) return BinaryLabel::Confused;
    return std::nullopt;
}

std::size_t Corpus::count(BinaryLabel label) const {
    std::size_t n = 0;
    for (const auto& l : labels) {
        if (l && *l == label) ++n;
    }
    return n;
}

std::size_t Corpus::count_excluded() const {
    std::size_t n = 0;
    for (const auto& l : labels) {
        if (!l) ++n;
    }
    return n;
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open manifest: " + path);
    }
    Manifest m;
    bool saw_domain_value = false;
    bool saw_domain_col = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw InputError("manifest " + path + ":" + std::to_string(lineno) +
                             ": expected key=value");
        }
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key == "text_col") {
            m.text_col = value;
        } else if (key == "score_col") {
            m.score_col = value;
        } else if (key == "domain") {
            m.domain_value = value;
            saw_domain_value = true;
        } else if (key == "domain_col") {
            m.domain_col = value;
            saw_domain_col = true;
        } else if (key == "id_col") {
            m.id_col = value;
        } else if (key == "delimiter") {
            std::string v = lower_ascii(value);
            if (v == "comma" || v == ",") {
                m.delimiter = ',';
            } else if (v == "tab" || v == "\\t") {
                m.delimiter = '\t';
            } else {
                throw InputError("manifest " + path + ": delimiter must be comma or tab");
            }
        } else {
            throw InputError("manifest " + path + ": unknown key '" + key + "'");
        }
    }
    if (saw_domain_value && saw_domain_col) {
        throw InputError("manifest " + path + ": domain and domain_col are exclusive");
    }
    return m;
}

std::string IngestSummary::to_json() const {
    std::ostringstream out;
    out << "{\"rows_read\":" << rows_read << ",\"rows_kept\":" << rows_kept
        << ",\"skipped\":{\"empty_text\":" << skipped_empty_text
        << ",\"bad_score\":" << skipped_bad_score << ",\"bad_row\":" << skipped_bad_row
        << "}}";
    return out.str();
}

namespace {

// Integer score, tolerating a decimal point with zero fraction ("4.0").
std::optional<int> parse_score(std::string_view raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    std::size_t dot = s.find('.');
    if (dot != std::string::npos) {
        for (std::size_t i = dot + 1; i < s.size(); ++i) {
            if (s[i] != '0') return std::nullopt;
        }
        s = s.substr(0, dot);
        if (s.empty()) return std::nullopt;
    }
    int value = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::string& path, bool required) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
    }
    if (required) {
        throw InputError("column '" + name + "' not found in header of " + path);
    }
    return header.size();
}

} // namespace

LoadResult load_corpus(const std::string& path, const Manifest& manifest,
                       NeutralPolicy policy) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open data file: " + path);
    }
    CsvReader reader(in, manifest.delimiter);
    std::vector<std::string> header;
    if (!reader.next(header)) {
        throw InputError("empty data file: " + path);
    }
    // Strip a UTF-8 BOM if present.
    if (!header.empty() && header[0].size() >= 3 &&
        static_cast<unsigned char>(header[0][0]) == 0xef &&
        static_cast<unsigned char>(header[0][1]) == 0xbb &&
        static_cast<unsigned char>(header[0][2]) == 0xbf) {
        header[0].erase(0, 3);
    }

    const std::size_t text_idx = find_column(header, manifest.text_col, path, true);
    const std::size_t score_idx = find_column(header, manifest.score_col, path, true);
    std::size_t domain_idx = header.size();
    Domain fixed_domain;
    if (!manifest.domain_value.empty()) {
        fixed_domain = Domain::parse(manifest.domain_value);
    } else {
        domain_idx = find_column(header, manifest.domain_col, path, true);
    }
    const std::size_t id_idx = manifest.id_col.empty()
                                   ? header.size()
                                   : find_column(header, manifest.id_col, path, false);

    LoadResult result;
    result.corpus.domain = fixed_domain;
    bool first_domain = true;
    bool mixed_domain = false;

    std::vector<std::string> fields;
    while (reader.next(fields)) {
        ++result.summary.rows_read;
        if (fields.size() != header.size()) {
            ++result.summary.skipped_bad_row;
            continue;
        }
        std::string text = fields[text_idx];
        if (trim(text).empty()) {
            ++result.summary.skipped_empty_text;
            continue;
        }
        std::optional<int> score = parse_score(fields[score_idx]);
        if (!score || *score < 1 || *score > 7) {
            ++result.summary.skipped_bad_score;
            continue;
        }
        Post post;
        post.id = id_idx < header.size() ? fields[id_idx]
                                         : "r" + std::to_string(result.summary.rows_read);
        post.text = std::move(text);
        post.confusion_score = *score;
        post.domain = domain_idx < header.size() ? Domain::parse(fields[domain_idx])
                                                 : fixed_domain;
        if (first_domain) {
            result.corpus.domain = post.domain;
            first_domain = false;
        } else if (!(post.domain == result.corpus.domain)) {
            mixed_domain = true;
        }
        result.corpus.labels.push_back(binarize(post.confusion_score, policy));
        result.corpus.posts.push_back(std::move(post));
        ++result.summary.rows_kept;
    }
    if (mixed_domain) {
        result.corpus.domain = Domain{Domain::Kind::Other, "mixed"};
    }
    if (result.summary.rows_kept == 0) {
        throw InputError("no valid rows in " + path);
    }
    return result;
}

std::vector<Post> load_posts_for_prediction(const std::string& path,
                                            const Manifest& manifest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open data file: " + path);
    }
    CsvReader reader(in, manifest.delimiter);
    std::vector<std::string> header;
    if (!reader.next(header)) {
        throw InputError("empty data file: " + path);
    }
    const std::size_t text_idx = find_column(header, manifest.text_col, path, true);
    const std::size_t score_idx = find_column(header, manifest.score_col, path, false);
    const std::size_t domain_idx = manifest.domain_value.empty()
                                       ? find_column(header, manifest.domain_col, path, false)
                                       : header.size();
    const std::size_t id_idx = manifest.id_col.empty()
                                   ? header.size()
                                   : find_column(header, manifest.id_col, path, false);
    std::vector<Post> posts;
    std::vector<std::string> fields;
    std::size_t row = 0;
    while (reader.next(fields)) {
        ++row;
        if (fields.size() != header.size()) continue;
        if (trim(fields[text_idx]).empty()) continue;
        Post post;
        post.id = id_idx < header.size() ? fields[id_idx] : "r" + std::to_string(row);
        post.text = fields[text_idx];
        post.confusion_score = 4;
        if (score_idx < header.size()) {
            if (auto score = parse_score(fields[score_idx]);
                score && *score >= 1 && *score <= 7) {
                post.confusion_score = *score;
            }
        }
        post.domain = domain_idx < header.size() ? Domain::parse(fields[domain_idx])
                                                 : Domain::parse(manifest.domain_value);
        posts.push_back(std::move(post));
    }
    if (posts.empty()) {
        throw InputError("no usable rows in " + path);
    }
    return posts;
}

void write_corpus_csv(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write corpus file: " + path);
    }
    out << "Id,Text,Confusion,Domain\n";
    for (const Post& post : corpus.posts) {
        out << csv_escape(post.id, ',') << ',' << csv_escape(post.text, ',') << ','
            << post.confusion_score << ',' << csv_escape(post.domain.str(), ',') << '\n';
    }
}

namespace {

struct MeanSd {
    double mean = 0;
    double sd = 0;
};

MeanSd mean_sd(const std::vector<double>& values) {
    MeanSd r;
    if (values.empty()) return r;
    double sum = 0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return r;
    double ss = 0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return r;
}

} // namespace

std::map<BinaryLabel, DescriptiveStats>
corpus_stats(const Corpus& corpus, const std::vector<DescriptiveFeatures>& features) {
    if (corpus.posts.empty()) {
        throw InputError("corpus_stats: empty corpus");
    }
    if (features.size() != corpus.posts.size()) {
        throw std::invalid_argument("corpus_stats: features not parallel to posts");
    }
    struct Acc {
        std::vector<double> sentences, words, wps, lpw;
    };
    std::map<BinaryLabel, Acc> acc;
    for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
        if (!corpus.labels[i]) continue;
        Acc& a = acc[*corpus.labels[i]];
        const DescriptiveFeatures& f = features[i];
        a.sentences.push_back(static_cast<double>(f.n_sentences));
        a.words.push_back(static_cast<double>(f.n_words));
        if (f.n_sentences > 0) a.wps.push_back(f.words_per_sentence);
        if (f.n_words > 0) a.lpw.push_back(f.letters_per_word);
    }
    std::map<BinaryLabel, DescriptiveStats> out;
    for (const auto& [label, a] : acc) {
        DescriptiveStats s;
        s.n_posts = a.words.size();
        MeanSd m = mean_sd(a.sentences);
        s.mean_sentences_per_post = m.mean;
        s.sd_sentences_per_post = m.sd;
        m = mean_sd(a.words);
        s.mean_words_per_post = m.mean;
        s.sd_words_per_post = m.sd;
        m = mean_sd(a.wps);
        s.mean_words_per_sentence = m.mean;
        s.sd_words_per_sentence = m.sd;
        m = mean_sd(a.lpw);
        s.mean_letters_per_word = m.mean;
        s.sd_letters_per_word = m.sd;
        out[label] = s;
    }
    return out;
}

} // namespace confusion
