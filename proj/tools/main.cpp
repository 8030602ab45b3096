#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "confusion/common.hpp"
#include "confusion/corpus.hpp"
#include "confusion/eval.hpp"
#include "confusion/features.hpp"
#include "confusion/lexicon.hpp"
#include "confusion/models.hpp"
#include "confusion/parallel.hpp"
#include "confusion/rng.hpp"
#include "confusion/smote.hpp"
#include "confusion/stats.hpp"
#include "confusion/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Exit codes: 0 success, 1 internal error, 2 usage/input error.
constexpr int kOk = 0;
constexpr int kInternalError = 1;
constexpr int kInputError = 2;

struct CommonOpts {
    std::string data;
    std::string manifest;
    std::string lexicons;
    std::string neutral = "include";
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
};

confusion::NeutralPolicy parse_neutral(const std::string& s) {
    if (s == "include") return confusion::NeutralPolicy::IncludeAsConfused;
    if (s == "exclude") return confusion::NeutralPolicy::Exclude;
    throw confusion::InputError("--neutral must be include or exclude");
}

confusion::Manifest load_manifest(const std::string& path) {
    if (path.empty()) return confusion::Manifest{};
    return confusion::Manifest::load(path);
}

std::string lexicon_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("CONFUSION_LEXICONS")) return env;
    throw confusion::InputError(
        "no lexicon directory: pass --lexicons or set CONFUSION_LEXICONS");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw confusion::InputError("cannot write " + path);
    out << text;
}

// Every command with --out leaves its resolved configuration next to the
// outputs so a run can be reproduced exactly.
void write_config(const std::string& out_prefix, const ordered_json& config) {
    if (out_prefix.empty()) return;
    write_text(out_prefix + ".config.json", config.dump(2) + "\n");
}

confusion::FeatureMatrix featurize_from_args(const CommonOpts& opts) {
    const confusion::Manifest manifest = load_manifest(opts.manifest);
    auto loaded =
        confusion::load_corpus(opts.data, manifest, parse_neutral(opts.neutral));
    auto registry = confusion::LexiconRegistry::load(lexicon_dir(opts.lexicons));
    auto schema = confusion::FeatureSchema::for_registry(registry);
    return confusion::featurize_corpus(loaded.corpus, registry, schema);
}

int cmd_ingest(const CommonOpts& opts, bool with_stats) {
    const confusion::Manifest manifest = load_manifest(opts.manifest);
    const confusion::NeutralPolicy policy = parse_neutral(opts.neutral);
    auto loaded = confusion::load_corpus(opts.data, manifest, policy);

    ordered_json summary = ordered_json::parse(loaded.summary.to_json());
    summary["class_counts"] = {
        {"confused", loaded.corpus.count(confusion::BinaryLabel::Confused)},
        {"non_confused", loaded.corpus.count(confusion::BinaryLabel::NonConfused)},
        {"excluded_neutral", loaded.corpus.count_excluded()}};
    summary["domain"] = loaded.corpus.domain.str();
    if (with_stats) {
        std::vector<confusion::DescriptiveFeatures> features(loaded.corpus.posts.size());
        confusion::parallel_for(loaded.corpus.posts.size(), [&](std::size_t i) {
            features[i] = confusion::descriptive_features(
                confusion::analyze(loaded.corpus.posts[i].text));
        });
        ordered_json stats = ordered_json::object();
        for (const auto& [label, s] : confusion::corpus_stats(loaded.corpus, features)) {
            stats[confusion::to_string(label)] = {
                {"posts", s.n_posts},
                {"sentences_per_post", {{"mean", s.mean_sentences_per_post},
                                        {"sd", s.sd_sentences_per_post}}},
                {"words_per_post", {{"mean", s.mean_words_per_post},
                                    {"sd", s.sd_words_per_post}}},
                {"words_per_sentence", {{"mean", s.mean_words_per_sentence},
                                        {"sd", s.sd_words_per_sentence}}},
                {"letters_per_word", {{"mean", s.mean_letters_per_word},
                                      {"sd", s.sd_letters_per_word}}}};
        }
        summary["descriptive_stats"] = std::move(stats);
    }
    std::cout << summary.dump(2) << std::endl;

    if (!opts.out.empty()) {
        fs::create_directories(opts.out);
        confusion::write_corpus_csv(loaded.corpus,
                                    (fs::path(opts.out) / "corpus.csv").string());
        write_text((fs::path(opts.out) / "ingest_summary.json").string(),
                   summary.dump(2) + "\n");
        write_config((fs::path(opts.out) / "ingest").string(),
                     {{"command", "ingest"},
                      {"data", opts.data},
                      {"manifest", opts.manifest},
                      {"neutral", opts.neutral}});
    }
    return kOk;
}

int cmd_featurize(const CommonOpts& opts) {
    if (opts.out.empty()) throw confusion::InputError("featurize needs --out FILE.csv");
    confusion::FeatureMatrix matrix = featurize_from_args(opts);
    confusion::write_feature_csv(matrix, opts.out);
    write_config(opts.out, {{"command", "featurize"},
                            {"data", opts.data},
                            {"manifest", opts.manifest},
                            {"lexicons", lexicon_dir(opts.lexicons)},
                            {"neutral", opts.neutral},
                            {"schema_hash", matrix.schema.hash_hex()},
                            {"rows", matrix.rows.size()}});
    std::cout << "{\"rows\":" << matrix.rows.size() << ",\"features\":"
              << matrix.schema.size() << ",\"schema_hash\":\""
              << matrix.schema.hash_hex() << "\"}" << std::endl;
    return kOk;
}

int cmd_select(const CommonOpts& opts, const std::string& features_path, double q,
               double r_threshold, const std::string& screening) {
    if (opts.out.empty()) throw confusion::InputError("select needs --out PREFIX");
    confusion::FeatureMatrix matrix = confusion::read_feature_csv(features_path);
    confusion::stats::SelectionConfig config;
    config.q = q;
    config.r_threshold = r_threshold;
    config.seed = opts.seed;
    if (screening == "off") config.screening = confusion::stats::ScreeningMode::Off;
    else if (screening == "advisory") config.screening = confusion::stats::ScreeningMode::Advisory;
    else if (screening == "strict") config.screening = confusion::stats::ScreeningMode::Strict;
    else throw confusion::InputError("--screening must be off, advisory or strict");

    confusion::stats::SelectionReport report = confusion::stats::select_features(matrix, config);
    write_text(opts.out + ".json", report.to_json() + "\n");
    write_text(opts.out + ".csv", report.to_csv());
    write_config(opts.out, {{"command", "select"},
                            {"features", features_path},
                            {"q", q},
                            {"r_threshold", r_threshold},
                            {"screening", screening},
                            {"seed", opts.seed}});
    std::cout << "{\"tested\":" << report.results.size() << ",\"retained\":"
              << report.retained.size() << "}" << std::endl;
    return kOk;
}

confusion::ModelParams make_params(const std::string& kind, std::size_t trees,
                                   std::uint64_t seed) {
    confusion::ModelParams params;
    if (kind == "rf" || kind == "random_forest") {
        params.kind = confusion::ModelKind::RandomForest;
    } else if (kind == "gnb" || kind == "naive_bayes") {
        params.kind = confusion::ModelKind::GaussianNB;
    } else if (kind == "lr" || kind == "logistic") {
        params.kind = confusion::ModelKind::LogisticRegression;
    } else {
        throw confusion::InputError("--model must be rf, gnb or lr");
    }
    params.n_trees = trees;
    params.seed = seed;
    return params;
}

confusion::FeatureMatrix apply_selection(confusion::FeatureMatrix matrix,
                                         const std::string& selection_path) {
    if (selection_path.empty()) return matrix;
    std::ifstream in(selection_path);
    if (!in) throw confusion::InputError("cannot open selection report: " + selection_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto report = confusion::stats::SelectionReport::from_json(buf.str());
    if (report.retained.empty()) {
        throw confusion::InputError("selection report retains no features");
    }
    return confusion::project(matrix, report.retained);
}

int cmd_train(const CommonOpts& opts, const std::string& features_path,
              const std::string& selection_path, const std::string& kind,
              std::size_t trees, std::size_t smote_k, double target_ratio) {
    if (opts.out.empty()) throw confusion::InputError("train needs --out FILE");
    confusion::FeatureMatrix matrix =
        apply_selection(confusion::read_feature_csv(features_path), selection_path);

    confusion::SmoteConfig smote_cfg;
    smote_cfg.k_neighbors = smote_k;
    smote_cfg.target_ratio = target_ratio;
    smote_cfg.seed = confusion::mix_seed(opts.seed, 0x10);
    confusion::FeatureMatrix balanced = confusion::balance_training_set(matrix, smote_cfg);

    confusion::ModelParams params = make_params(kind, trees, opts.seed);
    confusion::TrainedModel model = confusion::train(balanced, params);
    confusion::save_model(model, opts.out);
    write_config(opts.out, {{"command", "train"},
                            {"features", features_path},
                            {"selection", selection_path},
                            {"model", kind},
                            {"trees", trees},
                            {"smote_k", smote_k},
                            {"target_ratio", target_ratio},
                            {"seed", opts.seed}});
    std::cout << "{\"n_train\":" << model.meta.n_train << ",\"n_synthetic\":"
              << model.meta.n_synthetic << ",\"schema_hash\":\""
              << confusion::to_hex(model.schema_hash) << "\"}" << std::endl;
    return kOk;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& features_path,
                 const std::string& selection_path, bool run_select,
                 const std::string& kind, std::size_t trees, std::size_t k,
                 std::size_t smote_k, double target_ratio, double q,
                 double r_threshold) {
    if (opts.out.empty()) throw confusion::InputError("evaluate needs --out PREFIX");
    confusion::FeatureMatrix matrix;
    if (!features_path.empty()) {
        matrix = confusion::read_feature_csv(features_path);
    } else if (!opts.data.empty()) {
        matrix = featurize_from_args(opts); // one-command path from raw data
    } else {
        throw confusion::InputError("evaluate needs --features or --data");
    }
    matrix = apply_selection(matrix, selection_path);
    if (run_select) {
        confusion::stats::SelectionConfig config;
        config.q = q;
        config.r_threshold = r_threshold;
        config.seed = opts.seed;
        auto report = confusion::stats::select_features(matrix, config);
        if (!report.retained.empty()) {
            matrix = confusion::project(matrix, report.retained);
        }
        write_text(opts.out + ".selection.json", report.to_json() + "\n");
    }

    confusion::SmoteConfig smote_cfg;
    smote_cfg.k_neighbors = smote_k;
    smote_cfg.target_ratio = target_ratio;
    confusion::ModelParams params = make_params(kind, trees, opts.seed);
    confusion::EvaluationReport report =
        confusion::cross_validate(matrix, params, smote_cfg, k, opts.seed);
    confusion::emit_report(report, opts.out + ".json", opts.out + ".csv");
    write_config(opts.out, {{"command", "evaluate"},
                            {"features", features_path},
                            {"data", opts.data},
                            {"selection", selection_path},
                            {"select", run_select},
                            {"model", kind},
                            {"trees", trees},
                            {"k", k},
                            {"smote_k", smote_k},
                            {"target_ratio", target_ratio},
                            {"q", q},
                            {"r_threshold", r_threshold},
                            {"seed", opts.seed}});
    const auto& f1 = report.pooled.confused.f1;
    std::cout << "{\"pooled_f1_confused\":"
              << (f1 ? confusion::format_double(*f1) : "null") << ",\"accuracy\":"
              << confusion::format_double(report.pooled.accuracy) << "}" << std::endl;
    return kOk;
}

int cmd_crossdomain(const CommonOpts& opts, const std::string& train_path,
                    const std::string& test_path, bool drop_incompatible,
                    const std::string& kind, std::size_t trees, std::size_t smote_k,
                    double target_ratio) {
    if (opts.out.empty()) throw confusion::InputError("crossdomain needs --out PREFIX");
    confusion::FeatureMatrix train_matrix = confusion::read_feature_csv(train_path);
    confusion::FeatureMatrix test_matrix = confusion::read_feature_csv(test_path);
    confusion::SmoteConfig smote_cfg;
    smote_cfg.k_neighbors = smote_k;
    smote_cfg.target_ratio = target_ratio;
    smote_cfg.seed = confusion::mix_seed(opts.seed, 0x11);
    confusion::ModelParams params = make_params(kind, trees, opts.seed);
    confusion::EvaluationReport report = confusion::cross_domain_evaluate(
        train_matrix, test_matrix, params, smote_cfg, drop_incompatible);
    confusion::emit_report(report, opts.out + ".json", opts.out + ".csv");
    write_config(opts.out, {{"command", "crossdomain"},
                            {"train_features", train_path},
                            {"test_features", test_path},
                            {"drop_incompatible", drop_incompatible},
                            {"model", kind},
                            {"trees", trees},
                            {"smote_k", smote_k},
                            {"target_ratio", target_ratio},
                            {"seed", opts.seed}});
    const auto& f1 = report.pooled.confused.f1;
    std::cout << "{\"f1_confused\":"
              << (f1 ? confusion::format_double(*f1) : "null") << "}" << std::endl;
    return kOk;
}

int cmd_predict(const CommonOpts& opts, const std::string& model_path,
                const std::string& text) {
    confusion::TrainedModel model = confusion::load_model(model_path);
    auto registry = confusion::LexiconRegistry::load(lexicon_dir(opts.lexicons));
    auto full_schema = confusion::FeatureSchema::for_registry(registry);

    std::vector<confusion::Post> posts;
    if (!text.empty()) {
        posts.push_back({"stdin", text, 4, confusion::Domain{}});
    } else if (!opts.data.empty()) {
        posts = confusion::load_posts_for_prediction(opts.data, load_manifest(opts.manifest));
    } else {
        throw confusion::InputError("predict needs --text or --data");
    }

    for (const confusion::Post& post : posts) {
        confusion::TokenizedPost tokenized = confusion::analyze(post.text);
        confusion::FeatureVector full =
            confusion::featurize(post, tokenized, registry, full_schema);

        // Project onto the model's feature set by name.
        std::vector<double> values;
        values.reserve(model.feature_names.size());
        for (const std::string& name : model.feature_names) {
            auto idx = full_schema.index_of(name);
            if (!idx) {
                throw confusion::InputError("model feature '" + name +
                                            "' not derivable from these lexicons");
            }
            values.push_back(full.values[*idx]);
        }
        if (confusion::FeatureSchema::from_names(model.feature_names).hash !=
            model.schema_hash) {
            throw confusion::InputError("model schema hash mismatch");
        }
        confusion::Prediction pred = model.predict(values);

        auto counts = confusion::category_counts(tokenized, registry);
        std::vector<std::pair<std::string, std::size_t>> hits(counts.begin(),
                                                              counts.end());
        std::erase_if(hits, [](const auto& h) { return h.second == 0; });
        std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (hits.size() > 5) hits.resize(5);

        ordered_json line;
        line["id"] = post.id;
        line["label"] = confusion::to_string(pred.label);
        line["p_confused"] = pred.p_confused;
        line["lexicon_hits"] = ordered_json::object();
        for (const auto& [name, count] : hits) line["lexicon_hits"][name] = count;
        std::cout << line.dump() << '\n';
    }
    std::cout.flush();
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learner-confusion detection from forum language"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string features_path, selection_path, train_path, test_path, model_path;
    std::string model_kind = "rf", screening = "advisory", text;
    std::size_t trees = 100, k = 10, smote_k = 5;
    double q = 0.05, r_threshold = 0.9, target_ratio = 1.0;
    bool run_select = false;
    bool drop_incompatible = true;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        if (needs_data) {
            cmd->add_option("--data", opts.data, "input CSV/TSV file");
            cmd->add_option("--manifest", opts.manifest, "column-mapping manifest");
            cmd->add_option("--neutral", opts.neutral, "score-4 policy: include|exclude");
        }
        cmd->add_option("--out", opts.out, "output path or prefix");
        cmd->add_option("--seed", opts.seed, "random seed");
        cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
    };

    bool ingest_stats = false;
    CLI::App* ingest = app.add_subcommand("ingest", "load a corpus, print summary");
    add_common(ingest, true);
    ingest->add_flag("--stats", ingest_stats, "include per-class descriptive statistics");

    CLI::App* featurize = app.add_subcommand("featurize", "corpus to feature CSV");
    add_common(featurize, true);
    featurize->add_option("--lexicons", opts.lexicons, "lexicon directory");

    CLI::App* select = app.add_subcommand("select", "statistical feature selection");
    add_common(select, false);
    select->add_option("--features", features_path, "feature CSV")->required();
    select->add_option("--q", q, "Benjamini-Hochberg FDR level");
    select->add_option("--r-threshold", r_threshold, "collinearity |r| cutoff");
    select->add_option("--screening", screening, "off|advisory|strict");

    CLI::App* train_cmd = app.add_subcommand("train", "train a classifier");
    add_common(train_cmd, false);
    train_cmd->add_option("--features", features_path, "feature CSV")->required();
    train_cmd->add_option("--selection", selection_path, "selection report JSON");
    train_cmd->add_option("--model", model_kind, "rf|gnb|lr");
    train_cmd->add_option("--trees", trees, "forest size");
    train_cmd->add_option("--smote-k", smote_k, "SMOTE neighbour count");
    train_cmd->add_option("--target-ratio", target_ratio, "minority/majority after SMOTE");

    CLI::App* evaluate = app.add_subcommand("evaluate", "k-fold cross-validation");
    add_common(evaluate, true);
    evaluate->add_option("--lexicons", opts.lexicons, "lexicon directory");
    evaluate->add_option("--features", features_path, "feature CSV");
    evaluate->add_option("--selection", selection_path, "selection report JSON");
    evaluate->add_flag("--select", run_select, "run feature selection first");
    evaluate->add_option("--model", model_kind, "rf|gnb|lr");
    evaluate->add_option("--trees", trees, "forest size");
    evaluate->add_option("--k", k, "number of folds");
    evaluate->add_option("--smote-k", smote_k, "SMOTE neighbour count");
    evaluate->add_option("--target-ratio", target_ratio, "minority/majority after SMOTE");
    evaluate->add_option("--q", q, "FDR level when --select is on");
    evaluate->add_option("--r-threshold", r_threshold, "collinearity cutoff");

    CLI::App* crossdomain = app.add_subcommand("crossdomain", "train one domain, test another");
    add_common(crossdomain, false);
    crossdomain->add_option("--train-features", train_path, "training feature CSV")->required();
    crossdomain->add_option("--test-features", test_path, "test feature CSV")->required();
    crossdomain->add_flag("--drop-incompatible,!--keep-incompatible", drop_incompatible,
                          "drop cross-domain incompatible features (default on)");
    crossdomain->add_option("--model", model_kind, "rf|gnb|lr");
    crossdomain->add_option("--trees", trees, "forest size");
    crossdomain->add_option("--smote-k", smote_k, "SMOTE neighbour count");
    crossdomain->add_option("--target-ratio", target_ratio, "minority/majority after SMOTE");

    CLI::App* predict = app.add_subcommand("predict", "label posts with a saved model");
    add_common(predict, true);
    predict->add_option("--lexicons", opts.lexicons, "lexicon directory");
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("--text", text, "classify a single text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kInputError;
    }

    try {
        confusion::set_max_threads(opts.threads);
        if (ingest->parsed()) return cmd_ingest(opts, ingest_stats);
        if (featurize->parsed()) return cmd_featurize(opts);
        if (select->parsed()) return cmd_select(opts, features_path, q, r_threshold, screening);
        if (train_cmd->parsed()) {
            return cmd_train(opts, features_path, selection_path, model_kind, trees,
                             smote_k, target_ratio);
        }
        if (evaluate->parsed()) {
            return cmd_evaluate(opts, features_path, selection_path, run_select,
                                model_kind, trees, k, smote_k, target_ratio, q,
                                r_threshold);
        }
        if (crossdomain->parsed()) {
            return cmd_crossdomain(opts, train_path, test_path, drop_incompatible,
                                   model_kind, trees, smote_k, target_ratio);
        }
        if (predict->parsed()) return cmd_predict(opts, model_path, text);
        std::cerr << "no subcommand" << std::endl;
        return kInputError;
    } catch (const confusion::InputError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << std::endl;
        return kInternalError;
    }
}
