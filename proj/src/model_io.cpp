#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "confusion/common.hpp"
#include "confusion/models.hpp"

namespace confusion {

namespace {

using nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ModelKind kind_from_string(const std::string& s) {
    if (s == "random_forest") return ModelKind::RandomForest;
    if (s == "gaussian_nb") return ModelKind::GaussianNB;
    if (s == "logistic_regression") return ModelKind::LogisticRegression;
    throw InputError("unknown model kind '" + s + "'");
}

ordered_json params_to_json(const ModelParams& p) {
    return {{"kind", to_string(p.kind)},
            {"n_trees", p.n_trees},
            {"max_features_per_split", p.max_features_per_split},
            {"max_depth", p.max_depth},
            {"min_leaf", p.min_leaf},
            {"l2_penalty", p.l2_penalty},
            {"max_iters", p.max_iters},
            {"seed", p.seed}};
}

ModelParams params_from_json(const nlohmann::json& j) {
    ModelParams p;
    p.kind = kind_from_string(j.at("kind").get<std::string>());
    p.n_trees = j.at("n_trees").get<std::size_t>();
    p.max_features_per_split = j.at("max_features_per_split").get<std::size_t>();
    p.max_depth = j.at("max_depth").get<std::size_t>();
    p.min_leaf = j.at("min_leaf").get<std::size_t>();
    p.l2_penalty = j.at("l2_penalty").get<double>();
    p.max_iters = j.at("max_iters").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

ordered_json state_to_json(const TrainedModel& model) {
    ordered_json state;
    if (const auto* forest = std::get_if<ForestState>(&model.state)) {
        ordered_json trees = ordered_json::array();
        for (const Tree& tree : forest->trees) {
            std::vector<int> feature, left, right;
            std::vector<double> threshold;
            std::vector<std::uint32_t> n_confused, n_total;
            for (const TreeNode& node : tree.nodes) {
                feature.push_back(node.feature);
                threshold.push_back(node.threshold);
                left.push_back(node.left);
                right.push_back(node.right);
                n_confused.push_back(node.n_confused);
                n_total.push_back(node.n_total);
            }
            ordered_json t;
            t["feature"] = feature;
            t["threshold"] = threshold;
            t["left"] = left;
            t["right"] = right;
            t["n_confused"] = n_confused;
            t["n_total"] = n_total;
            trees.push_back(std::move(t));
        }
        state["trees"] = std::move(trees);
    } else if (const auto* gnb = std::get_if<GaussianNBState>(&model.state)) {
        state["mean_confused"] = gnb->mean[0];
        state["mean_nonconfused"] = gnb->mean[1];
        state["variance_confused"] = gnb->variance[0];
        state["variance_nonconfused"] = gnb->variance[1];
        state["log_prior_confused"] = gnb->log_prior[0];
        state["log_prior_nonconfused"] = gnb->log_prior[1];
    } else {
        const auto& lr = std::get<LogisticState>(model.state);
        state["weights"] = lr.weights;
        state["bias"] = lr.bias;
        state["iterations"] = lr.iterations;
        state["final_grad_norm"] = lr.final_grad_norm;
    }
    return state;
}

void state_from_json(const nlohmann::json& state, TrainedModel& model) {
    switch (model.params.kind) {
        case ModelKind::RandomForest: {
            ForestState forest;
            for (const auto& t : state.at("trees")) {
                Tree tree;
                const auto& feature = t.at("feature");
                const auto& threshold = t.at("threshold");
                const auto& left = t.at("left");
                const auto& right = t.at("right");
                const auto& n_confused = t.at("n_confused");
                const auto& n_total = t.at("n_total");
                tree.nodes.resize(feature.size());
                for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
                    tree.nodes[i].feature = feature[i].get<int>();
                    tree.nodes[i].threshold = threshold[i].get<double>();
                    tree.nodes[i].left = left[i].get<int>();
                    tree.nodes[i].right = right[i].get<int>();
                    tree.nodes[i].n_confused = n_confused[i].get<std::uint32_t>();
                    tree.nodes[i].n_total = n_total[i].get<std::uint32_t>();
                }
                forest.trees.push_back(std::move(tree));
            }
            model.state = std::move(forest);
            break;
        }
        case ModelKind::GaussianNB: {
            GaussianNBState gnb;
            gnb.mean[0] = state.at("mean_confused").get<std::vector<double>>();
            gnb.mean[1] = state.at("mean_nonconfused").get<std::vector<double>>();
            gnb.variance[0] = state.at("variance_confused").get<std::vector<double>>();
            gnb.variance[1] = state.at("variance_nonconfused").get<std::vector<double>>();
            gnb.log_prior[0] = state.at("log_prior_confused").get<double>();
            gnb.log_prior[1] = state.at("log_prior_nonconfused").get<double>();
            model.state = std::move(gnb);
            break;
        }
        case ModelKind::LogisticRegression: {
            LogisticState lr;
            lr.weights = state.at("weights").get<std::vector<double>>();
            lr.bias = state.at("bias").get<double>();
            lr.iterations = state.at("iterations").get<std::size_t>();
            lr.final_grad_norm = state.at("final_grad_norm").get<double>();
            model.state = std::move(lr);
            break;
        }
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string model_to_json(const TrainedModel& model) {
    ordered_json state = state_to_json(model);
    // Checksum covers the canonical (key-sorted) dump so it is stable across
    // writers that order keys differently.
    const std::string state_dump = nlohmann::json(state).dump();

    ordered_json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = to_string(model.params.kind);
    j["params"] = params_to_json(model.params);
    j["schema_hash"] = to_hex(model.schema_hash);
    j["feature_names"] = model.feature_names;
    j["created_utc"] = utc_now();
    j["meta"] = {{"n_train", model.meta.n_train},
                 {"n_confused", model.meta.n_confused},
                 {"n_nonconfused", model.meta.n_nonconfused},
                 {"n_synthetic", model.meta.n_synthetic},
                 {"n_degenerate_imputed", model.meta.n_degenerate_imputed},
                 {"wall_time_seconds", model.meta.wall_time_seconds}};
    j["state"] = std::move(state);
    j["checksum"] = to_hex(fnv1a64(state_dump));
    return j.dump();
}

TrainedModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
        throw InputError("unsupported model format version " + std::to_string(version));
    }
    TrainedModel model;
    model.params = params_from_json(j.at("params"));
    if (kind_from_string(j.at("kind").get<std::string>()) != model.params.kind) {
        throw InputError("model kind disagrees between header and params");
    }
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.schema_hash =
        std::stoull(j.at("schema_hash").get<std::string>(), nullptr, 16);
    const auto& meta = j.at("meta");
    model.meta.n_train = meta.at("n_train").get<std::size_t>();
    model.meta.n_confused = meta.at("n_confused").get<std::size_t>();
    model.meta.n_nonconfused = meta.at("n_nonconfused").get<std::size_t>();
    model.meta.n_synthetic = meta.at("n_synthetic").get<std::size_t>();
    model.meta.n_degenerate_imputed = meta.at("n_degenerate_imputed").get<std::size_t>();
    model.meta.wall_time_seconds = meta.at("wall_time_seconds").get<double>();

    // Integrity: the checksum covers the canonical (key-sorted) state dump.
    const std::string state_dump = j.at("state").dump();
    const std::string expected = j.at("checksum").get<std::string>();
    if (to_hex(fnv1a64(state_dump)) != expected) {
        throw InputError("model state checksum mismatch (corrupted file)");
    }
    state_from_json(j.at("state"), model);
    return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError("cannot write model file: " + path);
    }
    out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open model file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

} // namespace confusion
