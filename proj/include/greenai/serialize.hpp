#pragma once

#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "greenai/cascade.hpp"
#include "greenai/decision_tree.hpp"
#include "greenai/feedforward_net.hpp"
#include "greenai/router.hpp"
#include "greenai/softmax_regressor.hpp"

namespace greenai {

inline constexpr int kModelSchemaVersion = 1;

// Model files are versioned JSON documents: a kind tag, the training
// hyperparameters (including the seed), and flattened parameter arrays.
// Doubles survive the round trip exactly, so reloaded models predict
// identically to the originals.

inline nlohmann::json model_to_json(const DecisionTree& tree) {
    if (!tree.fitted()) throw std::logic_error("model_to_json: tree is not fitted");
    nlohmann::json feature = nlohmann::json::array();
    nlohmann::json threshold = nlohmann::json::array();
    nlohmann::json left = nlohmann::json::array();
    nlohmann::json right = nlohmann::json::array();
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& n : tree.nodes()) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        counts.push_back(n.counts);
    }
    return {{"schema_version", kModelSchemaVersion},
            {"kind", "decision_tree"},
            {"hyperparameters", {{"max_depth", tree.max_depth()}}},
            {"feature_dim", tree.feature_dim()},
            {"num_classes", tree.num_classes()},
            {"nodes",
             {{"feature", std::move(feature)},
              {"threshold", std::move(threshold)},
              {"left", std::move(left)},
              {"right", std::move(right)},
              {"counts", std::move(counts)}}}};
}

inline nlohmann::json model_to_json(const FeedforwardNet& net) {
    if (!net.fitted()) throw std::logic_error("model_to_json: net is not fitted");
    const NetConfig& c = net.config();
    return {{"schema_version", kModelSchemaVersion},
            {"kind", "feedforward_net"},
            {"hyperparameters",
             {{"hidden_sizes", c.hidden_sizes},
              {"learning_rate", c.learning_rate},
              {"momentum", c.momentum},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"feature_scale", c.feature_scale}}},
            {"layer_sizes", net.layer_sizes()},
            {"parameters", net.flatten_parameters()}};
}

inline nlohmann::json model_to_json(const SoftmaxRegressor& m) {
    if (!m.fitted()) throw std::logic_error("model_to_json: regressor is not fitted");
    const SoftmaxConfig& c = m.config();
    return {{"schema_version", kModelSchemaVersion},
            {"kind", "softmax_regressor"},
            {"hyperparameters",
             {{"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"feature_scale", c.feature_scale},
              {"balanced", m.balanced()}}},
            {"num_classes", m.num_classes()},
            {"feature_dim", m.feature_dim()},
            {"weights", m.weights()},
            {"bias", m.bias()},
            {"class_weights", m.class_weights()}};
}

inline nlohmann::json model_to_json(const Classifier& model) {
    if (auto* t = dynamic_cast<const DecisionTree*>(&model)) return model_to_json(*t);
    if (auto* n = dynamic_cast<const FeedforwardNet*>(&model)) return model_to_json(*n);
    if (auto* s = dynamic_cast<const SoftmaxRegressor*>(&model)) return model_to_json(*s);
    throw std::invalid_argument("model_to_json: unsupported classifier type");
}

namespace detail {

inline void check_schema(const nlohmann::json& j, const char* expected_kind) {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
        throw std::invalid_argument("model json: unsupported schema_version " +
                                    std::to_string(version));
    const auto kind = j.at("kind").get<std::string>();
    if (kind != expected_kind)
        throw std::invalid_argument("model json: expected kind '" + std::string(expected_kind) +
                                    "', found '" + kind + "'");
}

} // namespace detail

inline DecisionTree tree_from_json(const nlohmann::json& j) {
    detail::check_schema(j, "decision_tree");
    const auto& nj = j.at("nodes");
    const auto feature = nj.at("feature").get<std::vector<int>>();
    const auto threshold = nj.at("threshold").get<std::vector<double>>();
    const auto left = nj.at("left").get<std::vector<int>>();
    const auto right = nj.at("right").get<std::vector<int>>();
    const auto counts = nj.at("counts").get<std::vector<std::vector<std::int64_t>>>();
    if (feature.size() != threshold.size() || feature.size() != left.size() ||
        feature.size() != right.size() || feature.size() != counts.size())
        throw std::invalid_argument("model json: tree node arrays have mismatched lengths");

    std::vector<DecisionTree::Node> nodes(feature.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i].feature = feature[i];
        nodes[i].threshold = threshold[i];
        nodes[i].left = left[i];
        nodes[i].right = right[i];
        nodes[i].counts = counts[i];
        if (nodes[i].is_leaf()) {
            // leaf label and purity are derived from the stored histogram
            std::int64_t total = 0, best = -1;
            for (int c = 0; c < static_cast<int>(nodes[i].counts.size()); ++c) {
                const std::int64_t v = nodes[i].counts[static_cast<std::size_t>(c)];
                total += v;
                if (v > best) {
                    best = v;
                    nodes[i].label = c;
                }
            }
            if (total <= 0) throw std::invalid_argument("model json: empty leaf histogram");
            nodes[i].confidence = static_cast<double>(best) / static_cast<double>(total);
        }
    }
    return DecisionTree::from_structure(j.at("hyperparameters").at("max_depth").get<int>(),
                                        j.at("feature_dim").get<int>(),
                                        j.at("num_classes").get<int>(), std::move(nodes));
}

inline FeedforwardNet net_from_json(const nlohmann::json& j) {
    detail::check_schema(j, "feedforward_net");
    const auto& h = j.at("hyperparameters");
    NetConfig cfg;
    cfg.hidden_sizes = h.at("hidden_sizes").get<std::vector<int>>();
    cfg.learning_rate = h.at("learning_rate").get<double>();
    cfg.momentum = h.at("momentum").get<double>();
    cfg.batch_size = h.at("batch_size").get<int>();
    cfg.epochs = h.at("epochs").get<int>();
    cfg.seed = h.at("seed").get<std::uint64_t>();
    cfg.feature_scale = h.at("feature_scale").get<double>();
    return FeedforwardNet::from_parameters(std::move(cfg),
                                           j.at("layer_sizes").get<std::vector<int>>(),
                                           j.at("parameters").get<std::vector<double>>());
}

inline SoftmaxRegressor softmax_from_json(const nlohmann::json& j) {
    detail::check_schema(j, "softmax_regressor");
    const auto& h = j.at("hyperparameters");
    SoftmaxConfig cfg;
    cfg.learning_rate = h.at("learning_rate").get<double>();
    cfg.epochs = h.at("epochs").get<int>();
    cfg.seed = h.at("seed").get<std::uint64_t>();
    cfg.feature_scale = h.at("feature_scale").get<double>();
    return SoftmaxRegressor::from_parameters(
        cfg, h.at("balanced").get<bool>(), j.at("num_classes").get<int>(),
        j.at("feature_dim").get<int>(), j.at("weights").get<std::vector<double>>(),
        j.at("bias").get<std::vector<double>>(),
        j.at("class_weights").get<std::vector<double>>());
}

/// Polymorphic loader keyed on the kind tag.
inline std::shared_ptr<Classifier> model_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "decision_tree") return std::make_shared<DecisionTree>(tree_from_json(j));
    if (kind == "feedforward_net") return std::make_shared<FeedforwardNet>(net_from_json(j));
    if (kind == "softmax_regressor")
        return std::make_shared<SoftmaxRegressor>(softmax_from_json(j));
    throw std::invalid_argument("model json: unknown kind '" + kind + "'");
}

inline nlohmann::json router_to_json(const RouterModel& router) {
    nlohmann::json j{{"schema_version", kModelSchemaVersion},
                     {"kind", "router"},
                     {"constant_index", router.constant_index()},
                     {"chain", {{"declared_costs", router.chain().declared_costs()}}}};
    if (!router.is_constant()) j["learner"] = model_to_json(*router.learner());
    return j;
}

/// The chain itself is not embedded in the document; the caller supplies the
/// chain the router should drive. Its declared costs must match the recorded
/// metadata exactly.
inline RouterModel router_from_json(const nlohmann::json& j, ModelChain chain) {
    detail::check_schema(j, "router");
    const auto costs = j.at("chain").at("declared_costs").get<std::vector<double>>();
    if (costs != chain.declared_costs())
        throw std::invalid_argument(
            "router json: declared chain costs do not match the supplied chain");
    const int constant = j.at("constant_index").get<int>();
    if (constant != 0) return RouterModel(std::move(chain), constant);
    std::shared_ptr<const Classifier> learner = model_from_json(j.at("learner"));
    return RouterModel(std::move(chain), std::move(learner));
}

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("invalid json in " + path + ": " + e.what());
    }
}

} // namespace greenai
