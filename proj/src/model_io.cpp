#include "assetowner/model_io.hpp"

#include "json_params.hpp"

namespace assetowner {

using detail::json;

namespace {

json tree_json(const WeightedTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"left", n.left},
                         {"right", n.right},
                         {"left_set", n.left_set},
                         {"label", n.label},
                         {"positive_fraction", n.positive_fraction},
                         {"weight", n.weight},
                         {"count", n.count},
                         {"depth", n.depth},
                         {"decrease", n.decrease},
                         {"rank", n.rank}});
    }
    return {{"root_impurity", t.root_impurity}, {"nodes", std::move(nodes)}};
}

WeightedTree tree_from(const json& j) {
    WeightedTree t;
    t.root_impurity = j.at("root_impurity").get<double>();
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.feature = n.at("feature").get<std::int32_t>();
        node.left = n.at("left").get<std::int32_t>();
        node.right = n.at("right").get<std::int32_t>();
        node.left_set = n.at("left_set").get<std::vector<std::uint64_t>>();
        node.label = n.at("label").get<bool>();
        node.positive_fraction = n.at("positive_fraction").get<double>();
        node.weight = n.at("weight").get<double>();
        node.count = n.at("count").get<std::uint32_t>();
        node.depth = n.at("depth").get<std::uint32_t>();
        node.decrease = n.at("decrease").get<double>();
        node.rank = n.at("rank").get<std::uint32_t>();
        t.nodes.push_back(std::move(node));
    }
    if (t.nodes.empty()) throw ModelError("tree without nodes");
    const auto size = static_cast<std::int32_t>(t.nodes.size());
    for (const auto& n : t.nodes) {
        if (!n.is_split()) continue;
        if (n.feature >= static_cast<std::int32_t>(kFeatureCount) || n.left <= 0 || n.right <= 0 ||
            n.left >= size || n.right >= size) {
            throw ModelError("tree node references out of range");
        }
    }
    return t;
}

json trees_json(const std::vector<WeightedTree>& trees) {
    json out = json::array();
    for (const auto& t : trees) out.push_back(tree_json(t));
    return out;
}

std::vector<WeightedTree> trees_from(const json& j) {
    std::vector<WeightedTree> out;
    for (const auto& t : j) out.push_back(tree_from(t));
    return out;
}

json body_json(const ModelVariant& model) {
    return std::visit(
        [](const auto& m) -> json {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, AdaboostModel>) {
                return {{"trees", trees_json(m.trees)}, {"alphas", m.alphas}, {"round_errors", m.round_errors}};
            } else if constexpr (std::is_same_v<M, LogisticModel>) {
                return {{"intercept", m.intercept},
                        {"weights", m.weights},
                        {"iterations", m.iterations},
                        {"gradient_norm", m.gradient_norm}};
            } else if constexpr (std::is_same_v<M, NaiveBayesModel>) {
                return {{"class_counts", m.class_counts}, {"counts", m.counts}, {"vocab_sizes", m.vocab_sizes}};
            } else if constexpr (std::is_same_v<M, CartModel>) {
                return {{"tree", tree_json(m.tree)}};
            } else {
                return {{"seed", m.seed}, {"trees", trees_json(m.trees)}, {"impurity_decrease", m.impurity_decrease}};
            }
        },
        model);
}

ModelVariant body_from(Family family, const HyperParams& params, const json& j) {
    switch (family) {
        case Family::adaboost: {
            AdaboostModel m;
            m.params = std::get<AdaboostParams>(params);
            m.trees = trees_from(j.at("trees"));
            m.alphas = j.at("alphas").get<std::vector<double>>();
            m.round_errors = j.at("round_errors").get<std::vector<double>>();
            if (m.trees.empty() || m.alphas.size() != m.trees.size() || m.round_errors.size() != m.trees.size())
                throw ModelError("adaboost rounds are inconsistent");
            return m;
        }
        case Family::logistic: {
            LogisticModel m;
            m.params = std::get<LogisticParams>(params);
            m.intercept = j.at("intercept").get<double>();
            m.weights = j.at("weights").get<decltype(m.weights)>();
            m.iterations = j.at("iterations").get<std::uint32_t>();
            m.gradient_norm = j.at("gradient_norm").get<double>();
            return m;
        }
        case Family::naive_bayes: {
            NaiveBayesModel m;
            m.params = std::get<NaiveBayesParams>(params);
            m.class_counts = j.at("class_counts").get<decltype(m.class_counts)>();
            m.counts = j.at("counts").get<decltype(m.counts)>();
            m.vocab_sizes = j.at("vocab_sizes").get<decltype(m.vocab_sizes)>();
            for (std::size_t f = 0; f < kFeatureCount; ++f)
                if (m.counts[f].size() != 2 * m.vocab_sizes[f]) throw ModelError("naive Bayes counts are inconsistent");
            return m;
        }
        case Family::cart: {
            CartModel m;
            m.params = std::get<CartParams>(params);
            m.tree = tree_from(j.at("tree"));
            return m;
        }
        case Family::random_forest: {
            ForestModel m;
            m.params = std::get<ForestParams>(params);
            m.seed = j.at("seed").get<std::uint64_t>();
            m.trees = trees_from(j.at("trees"));
            m.impurity_decrease = j.at("impurity_decrease").get<FeatureImportance>();
            if (m.trees.empty()) throw ModelError("forest without trees");
            return m;
        }
    }
    throw ModelError("unknown family");
}

}  // namespace

std::string model_to_json(const FittedModel& model) {
    json vocab = json::object();
    for (std::size_t f = 0; f < kFeatureCount; ++f) vocab[std::string(kFeatureNames[f])] = model.vocabulary[f];
    const json doc = {{"schema_version", kModelSchemaVersion},
                      {"family", to_string(model.family())},
                      {"params", detail::params_json(model.params())},
                      {"vocabulary", std::move(vocab)},
                      {"model", body_json(model.model)}};
    return doc.dump(1);
}

FittedModel model_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        const int version = doc.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw ModelError("unsupported model schema_version " + std::to_string(version));
        }
        const Family family = family_from_string(doc.at("family").get<std::string>());
        const HyperParams params = detail::params_from(family, doc.at("params"));
        FittedModel out;
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            out.vocabulary[f] = doc.at("vocabulary").at(std::string(kFeatureNames[f])).get<Vocabulary>();
        out.model = body_from(family, params, doc.at("model"));
        return out;
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed model document: ") + e.what());
    }
}

}  // namespace assetowner
