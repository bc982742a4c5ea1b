#pragma once

#include <json.hpp>

#include "assetowner/models.hpp"

namespace assetowner::detail {

using nlohmann::json;

inline json params_json(const HyperParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, AdaboostParams>)
                return {{"shrinkage", p.shrinkage}, {"depth", p.depth}, {"rounds", p.rounds}};
            else if constexpr (std::is_same_v<P, LogisticParams>)
                return {{"lambda", p.lambda}, {"tolerance", p.tolerance}, {"max_iterations", p.max_iterations}};
            else if constexpr (std::is_same_v<P, NaiveBayesParams>)
                return {{"laplace", p.laplace}};
            else if constexpr (std::is_same_v<P, CartParams>)
                return {{"cp", p.cp}, {"minsplit", p.minsplit}, {"maxdepth", p.maxdepth}};
            else
                return {{"ntree", p.ntree}, {"mtry", p.mtry}, {"maxnodes", p.maxnodes}};
        },
        params);
}

inline HyperParams params_from(Family family, const json& j) {
    switch (family) {
        case Family::adaboost:
            return AdaboostParams{j.at("shrinkage").get<double>(), j.at("depth").get<std::uint32_t>(),
                                  j.at("rounds").get<std::uint32_t>()};
        case Family::logistic:
            return LogisticParams{j.at("lambda").get<double>(), j.at("tolerance").get<double>(),
                                  j.at("max_iterations").get<std::uint32_t>()};
        case Family::naive_bayes: return NaiveBayesParams{j.at("laplace").get<double>()};
        case Family::cart:
            return CartParams{j.at("cp").get<double>(), j.at("minsplit").get<std::uint32_t>(),
                              j.at("maxdepth").get<std::uint32_t>()};
        case Family::random_forest:
            return ForestParams{j.at("ntree").get<std::uint32_t>(), j.at("mtry").get<std::uint32_t>(),
                                j.at("maxnodes").get<std::uint32_t>()};
    }
    throw ModelError("unknown family");
}

}  // namespace assetowner::detail
