#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "assetowner/dataset.hpp"
#include "assetowner/tree.hpp"

namespace assetowner {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Family { adaboost, logistic, naive_bayes, cart, random_forest };

inline constexpr std::array<Family, 5> kAllFamilies = {Family::adaboost, Family::logistic, Family::naive_bayes,
                                                       Family::cart, Family::random_forest};

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);  // throws ModelError

struct Prediction {
    bool label = false;
    double score = 0.0;  // in [0,1]; label == (score >= 0.5)
};

using FeatureImportance = std::array<double, kFeatureCount>;

// ---------------------------------------------------------------------------
// hyperparameters

struct AdaboostParams {
    double shrinkage = 0.1;
    std::uint32_t depth = 2;
    std::uint32_t rounds = 100;
    friend bool operator==(const AdaboostParams&, const AdaboostParams&) = default;
};

struct LogisticParams {
    double lambda = 1e-4;
    double tolerance = 1e-6;  // gradient max-norm
    std::uint32_t max_iterations = 500;
    friend bool operator==(const LogisticParams&, const LogisticParams&) = default;
};

struct NaiveBayesParams {
    double laplace = 1.0;
    friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

struct CartParams {
    double cp = 0.01;
    std::uint32_t minsplit = 20;
    std::uint32_t maxdepth = 30;
    friend bool operator==(const CartParams&, const CartParams&) = default;
};

struct ForestParams {
    std::uint32_t ntree = 500;
    std::uint32_t mtry = 3;
    std::uint32_t maxnodes = 10;
    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

using HyperParams = std::variant<AdaboostParams, LogisticParams, NaiveBayesParams, CartParams, ForestParams>;

Family family_of(const HyperParams& params);

// ---------------------------------------------------------------------------
// models

/// Discrete reweighting boosting. Round m has weighted error e_m and
/// coefficient alpha_m = shrinkage * ln((1 - e_m) / e_m).
struct AdaboostModel {
    AdaboostParams params;
    std::vector<WeightedTree> trees;
    std::vector<double> alphas;
    std::vector<double> round_errors;  // weighted error e_m of each kept round

    Prediction predict(std::span<const Code> row) const;
    // Same boosting path with coefficients rescaled to another shrinkage.
    AdaboostModel with_shrinkage(double shrinkage) const;
    friend bool operator==(const AdaboostModel&, const AdaboostModel&) = default;
};

struct LogisticModel {
    LogisticParams params;
    double intercept = 0.0;
    std::array<std::vector<double>, kFeatureCount> weights;  // one per (feature, category)
    std::uint32_t iterations = 0;
    double gradient_norm = 0.0;  // max-norm at exit

    Prediction predict(std::span<const Code> row) const;
    friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

struct NaiveBayesModel {
    NaiveBayesParams params;
    std::array<double, 2> class_counts{};  // [negative, positive]
    // counts[f][c * K_f + v]
    std::array<std::vector<double>, kFeatureCount> counts;
    std::array<std::size_t, kFeatureCount> vocab_sizes{};

    double prior(bool positive) const;
    double likelihood(std::size_t feature, Code value, bool positive) const;
    Prediction predict(std::span<const Code> row) const;
    friend bool operator==(const NaiveBayesModel&, const NaiveBayesModel&) = default;
};

struct CartModel {
    CartParams params;
    WeightedTree tree;

    Prediction predict(std::span<const Code> row) const;
    friend bool operator==(const CartModel&, const CartModel&) = default;
};

struct ForestModel {
    ForestParams params;
    std::uint64_t seed = 0;
    std::vector<WeightedTree> trees;
    FeatureImportance impurity_decrease{};

    std::size_t positive_votes(std::span<const Code> row) const;
    Prediction predict(std::span<const Code> row) const;
    friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

using ModelVariant = std::variant<AdaboostModel, LogisticModel, NaiveBayesModel, CartModel, ForestModel>;

struct FittedModel {
    ModelVariant model;
    std::array<Vocabulary, kFeatureCount> vocabulary;  // snapshot of the training table

    Family family() const { return static_cast<Family>(model.index()); }
    HyperParams params() const;
    friend bool operator==(const FittedModel&, const FittedModel&) = default;
};

// ---------------------------------------------------------------------------
// fitting

// Per-round diagnostics, filled only when requested.
struct AdaboostTrace {
    std::vector<double> weight_sums;      // after each reweighting
    std::vector<double> training_errors;  // ensemble training error after each kept round
};

AdaboostModel fit_adaboost(const BinaryProblem& problem, std::span<const std::size_t> train,
                           const AdaboostParams& params, AdaboostTrace* trace = nullptr);

LogisticModel fit_logistic(const BinaryProblem& problem, std::span<const std::size_t> train,
                           const LogisticParams& params = {});

NaiveBayesModel fit_naive_bayes(const BinaryProblem& problem, std::span<const std::size_t> train,
                                const NaiveBayesParams& params);

CartModel fit_cart(const BinaryProblem& problem, std::span<const std::size_t> train, const CartParams& params);

ForestModel fit_random_forest(const BinaryProblem& problem, std::span<const std::size_t> train,
                              const ForestParams& params, std::uint64_t seed);

/// Tree `index` of a forest: bootstrap draw and per-node feature sampling
/// both come from derive_seed(seed, {index}), so a forest of ntree trees is
/// the prefix of any larger forest with the same seed, and a tree grown to
/// max_leaves contains every smaller maxnodes tree as a TreeView.
WeightedTree fit_forest_tree(const BinaryProblem& problem, std::span<const std::size_t> train, std::uint32_t mtry,
                             std::uint32_t max_leaves, std::uint64_t seed, std::uint32_t index);

FittedModel fit_model(const BinaryProblem& problem, std::span<const std::size_t> train, const HyperParams& params,
                      std::uint64_t seed);

Prediction predict(const FittedModel& model, std::span<const Code> row);

/// Impurity-decrease attribution, normalized to sum to 1 when any split
/// exists. Throws ModelError for logistic and naive Bayes.
FeatureImportance feature_importance(const FittedModel& model);
FeatureImportance normalize_importance(FeatureImportance raw);

/// Ridge-penalized negative log-likelihood over one-hot indicators:
/// sum_i [log(1 + e^z_i) - y_i z_i] + lambda/2 * |w|^2, intercept unpenalized.
/// Parameter layout: [intercept, feature 0 categories..., feature 1 ...].
class LogisticObjective {
public:
    LogisticObjective(const BinaryProblem& problem, std::span<const std::size_t> rows, double lambda);

    std::size_t dimension() const { return dim_; }
    double value(std::span<const double> theta) const;
    void gradient(std::span<const double> theta, std::span<double> out) const;

private:
    friend LogisticModel fit_logistic(const BinaryProblem&, std::span<const std::size_t>, const LogisticParams&);

    double margin(std::span<const double> theta, std::size_t row) const;

    const BinaryProblem& problem_;
    std::vector<std::size_t> rows_;
    double lambda_;
    std::array<std::size_t, kFeatureCount> offset_{};
    std::size_t dim_ = 1;
};

}  // namespace assetowner
