#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "assetowner/dataset.hpp"
#include "assetowner/models.hpp"

namespace assetowner {

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Positive = owned by the target owner. Throws on empty or mismatched input.
ConfusionMatrix confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual);

/// Undefined ratios (zero denominator) are empty optionals.
struct MetricSet {
    double accuracy = 0.0;
    double error_rate = 0.0;  // exactly 1 - accuracy
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> precision;
    std::optional<double> f1;
    friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

MetricSet metrics(const ConfusionMatrix& cm);  // throws on an empty matrix

/// Nearest-rank quantile of a sorted sample: the value at 1-based rank
/// ceil(num/den * n), with rank 0 read as the minimum.
double nearest_rank(std::span<const double> sorted, std::size_t num, std::size_t den);

struct ErrorSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    friend bool operator==(const ErrorSummary&, const ErrorSummary&) = default;
};

ErrorSummary summarize_errors(std::vector<double> errors);

/// Candidate hyperparameters per family, in enumeration order. Logistic has
/// no grid and is fit with its fixed configuration.
struct HyperGrid {
    std::string profile;
    std::vector<AdaboostParams> adaboost;
    std::vector<NaiveBayesParams> naive_bayes;
    std::vector<CartParams> cart;
    std::vector<ForestParams> forest;

    std::vector<HyperParams> tuples(Family f) const;
    static HyperGrid full();
    static HyperGrid desk();  // ntree in {100, 250}
};

enum class GridStrategy {
    nested,      // grow the loosest model once per shared path and read the rest from it
    exhaustive,  // fit every tuple independently
};

struct GridChoice {
    HyperParams params;
    std::size_t index = 0;  // position in the family's enumeration
    double cv_error = 0.0;
    FittedModel model;      // fitted on the train slice
};

/// Fits every tuple of the family's grid on plan.train, scores cv
/// misclassification and returns the first tuple with the smallest error.
GridChoice grid_search(const BinaryProblem& problem, const SplitPlan& plan, Family family, const HyperGrid& grid,
                       std::uint64_t seed, GridStrategy strategy = GridStrategy::nested);

// Seed handed to a family's fit in one iteration.
std::uint64_t family_seed(std::uint64_t master_seed, std::size_t iteration, Family family);

struct IterationResult {
    std::size_t iteration = 0;
    HyperParams params;
    double cv_error = 0.0;
    ConfusionMatrix test;
    double test_error = 0.0;
    std::optional<FeatureImportance> importance;  // tree families only
    friend bool operator==(const IterationResult&, const IterationResult&) = default;
};

struct MetricMean {
    std::optional<double> mean;  // over iterations where the metric is defined
    std::size_t undefined = 0;   // iterations skipped
    friend bool operator==(const MetricMean&, const MetricMean&) = default;
};

struct FamilyReport {
    Family family = Family::adaboost;
    std::vector<IterationResult> iterations;
    ConfusionMatrix aggregate;
    MetricSet metrics;
    std::array<MetricMean, 4> iteration_means;  // sensitivity, specificity, precision, f1
    ErrorSummary errors;
    std::optional<FeatureImportance> mean_importance;
    friend bool operator==(const FamilyReport&, const FamilyReport&) = default;
};

/// One held-out test row of one iteration.
struct PredictionRow {
    std::uint32_t iteration = 0;
    std::uint32_t row = 0;  // table row
    bool actual = false;
    std::vector<std::uint8_t> labels;  // one per family, in report order
    friend bool operator==(const PredictionRow&, const PredictionRow&) = default;
};

struct RunReport {
    std::string owner;
    std::uint64_t master_seed = 0;
    std::size_t iterations = 0;
    std::string grid_profile;
    std::size_t labeled_rows = 0;
    std::size_t positives = 0;
    std::vector<FamilyReport> families;  // canonical family order
    std::vector<PredictionRow> predictions;

    const FamilyReport& family(Family f) const;
    friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline constexpr std::uint64_t kDefaultMasterSeed = 20230917;

struct EvaluationConfig {
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    HyperGrid grid = HyperGrid::full();
    std::size_t iterations = 100;
    std::uint64_t master_seed = kDefaultMasterSeed;
    bool parallel = true;
    GridStrategy strategy = GridStrategy::nested;
};

/// Monte Carlo cross validation. Iterations run in parallel when enabled;
/// every random draw is keyed by (master_seed, iteration, family, tree), so
/// the report does not depend on scheduling or on the order of `families`.
RunReport run_mccv(const BinaryProblem& problem, const EvaluationConfig& config);

}  // namespace assetowner
