#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "assetowner/dataset.hpp"
#include "assetowner/rng.hpp"

namespace assetowner {

/// Node of a binary tree over categorical codes. Internal nodes send a row
/// left when its code is in `left_set`; codes outside the vocabulary (unseen
/// at training) always go right. Every node keeps its leaf estimate so a
/// grown tree can also be read as any of its top-down truncations.
struct TreeNode {
    std::int32_t feature = -1;  // -1 for a leaf
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<std::uint64_t> left_set;  // bitset over the feature vocabulary

    bool label = false;
    double positive_fraction = 0.0;

    double weight = 0.0;      // sample weight reaching the node
    std::uint32_t count = 0;  // training rows reaching the node (with multiplicity)
    std::uint32_t depth = 0;
    double decrease = 0.0;    // weighted Gini decrease of the split
    std::uint32_t rank = 0;   // position of this split in growth order

    bool is_split() const { return feature >= 0; }
    bool goes_left(Code c) const {
        const std::size_t word = c / 64;
        return word < left_set.size() && ((left_set[word] >> (c % 64)) & 1U) != 0;
    }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Stricter limits applied when reading a tree that was grown with looser
/// ones. A split is followed only if it would also have been accepted under
/// these limits.
struct TreeView {
    double min_decrease = 0.0;  // absolute, i.e. cp * root impurity
    std::uint32_t minsplit = 0;
    std::uint32_t max_depth = std::numeric_limits<std::uint32_t>::max();
    std::uint32_t max_splits = std::numeric_limits<std::uint32_t>::max();  // best-first trees only

    bool follows(const TreeNode& n) const {
        return n.is_split() && n.count >= minsplit && n.depth < max_depth && n.decrease >= min_decrease &&
               n.rank < max_splits;
    }
};

class WeightedTree {
public:
    std::vector<TreeNode> nodes;  // root at 0
    double root_impurity = 0.0;   // weighted Gini of the root (W * 2p(1-p))

    const TreeNode& route(std::span<const Code> row) const;
    const TreeNode& route(std::span<const Code> row, const TreeView& view) const;

    std::size_t leaf_count() const;
    std::size_t leaf_count(const TreeView& view) const;
    std::uint32_t depth() const;

    // Sum of split decreases per feature (not normalized).
    std::array<double, kFeatureCount> importance() const;
    std::array<double, kFeatureCount> importance(const TreeView& view) const;

    // Materializes the view as a standalone tree.
    WeightedTree truncated(const TreeView& view) const;

    friend bool operator==(const WeightedTree&, const WeightedTree&) = default;
};

/// Draws mtry distinct features per node; mtry >= kFeatureCount means all.
class FeatureSampler {
public:
    FeatureSampler() = default;
    FeatureSampler(std::size_t mtry, Rng* rng) : mtry_(mtry), rng_(rng) {}

    // Ascending feature indices.
    void draw(std::vector<std::size_t>& out);

private:
    std::size_t mtry_ = kFeatureCount;
    Rng* rng_ = nullptr;
};

struct TreeParams {
    std::uint32_t max_depth = 30;
    std::uint32_t minsplit = 2;
    double cp = 0.0;  // split needs decrease >= cp * root impurity (and > 0)
};

/// One training row as seen by the grower: problem index, sample weight and
/// multiplicity (bootstrap count, 1 otherwise).
struct TreeSample {
    std::uint32_t index;
    std::uint32_t count;
    double weight;
};

/// Greedy top-down growth. Each node scans the sampled features; for each
/// feature the categories present in the node are ordered by weighted
/// positive rate and the best of the k-1 contiguous cuts is taken, which is
/// the exact optimum over all category subsets for two-class Gini.
/// Exact impurity ties go to the lower feature index, then the shorter cut.
WeightedTree fit_weighted_tree(const BinaryProblem& problem, std::span<const std::size_t> indices,
                               std::span<const double> weights, const TreeParams& params,
                               FeatureSampler sampler = {});

WeightedTree grow_depth_first(const BinaryProblem& problem, std::vector<TreeSample> samples,
                              const TreeParams& params, FeatureSampler sampler = {});

/// Best-first growth: repeatedly splits the open leaf with the largest
/// decrease until max_leaves leaves exist. Node ranks record split order, so
/// TreeView{.max_splits = k - 1} reproduces the tree grown to k leaves.
WeightedTree grow_best_first(const BinaryProblem& problem, std::vector<TreeSample> samples,
                             const TreeParams& params, std::uint32_t max_leaves, FeatureSampler sampler = {});

// Weighted Gini of a node with total weight w and positive weight p: w * 2q(1-q).
inline double weighted_gini(double w, double p) { return w > 0 ? 2.0 * p * (w - p) / w : 0.0; }

}  // namespace assetowner
