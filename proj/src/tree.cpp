#include "assetowner/tree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace assetowner {

namespace {

// Relative slack under which two split decreases count as equal.
constexpr double kTieTolerance = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// WeightedTree

const TreeNode& WeightedTree::route(std::span<const Code> row) const {
    const TreeNode* n = &nodes[0];
    while (n->is_split()) n = &nodes[n->goes_left(row[n->feature]) ? n->left : n->right];
    return *n;
}

const TreeNode& WeightedTree::route(std::span<const Code> row, const TreeView& view) const {
    const TreeNode* n = &nodes[0];
    while (view.follows(*n)) n = &nodes[n->goes_left(row[n->feature]) ? n->left : n->right];
    return *n;
}

std::size_t WeightedTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return !n.is_split(); }));
}

std::size_t WeightedTree::leaf_count(const TreeView& view) const {
    std::size_t leaves = 0;
    std::vector<std::int32_t> stack = {0};
    while (!stack.empty()) {
        const auto& n = nodes[stack.back()];
        stack.pop_back();
        if (view.follows(n)) {
            stack.push_back(n.left);
            stack.push_back(n.right);
        } else {
            ++leaves;
        }
    }
    return leaves;
}

std::uint32_t WeightedTree::depth() const {
    std::uint32_t d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

std::array<double, kFeatureCount> WeightedTree::importance() const {
    std::array<double, kFeatureCount> out{};
    for (const auto& n : nodes)
        if (n.is_split()) out[n.feature] += n.decrease;
    return out;
}

std::array<double, kFeatureCount> WeightedTree::importance(const TreeView& view) const {
    // Summed in node order, matching importance() of the truncated tree.
    std::vector<std::uint8_t> split(nodes.size(), 0);
    std::vector<std::int32_t> stack = {0};
    while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        if (view.follows(nodes[id])) {
            split[id] = 1;
            stack.push_back(nodes[id].left);
            stack.push_back(nodes[id].right);
        }
    }
    std::array<double, kFeatureCount> out{};
    for (std::size_t id = 0; id < nodes.size(); ++id)
        if (split[id]) out[nodes[id].feature] += nodes[id].decrease;
    return out;
}

WeightedTree WeightedTree::truncated(const TreeView& view) const {
    // Kept nodes retain their relative order and split ranks are renumbered
    // densely, so the result equals a tree grown directly under the view.
    std::vector<std::uint8_t> kept(nodes.size(), 0), split(nodes.size(), 0);
    std::vector<std::int32_t> stack = {0};
    while (!stack.empty()) {
        const auto id = stack.back();
        stack.pop_back();
        kept[id] = 1;
        if (view.follows(nodes[id])) {
            split[id] = 1;
            stack.push_back(nodes[id].left);
            stack.push_back(nodes[id].right);
        }
    }
    std::vector<std::int32_t> remap(nodes.size(), -1);
    WeightedTree out;
    out.root_impurity = root_impurity;
    std::vector<std::pair<std::uint32_t, std::int32_t>> ranks;
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        if (!kept[id]) continue;
        remap[id] = static_cast<std::int32_t>(out.nodes.size());
        out.nodes.push_back(nodes[id]);
        auto& n = out.nodes.back();
        if (split[id]) {
            ranks.emplace_back(n.rank, remap[id]);
        } else {
            n.feature = n.left = n.right = -1;
            n.left_set.clear();
            n.decrease = 0.0;
            n.rank = 0;
        }
    }
    for (auto& n : out.nodes) {
        if (!n.is_split()) continue;
        n.left = remap[n.left];
        n.right = remap[n.right];
    }
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < ranks.size(); ++i) out.nodes[ranks[i].second].rank = static_cast<std::uint32_t>(i);
    return out;
}

// ---------------------------------------------------------------------------
// FeatureSampler

void FeatureSampler::draw(std::vector<std::size_t>& out) {
    out.resize(kFeatureCount);
    std::iota(out.begin(), out.end(), std::size_t{0});
    if (rng_ == nullptr || mtry_ >= kFeatureCount) return;
    for (std::size_t i = 0; i < mtry_; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, kFeatureCount - 1);
        std::swap(out[i], out[pick(*rng_)]);
    }
    out.resize(mtry_);
    std::sort(out.begin(), out.end());
}

// ---------------------------------------------------------------------------
// growth

namespace {

struct Split {
    std::int32_t feature = -1;
    double decrease = 0.0;
    std::vector<std::uint64_t> left_set;
};

class Grower {
public:
    Grower(const BinaryProblem& problem, std::vector<TreeSample> samples, const TreeParams& params,
           FeatureSampler sampler)
        : problem_(problem), samples_(std::move(samples)), params_(params), sampler_(sampler) {
        std::size_t max_vocab = 1;
        for (std::size_t f = 0; f < kFeatureCount; ++f) max_vocab = std::max(max_vocab, problem.vocab_size(f));
        pos_.assign(max_vocab, 0.0);
        neg_.assign(max_vocab, 0.0);
        scratch_.resize(samples_.size());
    }

    WeightedTree depth_first() {
        if (samples_.empty()) return single_leaf();
        add_node(0, samples_.size(), 0);
        tree_.root_impurity = impurity(tree_.nodes[0]);
        min_decrease_ = params_.cp * tree_.root_impurity;
        grow(0, 0, samples_.size());
        return std::move(tree_);
    }

    WeightedTree best_first(std::uint32_t max_leaves) {
        if (samples_.empty()) return single_leaf();
        add_node(0, samples_.size(), 0);
        tree_.root_impurity = impurity(tree_.nodes[0]);
        min_decrease_ = params_.cp * tree_.root_impurity;

        struct Open {
            double decrease;
            std::int32_t node;
            std::size_t begin, end;
            Split split;
        };
        const auto worse = [](const Open& a, const Open& b) {
            if (a.decrease != b.decrease) return a.decrease < b.decrease;
            return a.node > b.node;
        };
        std::priority_queue<Open, std::vector<Open>, decltype(worse)> open(worse);
        const auto consider = [&](std::int32_t id, std::size_t begin, std::size_t end) {
            Split s;
            if (eligible(tree_.nodes[id]) && find_split(begin, end, s)) {
                const double d = s.decrease;
                open.push(Open{d, id, begin, end, std::move(s)});
            }
        };
        consider(0, 0, samples_.size());
        std::uint32_t leaves = 1;
        while (leaves < max_leaves && !open.empty()) {
            Open top = open.top();
            open.pop();
            const auto [l, r, mid] = apply(top.node, top.begin, top.end, std::move(top.split));
            ++leaves;
            consider(l, top.begin, mid);
            consider(r, mid, top.end);
        }
        return std::move(tree_);
    }

private:
    WeightedTree single_leaf() {
        WeightedTree t;
        t.nodes.emplace_back();
        return t;
    }

    static double impurity(const TreeNode& n) { return weighted_gini(n.weight, n.positive_fraction * n.weight); }

    std::int32_t add_node(std::size_t begin, std::size_t end, std::uint32_t depth) {
        TreeNode n;
        double p = 0.0, q = 0.0;
        std::uint32_t count = 0;
        bool any_pos = false, any_neg = false;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& s = samples_[i];
            if (problem_.labels[s.index]) {
                p += s.weight;
                any_pos = true;
            } else {
                q += s.weight;
                any_neg = true;
            }
            count += s.count;
        }
        n.weight = p + q;
        n.positive_fraction = n.weight > 0 ? p / n.weight : 0.0;
        n.label = n.positive_fraction >= 0.5;
        n.count = count;
        n.depth = depth;
        node_pure_.push_back(!(any_pos && any_neg));
        tree_.nodes.push_back(std::move(n));
        return static_cast<std::int32_t>(tree_.nodes.size() - 1);
    }

    bool eligible(const TreeNode& n) const {
        const auto id = static_cast<std::size_t>(&n - tree_.nodes.data());
        return !node_pure_[id] && n.count >= params_.minsplit && n.depth < params_.max_depth;
    }

    // Best split over the sampled features; false when nothing acceptable.
    bool find_split(std::size_t begin, std::size_t end, Split& best) {
        sampler_.draw(features_);
        double best_decrease = 0.0;
        best.feature = -1;
        for (const std::size_t f : features_) {
            const std::size_t k = problem_.vocab_size(f);
            std::fill_n(pos_.begin(), k, 0.0);
            std::fill_n(neg_.begin(), k, 0.0);
            for (std::size_t i = begin; i < end; ++i) {
                const auto& s = samples_[i];
                const Code c = problem_.codes[static_cast<std::size_t>(s.index) * kFeatureCount + f];
                (problem_.labels[s.index] ? pos_ : neg_)[c] += s.weight;
            }
            order_.clear();
            for (std::size_t c = 0; c < k; ++c) {
                const double w = pos_[c] + neg_[c];
                if (w > 0) order_.emplace_back(pos_[c] / w, static_cast<Code>(c));
            }
            if (order_.size() < 2) continue;
            std::sort(order_.begin(), order_.end());

            double p_total = 0.0, q_total = 0.0;
            for (const auto& [rate, c] : order_) {
                p_total += pos_[c];
                q_total += neg_[c];
            }
            const double parent = weighted_gini(p_total + q_total, p_total);
            double pl = 0.0, ql = 0.0;
            double feature_best = 0.0;
            std::size_t cut = 0;
            for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
                pl += pos_[order_[i].second];
                ql += neg_[order_[i].second];
                const double pr = p_total - pl;
                const double qr = q_total - ql;
                const double d = parent - weighted_gini(pl + ql, pl) - weighted_gini(pr + qr, pr);
                if (d > feature_best + kTieTolerance * parent) {
                    feature_best = d;
                    cut = i + 1;
                }
            }
            if (cut == 0) continue;
            if (best.feature < 0 ? feature_best > kTieTolerance * parent
                                 : feature_best > best_decrease + kTieTolerance * parent) {
                best_decrease = feature_best;
                best.feature = static_cast<std::int32_t>(f);
                best.left_set.assign((k + 63) / 64, 0);
                for (std::size_t i = 0; i < cut; ++i) {
                    const Code c = order_[i].second;
                    best.left_set[c / 64] |= std::uint64_t{1} << (c % 64);
                }
            }
        }
        best.decrease = best_decrease;
        return best.feature >= 0 && best.decrease > 0 && best.decrease >= min_decrease_;
    }

    struct Applied {
        std::int32_t left, right;
        std::size_t mid;
    };

    Applied apply(std::int32_t id, std::size_t begin, std::size_t end, Split split) {
        const auto f = static_cast<std::size_t>(split.feature);
        TreeNode probe;
        probe.left_set = split.left_set;
        std::size_t l = begin, r = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& s = samples_[i];
            if (probe.goes_left(problem_.codes[static_cast<std::size_t>(s.index) * kFeatureCount + f])) {
                samples_[l++] = s;
            } else {
                scratch_[r++] = s;
            }
        }
        std::copy_n(scratch_.begin(), r, samples_.begin() + static_cast<std::ptrdiff_t>(l));
        const std::size_t mid = l;
        const std::uint32_t depth = tree_.nodes[id].depth + 1;
        const auto left = add_node(begin, mid, depth);
        const auto right = add_node(mid, end, depth);
        auto& n = tree_.nodes[id];
        n.feature = split.feature;
        n.left_set = std::move(split.left_set);
        n.decrease = split.decrease;
        n.left = left;
        n.right = right;
        n.rank = splits_++;
        return {left, right, mid};
    }

    void grow(std::int32_t id, std::size_t begin, std::size_t end) {
        if (!eligible(tree_.nodes[id])) return;
        Split split;
        if (!find_split(begin, end, split)) return;
        const auto [l, r, mid] = apply(id, begin, end, std::move(split));
        grow(l, begin, mid);
        grow(r, mid, end);
    }

    const BinaryProblem& problem_;
    std::vector<TreeSample> samples_;
    std::vector<TreeSample> scratch_;
    TreeParams params_;
    FeatureSampler sampler_;
    WeightedTree tree_;
    std::vector<bool> node_pure_;
    double min_decrease_ = 0.0;
    std::uint32_t splits_ = 0;

    std::vector<double> pos_, neg_;
    std::vector<std::pair<double, Code>> order_;
    std::vector<std::size_t> features_;
};

}  // namespace

WeightedTree grow_depth_first(const BinaryProblem& problem, std::vector<TreeSample> samples,
                              const TreeParams& params, FeatureSampler sampler) {
    return Grower(problem, std::move(samples), params, sampler).depth_first();
}

WeightedTree grow_best_first(const BinaryProblem& problem, std::vector<TreeSample> samples,
                             const TreeParams& params, std::uint32_t max_leaves, FeatureSampler sampler) {
    return Grower(problem, std::move(samples), params, sampler).best_first(max_leaves);
}

WeightedTree fit_weighted_tree(const BinaryProblem& problem, std::span<const std::size_t> indices,
                               std::span<const double> weights, const TreeParams& params,
                               FeatureSampler sampler) {
    if (indices.size() != weights.size()) throw DatasetError("indices and weights differ in length");
    std::vector<TreeSample> samples;
    samples.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (weights[i] < 0) throw DatasetError("negative sample weight");
        samples.push_back({static_cast<std::uint32_t>(indices[i]), 1, weights[i]});
    }
    return grow_depth_first(problem, std::move(samples), params, sampler);
}

}  // namespace assetowner
