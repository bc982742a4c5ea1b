#include "assetowner/evaluation.hpp"

#include <algorithm>
#include <exception>
#include <map>

#include "assetowner/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_in_parallel() { return 0; }
#endif

namespace assetowner {

ConfusionMatrix confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> actual) {
    if (predicted.size() != actual.size()) throw EvaluationError("confusion: predictions and actuals differ in length");
    if (predicted.empty()) throw EvaluationError("confusion: no rows");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0, a = actual[i] != 0;
        if (p && a) ++cm.tp;
        else if (p) ++cm.fp;
        else if (a) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

MetricSet metrics(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw EvaluationError("metrics of an empty confusion matrix");
    MetricSet m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
    m.error_rate = 1.0 - m.accuracy;
    m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    m.specificity = ratio(cm.tn, cm.tn + cm.fp);
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    if (m.precision && m.sensitivity && *m.precision + *m.sensitivity > 0) {
        m.f1 = 2.0 * *m.precision * *m.sensitivity / (*m.precision + *m.sensitivity);
    }
    return m;
}

double nearest_rank(std::span<const double> sorted, std::size_t num, std::size_t den) {
    if (sorted.empty()) throw EvaluationError("quantile of an empty sample");
    const std::size_t rank = (num * sorted.size() + den - 1) / den;
    return sorted[rank == 0 ? 0 : rank - 1];
}

ErrorSummary summarize_errors(std::vector<double> errors) {
    std::sort(errors.begin(), errors.end());
    return {nearest_rank(errors, 0, 4), nearest_rank(errors, 1, 4), nearest_rank(errors, 2, 4),
            nearest_rank(errors, 3, 4), nearest_rank(errors, 4, 4)};
}

// ---------------------------------------------------------------------------
// grids

std::vector<HyperParams> HyperGrid::tuples(Family f) const {
    std::vector<HyperParams> out;
    switch (f) {
        case Family::adaboost: out.assign(adaboost.begin(), adaboost.end()); break;
        case Family::logistic: out.emplace_back(LogisticParams{}); break;
        case Family::naive_bayes: out.assign(naive_bayes.begin(), naive_bayes.end()); break;
        case Family::cart: out.assign(cart.begin(), cart.end()); break;
        case Family::random_forest: out.assign(forest.begin(), forest.end()); break;
    }
    return out;
}

namespace {

HyperGrid base_grid(std::initializer_list<std::uint32_t> ntrees) {
    HyperGrid g;
    for (double shrinkage : {0.01, 0.05, 0.1})
        for (std::uint32_t depth : {2, 4, 6, 8}) g.adaboost.push_back({shrinkage, depth, 100});
    for (double laplace : {0.0, 1.0}) g.naive_bayes.push_back({laplace});
    for (double cp : {0.01, 0.05, 0.1})
        for (std::uint32_t minsplit : {5, 10, 15, 20})
            for (std::uint32_t maxdepth : {2, 5, 10, 20}) g.cart.push_back({cp, minsplit, maxdepth});
    for (std::uint32_t ntree : ntrees)
        for (std::uint32_t mtry : {2, 3, 4, 5})
            for (std::uint32_t maxnodes : {3, 5, 8, 10, 15}) g.forest.push_back({ntree, mtry, maxnodes});
    return g;
}

}  // namespace

HyperGrid HyperGrid::full() {
    auto g = base_grid({250, 500, 1000, 2000});
    g.profile = "full";
    return g;
}

HyperGrid HyperGrid::desk() {
    auto g = base_grid({100, 250});
    g.profile = "desk";
    return g;
}

std::uint64_t family_seed(std::uint64_t master_seed, std::size_t iteration, Family family) {
    return derive_seed(master_seed, {iteration, static_cast<std::uint64_t>(family)});
}

// ---------------------------------------------------------------------------
// grid search

namespace {

double cv_error_of(const BinaryProblem& problem, std::span<const std::size_t> cv, const auto& predict_label) {
    std::size_t wrong = 0;
    for (auto i : cv) wrong += predict_label(problem.row(i)) != (problem.labels[i] != 0);
    return static_cast<double>(wrong) / static_cast<double>(cv.size());
}

struct Candidate {
    double cv_error;
    std::size_t index;
};

// Keeps the earliest smallest error.
struct Best {
    std::optional<Candidate> best;
    bool offer(double error, std::size_t index) {
        if (best && !(error < best->cv_error)) return false;
        best = Candidate{error, index};
        return true;
    }
};

GridChoice exhaustive_search(const BinaryProblem& problem, const SplitPlan& plan, const std::vector<HyperParams>& grid,
                             std::uint64_t seed) {
    Best best;
    GridChoice out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        FittedModel m = fit_model(problem, plan.train, grid[i], seed);
        const double err = cv_error_of(problem, plan.cv, [&](auto row) { return predict(m, row).label; });
        if (best.offer(err, i)) {
            out.params = grid[i];
            out.index = i;
            out.cv_error = err;
            out.model = std::move(m);
        }
    }
    return out;
}

FittedModel wrap(const BinaryProblem& problem, ModelVariant m) {
    FittedModel f;
    f.model = std::move(m);
    f.vocabulary = problem.table->vocabularies();
    return f;
}

// The boosting path does not depend on shrinkage: reweighting multiplies by
// (1 - e) / e. One fit per (depth, rounds) covers every shrinkage.
GridChoice nested_adaboost(const BinaryProblem& problem, const SplitPlan& plan,
                           const std::vector<AdaboostParams>& grid) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, AdaboostModel> paths;
    Best best;
    GridChoice out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto key = std::make_pair(grid[i].depth, grid[i].rounds);
        auto it = paths.find(key);
        if (it == paths.end()) it = paths.emplace(key, fit_adaboost(problem, plan.train, grid[i])).first;
        AdaboostModel m = it->second.with_shrinkage(grid[i].shrinkage);
        m.params = grid[i];
        const double err = cv_error_of(problem, plan.cv, [&](auto row) { return m.predict(row).label; });
        if (best.offer(err, i)) {
            out.params = grid[i];
            out.index = i;
            out.cv_error = err;
            out.model = wrap(problem, std::move(m));
        }
    }
    return out;
}

// One maximal tree; every stricter tuple is a view of it.
GridChoice nested_cart(const BinaryProblem& problem, const SplitPlan& plan, const std::vector<CartParams>& grid) {
    CartParams loose = grid.front();
    for (const auto& p : grid) {
        loose.cp = std::min(loose.cp, p.cp);
        loose.minsplit = std::min(loose.minsplit, p.minsplit);
        loose.maxdepth = std::max(loose.maxdepth, p.maxdepth);
    }
    const CartModel grown = fit_cart(problem, plan.train, loose);
    Best best;
    GridChoice out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const TreeView view{grid[i].cp * grown.tree.root_impurity, grid[i].minsplit, grid[i].maxdepth};
        const double err = cv_error_of(problem, plan.cv, [&](auto row) {
            return grown.tree.route(row, view).positive_fraction >= 0.5;
        });
        if (best.offer(err, i)) {
            out.params = grid[i];
            out.index = i;
            out.cv_error = err;
        }
    }
    const auto& p = std::get<CartParams>(out.params);
    CartModel chosen;
    chosen.params = p;
    chosen.tree = grown.tree.truncated({p.cp * grown.tree.root_impurity, p.minsplit, p.maxdepth});
    out.model = wrap(problem, std::move(chosen));
    return out;
}

// Forests with the same seed are prefixes of one another and a tree grown
// best-first to k leaves is the first k - 1 splits of a larger one, so each
// mtry needs a single forest of the largest size.
GridChoice nested_forest(const BinaryProblem& problem, const SplitPlan& plan, const std::vector<ForestParams>& grid,
                         std::uint64_t seed) {
    std::map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> extent;  // mtry -> (ntree, maxnodes)
    for (const auto& p : grid) {
        if (p.mtry == 0 || p.mtry > kFeatureCount) {
            throw ModelError("random_forest: mtry must be in 1.." + std::to_string(kFeatureCount));
        }
        auto& e = extent[p.mtry];
        e.first = std::max(e.first, p.ntree);
        e.second = std::max(e.second, p.maxnodes);
    }
    const std::size_t ncv = plan.cv.size();
    std::vector<double> errors(grid.size());
    std::map<std::uint32_t, std::vector<WeightedTree>> forests;
    for (const auto& [mtry, e] : extent) {
        auto& trees = forests[mtry];
        trees.resize(e.first);
        const auto ntree = static_cast<std::int64_t>(e.first);
        const std::uint32_t mt = mtry, leaves = e.second;
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
        for (std::int64_t t = 0; t < ntree; ++t) {
            trees[t] = fit_forest_tree(problem, plan.train, mt, leaves, seed, static_cast<std::uint32_t>(t));
        }

        // Running positive-vote counts per maxnodes value, read at each ntree.
        std::vector<std::size_t> members;
        std::map<std::uint32_t, std::vector<std::uint32_t>> votes;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i].mtry != mtry) continue;
            members.push_back(i);
            votes[grid[i].maxnodes].assign(ncv, 0);
        }
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return grid[a].ntree < grid[b].ntree; });
        std::size_t next = 0;
        for (std::uint32_t t = 0; t < e.first && next < members.size(); ++t) {
            for (auto& [k, v] : votes) {
                const TreeView view{0.0, 0, std::numeric_limits<std::uint32_t>::max(), k - 1};
                for (std::size_t j = 0; j < ncv; ++j) v[j] += trees[t].route(problem.row(plan.cv[j]), view).label;
            }
            while (next < members.size() && grid[members[next]].ntree == t + 1) {
                const auto& p = grid[members[next]];
                const auto& v = votes[p.maxnodes];
                std::size_t wrong = 0;
                for (std::size_t j = 0; j < ncv; ++j) {
                    const bool label = static_cast<double>(v[j]) / static_cast<double>(p.ntree) >= 0.5;
                    wrong += label != (problem.labels[plan.cv[j]] != 0);
                }
                errors[members[next]] = static_cast<double>(wrong) / static_cast<double>(ncv);
                ++next;
            }
        }
    }

    Best best;
    GridChoice out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (best.offer(errors[i], i)) {
            out.params = grid[i];
            out.index = i;
            out.cv_error = errors[i];
        }
    }
    const auto& p = std::get<ForestParams>(out.params);
    const auto& trees = forests[p.mtry];
    ForestModel chosen;
    chosen.params = p;
    chosen.seed = seed;
    const TreeView view{0.0, 0, std::numeric_limits<std::uint32_t>::max(), p.maxnodes - 1};
    for (std::uint32_t t = 0; t < p.ntree; ++t) {
        chosen.trees.push_back(trees[t].truncated(view));
        const auto imp = chosen.trees.back().importance();
        for (std::size_t f = 0; f < kFeatureCount; ++f) chosen.impurity_decrease[f] += imp[f];
    }
    out.model = wrap(problem, std::move(chosen));
    return out;
}

template <class P>
std::vector<P> unwrap(const std::vector<HyperParams>& grid) {
    std::vector<P> out;
    for (const auto& g : grid) out.push_back(std::get<P>(g));
    return out;
}

}  // namespace

GridChoice grid_search(const BinaryProblem& problem, const SplitPlan& plan, Family family, const HyperGrid& grid,
                       std::uint64_t seed, GridStrategy strategy) {
    const auto tuples = grid.tuples(family);
    if (tuples.empty()) throw EvaluationError("empty hyperparameter grid for " + std::string(to_string(family)));
    if (plan.cv.empty()) throw EvaluationError("grid search needs a non-empty cv slice");
    if (strategy == GridStrategy::exhaustive || tuples.size() == 1) {
        return exhaustive_search(problem, plan, tuples, seed);
    }
    switch (family) {
        case Family::adaboost: return nested_adaboost(problem, plan, unwrap<AdaboostParams>(tuples));
        case Family::cart: return nested_cart(problem, plan, unwrap<CartParams>(tuples));
        case Family::random_forest: return nested_forest(problem, plan, unwrap<ForestParams>(tuples), seed);
        default: return exhaustive_search(problem, plan, tuples, seed);
    }
}

// ---------------------------------------------------------------------------
// MCCV

const FamilyReport& RunReport::family(Family f) const {
    for (const auto& r : families)
        if (r.family == f) return r;
    throw EvaluationError("family " + std::string(to_string(f)) + " not in report");
}

namespace {

bool has_tree_importance(Family f) {
    return f == Family::adaboost || f == Family::cart || f == Family::random_forest;
}

struct IterationOutput {
    std::vector<IterationResult> results;            // per family
    std::vector<std::vector<std::uint8_t>> labels;   // per family, per test row
    std::vector<std::size_t> test;
};

IterationOutput run_iteration(const BinaryProblem& problem, const EvaluationConfig& config,
                              const std::vector<Family>& families, std::size_t iteration) {
    IterationOutput out;
    SplitPlan plan = mccv_split(problem.size(), iteration, config.master_seed, problem.labels);
    for (const auto* part : {&plan.cv, &plan.test}) {
        std::size_t pos = 0;
        for (auto i : *part) pos += problem.labels[i];
        if (pos == 0 || pos == part->size()) {
            throw EvaluationError("iteration " + std::to_string(iteration) + ": " +
                                  (part == &plan.cv ? "cv" : "test") + " slice holds a single class (" +
                                  std::to_string(pos) + " positives of " + std::to_string(part->size()) + ")");
        }
    }
    std::vector<std::uint8_t> actual;
    for (auto i : plan.test) actual.push_back(problem.labels[i]);

    for (Family f : families) {
        const auto seed = family_seed(config.master_seed, iteration, f);
        GridChoice choice = grid_search(problem, plan, f, config.grid, seed, config.strategy);
        std::vector<std::uint8_t> predicted;
        predicted.reserve(plan.test.size());
        for (auto i : plan.test) predicted.push_back(predict(choice.model, problem.row(i)).label ? 1 : 0);

        IterationResult r;
        r.iteration = iteration;
        r.params = choice.params;
        r.cv_error = choice.cv_error;
        r.test = confusion(predicted, actual);
        r.test_error = metrics(r.test).error_rate;
        if (has_tree_importance(f)) r.importance = feature_importance(choice.model);
        out.results.push_back(std::move(r));
        out.labels.push_back(std::move(predicted));
    }
    out.test = std::move(plan.test);
    return out;
}

}  // namespace

RunReport run_mccv(const BinaryProblem& problem, const EvaluationConfig& config) {
    if (config.iterations == 0) throw EvaluationError("iterations must be >= 1");
    std::vector<Family> families = config.families;
    std::sort(families.begin(), families.end());
    families.erase(std::unique(families.begin(), families.end()), families.end());
    if (families.empty()) throw EvaluationError("no model families selected");

    const auto n_iter = static_cast<std::int64_t>(config.iterations);
    std::vector<IterationOutput> outputs(config.iterations);
    std::vector<std::exception_ptr> failures(config.iterations);
#pragma omp parallel for schedule(dynamic) if (config.parallel)
    for (std::int64_t i = 0; i < n_iter; ++i) {
        try {
            outputs[i] = run_iteration(problem, config, families, static_cast<std::size_t>(i));
        } catch (...) {
            failures[i] = std::current_exception();
        }
    }
    for (const auto& e : failures)
        if (e) std::rethrow_exception(e);

    RunReport report;
    report.owner = problem.target_owner;
    report.master_seed = config.master_seed;
    report.iterations = config.iterations;
    report.grid_profile = config.grid.profile;
    report.labeled_rows = problem.size();
    report.positives = problem.positives();

    for (std::size_t k = 0; k < families.size(); ++k) {
        FamilyReport fr;
        fr.family = families[k];
        std::vector<double> errors;
        FeatureImportance importance_sum{};
        std::array<double, 4> metric_sum{};
        for (const auto& out : outputs) {
            const auto& r = out.results[k];
            fr.aggregate += r.test;
            errors.push_back(r.test_error);
            const auto m = metrics(r.test);
            const std::array<std::optional<double>, 4> values = {m.sensitivity, m.specificity, m.precision, m.f1};
            for (std::size_t j = 0; j < 4; ++j) {
                if (values[j]) metric_sum[j] += *values[j];
                else ++fr.iteration_means[j].undefined;
            }
            if (r.importance)
                for (std::size_t f = 0; f < kFeatureCount; ++f) importance_sum[f] += (*r.importance)[f];
            fr.iterations.push_back(r);
        }
        for (std::size_t j = 0; j < 4; ++j) {
            const std::size_t defined = config.iterations - fr.iteration_means[j].undefined;
            if (defined > 0) fr.iteration_means[j].mean = metric_sum[j] / static_cast<double>(defined);
        }
        fr.metrics = metrics(fr.aggregate);
        fr.errors = summarize_errors(std::move(errors));
        if (has_tree_importance(fr.family)) {
            for (auto& x : importance_sum) x /= static_cast<double>(config.iterations);
            fr.mean_importance = importance_sum;
        }
        report.families.push_back(std::move(fr));
    }

    for (const auto& out : outputs) {
        for (std::size_t j = 0; j < out.test.size(); ++j) {
            PredictionRow row;
            row.iteration = static_cast<std::uint32_t>(out.results.front().iteration);
            row.row = static_cast<std::uint32_t>(problem.table_rows[out.test[j]]);
            row.actual = problem.labels[out.test[j]] != 0;
            for (const auto& labels : out.labels) row.labels.push_back(labels[j]);
            report.predictions.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace assetowner
