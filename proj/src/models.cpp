#include "assetowner/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_in_parallel() { return 0; }
#endif

namespace assetowner {

std::string_view to_string(Family f) {
    switch (f) {
        case Family::adaboost: return "adaboost";
        case Family::logistic: return "logistic";
        case Family::naive_bayes: return "naive_bayes";
        case Family::cart: return "cart";
        case Family::random_forest: return "random_forest";
    }
    return "?";
}

Family family_from_string(std::string_view name) {
    for (Family f : kAllFamilies)
        if (to_string(f) == name) return f;
    throw ModelError("unknown model family '" + std::string(name) + "'");
}

Family family_of(const HyperParams& params) { return static_cast<Family>(params.index()); }

HyperParams FittedModel::params() const {
    return std::visit([](const auto& m) -> HyperParams { return m.params; }, model);
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z)
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

Prediction from_score(double score) { return {score >= 0.5, score}; }

void require_both_classes(const BinaryProblem& problem, std::span<const std::size_t> rows, std::string_view who) {
    bool pos = false, neg = false;
    for (auto i : rows) (problem.labels[i] ? pos : neg) = true;
    if (!pos || !neg) {
        throw ModelError(std::string(who) + ": training rows must contain both classes");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Adaboost

Prediction AdaboostModel::predict(std::span<const Code> row) const {
    double margin = 0.0, total = 0.0;
    for (std::size_t m = 0; m < trees.size(); ++m) {
        margin += alphas[m] * (trees[m].route(row).label ? 1.0 : -1.0);
        total += alphas[m];
    }
    const double normalized = total > 0 ? margin / total : 0.0;
    return from_score(1.0 / (1.0 + std::exp(-2.0 * normalized)));
}

namespace {

double boosting_alpha(double shrinkage, double error) {
    if (error >= 0.5) return 0.0;
    return shrinkage * std::log((1.0 - error) / error);
}

}  // namespace

AdaboostModel AdaboostModel::with_shrinkage(double shrinkage) const {
    AdaboostModel out = *this;
    out.params.shrinkage = shrinkage;
    for (std::size_t m = 0; m < alphas.size(); ++m) out.alphas[m] = boosting_alpha(shrinkage, round_errors[m]);
    return out;
}

AdaboostModel fit_adaboost(const BinaryProblem& problem, std::span<const std::size_t> train,
                           const AdaboostParams& params, AdaboostTrace* trace) {
    require_both_classes(problem, train, "adaboost");
    if (!(params.shrinkage > 0)) throw ModelError("adaboost: shrinkage must be positive");
    if (params.rounds == 0 || params.depth == 0) throw ModelError("adaboost: rounds and depth must be >= 1");

    const std::size_t n = train.size();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    std::vector<double> margin(n, 0.0);
    std::vector<std::uint8_t> wrong(n, 0);
    const TreeParams tree_params{params.depth, 2, 0.0};

    AdaboostModel model;
    model.params = params;
    for (std::uint32_t m = 0; m < params.rounds; ++m) {
        std::vector<TreeSample> samples(n);
        for (std::size_t i = 0; i < n; ++i) samples[i] = {static_cast<std::uint32_t>(train[i]), 1, w[i]};
        WeightedTree tree = grow_depth_first(problem, std::move(samples), tree_params);

        double error = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool predicted = tree.route(problem.row(train[i])).label;
            wrong[i] = predicted != (problem.labels[train[i]] != 0);
            if (wrong[i]) error += w[i];
        }
        if (error >= 0.5 && !model.trees.empty()) break;

        const bool perfect = error < 1e-10;
        if (perfect) error = 1e-10;
        const double alpha = boosting_alpha(params.shrinkage, error);
        std::size_t mistakes = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool predicted = wrong[i] ? !problem.labels[train[i]] : problem.labels[train[i]] != 0;
            margin[i] += alpha * (predicted ? 1.0 : -1.0);
            mistakes += (margin[i] >= 0) != (problem.labels[train[i]] != 0);
        }
        model.trees.push_back(std::move(tree));
        model.alphas.push_back(alpha);
        model.round_errors.push_back(error);
        if (trace) trace->training_errors.push_back(static_cast<double>(mistakes) / static_cast<double>(n));
        if (perfect || error >= 0.5) break;

        // exp(alpha / shrinkage) on the misclassified rows, then renormalize.
        const double factor = (1.0 - error) / error;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (wrong[i]) w[i] *= factor;
            sum += w[i];
        }
        for (auto& x : w) x /= sum;
        if (trace) trace->weight_sums.push_back(std::accumulate(w.begin(), w.end(), 0.0));
    }
    return model;
}

// ---------------------------------------------------------------------------
// logistic regression

LogisticObjective::LogisticObjective(const BinaryProblem& problem, std::span<const std::size_t> rows,
                                     double lambda)
    : problem_(problem), rows_(rows.begin(), rows.end()), lambda_(lambda) {
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        offset_[f] = dim_;
        dim_ += problem.vocab_size(f);
    }
}

double LogisticObjective::margin(std::span<const double> theta, std::size_t row) const {
    const auto codes = problem_.row(row);
    double z = theta[0];
    for (std::size_t f = 0; f < kFeatureCount; ++f) z += theta[offset_[f] + codes[f]];
    return z;
}

double LogisticObjective::value(std::span<const double> theta) const {
    double loss = 0.0;
    for (auto r : rows_) {
        const double z = margin(theta, r);
        loss += softplus(z) - (problem_.labels[r] ? z : 0.0);
    }
    double ridge = 0.0;
    for (std::size_t j = 1; j < dim_; ++j) ridge += theta[j] * theta[j];
    return loss + 0.5 * lambda_ * ridge;
}

void LogisticObjective::gradient(std::span<const double> theta, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (auto r : rows_) {
        const double residual = sigmoid(margin(theta, r)) - (problem_.labels[r] ? 1.0 : 0.0);
        const auto codes = problem_.row(r);
        out[0] += residual;
        for (std::size_t f = 0; f < kFeatureCount; ++f) out[offset_[f] + codes[f]] += residual;
    }
    for (std::size_t j = 1; j < dim_; ++j) out[j] += lambda_ * theta[j];
}

Prediction LogisticModel::predict(std::span<const Code> row) const {
    double z = intercept;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        if (row[f] < weights[f].size()) z += weights[f][row[f]];
    return from_score(sigmoid(z));
}

LogisticModel fit_logistic(const BinaryProblem& problem, std::span<const std::size_t> train,
                           const LogisticParams& params) {
    require_both_classes(problem, train, "logistic");
    if (!(params.lambda > 0)) throw ModelError("logistic: ridge strength must be positive");

    const LogisticObjective objective(problem, train, params.lambda);
    const std::size_t dim = objective.dimension();
    const auto& offset = objective.offset_;

    std::vector<double> theta(dim, 0.0);
    {
        double pos = 0;
        for (auto r : train) pos += problem.labels[r];
        theta[0] = std::log(pos / (static_cast<double>(train.size()) - pos));
    }
    std::vector<double> grad(dim), trial(dim);
    Eigen::MatrixXd hessian(dim, dim);
    Eigen::VectorXd g(dim);
    std::array<std::size_t, kFeatureCount + 1> active{};

    LogisticModel model;
    model.params = params;
    double value = objective.value(theta);
    std::uint32_t it = 0;
    while (true) {
        objective.gradient(theta, grad);
        double norm = 0.0;
        for (double x : grad) norm = std::max(norm, std::abs(x));
        model.gradient_norm = norm;
        if (norm <= params.tolerance || it >= params.max_iterations) break;
        ++it;

        // Lower triangle of the Hessian; active indices ascend with feature order.
        hessian.setZero();
        for (auto r : train) {
            const double p = sigmoid(objective.margin(theta, r));
            const double s = p * (1.0 - p);
            const auto codes = problem.row(r);
            active[0] = 0;
            for (std::size_t f = 0; f < kFeatureCount; ++f) active[f + 1] = offset[f] + codes[f];
            for (std::size_t a = 0; a < active.size(); ++a)
                for (std::size_t b = a; b < active.size(); ++b) hessian(active[b], active[a]) += s;
        }
        for (std::size_t j = 1; j < dim; ++j) hessian(j, j) += params.lambda;
        for (std::size_t j = 0; j < dim; ++j) g[j] = -grad[j];
        const Eigen::VectorXd step = hessian.selfadjointView<Eigen::Lower>().ldlt().solve(g);

        double slope = 0.0;
        for (std::size_t j = 0; j < dim; ++j) slope += grad[j] * step[j];
        double t = 1.0;
        double next = value;
        while (true) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = theta[j] + t * step[j];
            next = objective.value(trial);
            if (next <= value + 1e-4 * t * slope || t < 1e-12) break;
            t *= 0.5;
        }
        if (!(next <= value) && t < 1e-12) break;  // no descent left at machine precision
        theta.swap(trial);
        value = next;
    }
    model.iterations = it;
    model.intercept = theta[0];
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        model.weights[f].assign(theta.begin() + static_cast<std::ptrdiff_t>(offset[f]),
                                theta.begin() + static_cast<std::ptrdiff_t>(offset[f] + problem.vocab_size(f)));
    }
    return model;
}

// ---------------------------------------------------------------------------
// naive Bayes

double NaiveBayesModel::prior(bool positive) const {
    return class_counts[positive ? 1 : 0] / (class_counts[0] + class_counts[1]);
}

double NaiveBayesModel::likelihood(std::size_t f, Code v, bool positive) const {
    const std::size_t c = positive ? 1 : 0;
    const double k = static_cast<double>(vocab_sizes[f]);
    return (counts[f][c * vocab_sizes[f] + v] + params.laplace) / (class_counts[c] + params.laplace * k);
}

Prediction NaiveBayesModel::predict(std::span<const Code> row) const {
    double pos = prior(true);
    double neg = prior(false);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const Code v = row[f];
        if (v >= vocab_sizes[f]) continue;
        if (counts[f][v] + counts[f][vocab_sizes[f] + v] == 0) continue;  // unseen in training: neutral
        pos *= likelihood(f, v, true);
        neg *= likelihood(f, v, false);
    }
    if (pos + neg == 0.0) return from_score(prior(true));
    return from_score(pos / (pos + neg));
}

NaiveBayesModel fit_naive_bayes(const BinaryProblem& problem, std::span<const std::size_t> train,
                                const NaiveBayesParams& params) {
    if (!(params.laplace >= 0)) throw ModelError("naive_bayes: laplace must be >= 0");
    require_both_classes(problem, train, "naive_bayes");
    NaiveBayesModel m;
    m.params = params;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        m.vocab_sizes[f] = problem.vocab_size(f);
        m.counts[f].assign(2 * m.vocab_sizes[f], 0.0);
    }
    for (auto r : train) {
        const std::size_t c = problem.labels[r] ? 1 : 0;
        m.class_counts[c] += 1;
        const auto codes = problem.row(r);
        for (std::size_t f = 0; f < kFeatureCount; ++f) m.counts[f][c * m.vocab_sizes[f] + codes[f]] += 1;
    }
    return m;
}

// ---------------------------------------------------------------------------
// CART

Prediction CartModel::predict(std::span<const Code> row) const {
    return from_score(tree.route(row).positive_fraction);
}

CartModel fit_cart(const BinaryProblem& problem, std::span<const std::size_t> train, const CartParams& params) {
    require_both_classes(problem, train, "cart");
    std::vector<TreeSample> samples;
    samples.reserve(train.size());
    for (auto i : train) samples.push_back({static_cast<std::uint32_t>(i), 1, 1.0});
    CartModel m;
    m.params = params;
    m.tree = grow_depth_first(problem, std::move(samples), TreeParams{params.maxdepth, params.minsplit, params.cp});
    return m;
}

// ---------------------------------------------------------------------------
// random forest

std::size_t ForestModel::positive_votes(std::span<const Code> row) const {
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.route(row).label ? 1 : 0;
    return votes;
}

Prediction ForestModel::predict(std::span<const Code> row) const {
    return from_score(static_cast<double>(positive_votes(row)) / static_cast<double>(trees.size()));
}

WeightedTree fit_forest_tree(const BinaryProblem& problem, std::span<const std::size_t> train, std::uint32_t mtry,
                             std::uint32_t max_leaves, std::uint64_t seed, std::uint32_t index) {
    Rng rng(derive_seed(seed, {index}));
    const std::size_t n = train.size();
    std::vector<std::uint32_t> drawn(n, 0);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) ++drawn[pick(rng)];
    std::vector<TreeSample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (drawn[i] > 0) samples.push_back({static_cast<std::uint32_t>(train[i]), drawn[i], double(drawn[i])});
    const TreeParams params{std::numeric_limits<std::uint32_t>::max(), 2, 0.0};
    return grow_best_first(problem, std::move(samples), params, max_leaves, FeatureSampler(mtry, &rng));
}

ForestModel fit_random_forest(const BinaryProblem& problem, std::span<const std::size_t> train,
                              const ForestParams& params, std::uint64_t seed) {
    if (params.mtry == 0 || params.mtry > kFeatureCount) {
        throw ModelError("random_forest: mtry must be in 1.." + std::to_string(kFeatureCount));
    }
    if (params.ntree == 0 || params.maxnodes == 0) throw ModelError("random_forest: ntree and maxnodes must be >= 1");
    require_both_classes(problem, train, "random_forest");

    ForestModel m;
    m.params = params;
    m.seed = seed;
    m.trees.resize(params.ntree);
    const auto ntree = static_cast<std::int64_t>(params.ntree);
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
    for (std::int64_t t = 0; t < ntree; ++t) {
        m.trees[t] = fit_forest_tree(problem, train, params.mtry, params.maxnodes, seed, static_cast<std::uint32_t>(t));
    }
    for (const auto& t : m.trees) {
        const auto imp = t.importance();
        for (std::size_t f = 0; f < kFeatureCount; ++f) m.impurity_decrease[f] += imp[f];
    }
    return m;
}

// ---------------------------------------------------------------------------
// dispatch

FittedModel fit_model(const BinaryProblem& problem, std::span<const std::size_t> train, const HyperParams& params,
                      std::uint64_t seed) {
    FittedModel out;
    out.vocabulary = problem.table->vocabularies();
    out.model = std::visit(
        [&](const auto& p) -> ModelVariant {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, AdaboostParams>) return fit_adaboost(problem, train, p);
            else if constexpr (std::is_same_v<P, LogisticParams>) return fit_logistic(problem, train, p);
            else if constexpr (std::is_same_v<P, NaiveBayesParams>) return fit_naive_bayes(problem, train, p);
            else if constexpr (std::is_same_v<P, CartParams>) return fit_cart(problem, train, p);
            else return fit_random_forest(problem, train, p, seed);
        },
        params);
    return out;
}

Prediction predict(const FittedModel& model, std::span<const Code> row) {
    return std::visit([&](const auto& m) { return m.predict(row); }, model.model);
}

FeatureImportance normalize_importance(FeatureImportance raw) {
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (total > 0)
        for (auto& x : raw) x /= total;
    return raw;
}

FeatureImportance feature_importance(const FittedModel& model) {
    FeatureImportance raw{};
    if (const auto* a = std::get_if<AdaboostModel>(&model.model)) {
        for (const auto& t : a->trees) {
            const auto imp = t.importance();
            for (std::size_t f = 0; f < kFeatureCount; ++f) raw[f] += imp[f];
        }
    } else if (const auto* c = std::get_if<CartModel>(&model.model)) {
        raw = c->tree.importance();
    } else if (const auto* r = std::get_if<ForestModel>(&model.model)) {
        raw = r->impurity_decrease;
    } else {
        throw ModelError("feature importance is not defined for " + std::string(to_string(model.family())));
    }
    return normalize_importance(raw);
}

}  // namespace assetowner
