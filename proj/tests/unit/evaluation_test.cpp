#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "assetowner/evaluation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace assetowner;
using testing_support::all_rows;
using testing_support::coded_row;

namespace {

std::vector<std::uint8_t> bits(std::initializer_list<int> xs) { return {xs.begin(), xs.end()}; }

// Small grid so MCCV tests stay quick.
HyperGrid tiny_grid() {
    HyperGrid g;
    g.profile = "tiny";
    g.adaboost = {{0.05, 2, 20}, {0.1, 2, 20}};
    g.naive_bayes = {{0.0}, {1.0}};
    g.cart = {{0.01, 5, 5}, {0.05, 10, 10}};
    g.forest = {{10, 2, 5}, {20, 3, 8}};
    return g;
}

const BinaryProblem& bench_problem(const std::string& owner) {
    static std::map<std::string, BinaryProblem> cache;
    auto it = cache.find(owner);
    if (it == cache.end()) it = cache.emplace(owner, make_binary_problem(testing_support::benchmark().table, owner)).first;
    return it->second;
}

}  // namespace

TEST(Confusion, Examples) {
    EXPECT_EQ(confusion(bits({1, 1, 1}), bits({1, 1, 1})), (ConfusionMatrix{3, 0, 0, 0}));
    EXPECT_EQ(confusion(bits({1}), bits({0})), (ConfusionMatrix{0, 1, 0, 0}));
    EXPECT_THROW(confusion(bits({1}), bits({1, 0})), EvaluationError);
    EXPECT_THROW(confusion(bits({}), bits({})), EvaluationError);
}

TEST(Metrics, WorkedExample) {
    const auto m = metrics({50, 5, 35, 10});
    EXPECT_NEAR(m.accuracy, 0.85, 5e-5);
    EXPECT_NEAR(*m.sensitivity, 0.8333, 5e-5);
    EXPECT_NEAR(*m.specificity, 0.875, 5e-5);
    EXPECT_NEAR(*m.precision, 0.9091, 5e-5);
    EXPECT_NEAR(*m.f1, 0.8696, 5e-5);
}

TEST(Metrics, UndefinedRatios) {
    const auto m = metrics({0, 0, 10, 0});
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_FALSE(m.sensitivity);
    EXPECT_EQ(m.specificity, 1.0);
    EXPECT_FALSE(m.precision);
    EXPECT_FALSE(m.f1);
    EXPECT_THROW(metrics({}), EvaluationError);
}

TEST(Metrics, Perfect) {
    const auto m = metrics({7, 0, 3, 0});
    EXPECT_EQ(m.error_rate, 0.0);
    EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, CountingOracle) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 60;
        const double bias = std::uniform_real_distribution<double>(0, 1)(rng);
        std::vector<std::uint8_t> pred(n), actual(n);
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] = std::bernoulli_distribution(bias)(rng);
            actual[i] = std::bernoulli_distribution(1 - bias)(rng);
        }
        const auto c = oracles::count(pred, actual);
        const auto cm = confusion(pred, actual);
        ASSERT_EQ(cm, (ConfusionMatrix{c.tp, c.fp, c.tn, c.fn}));
        EXPECT_EQ(cm.total(), n);
        const auto m = metrics(cm);
        EXPECT_EQ(m.accuracy, double(c.tp + c.tn) / double(n));
        EXPECT_EQ(m.accuracy + m.error_rate, 1.0);
        EXPECT_EQ(m.sensitivity, oracles::div(c.tp, c.tp + c.fn));
        EXPECT_EQ(m.specificity, oracles::div(c.tn, c.tn + c.fp));
        EXPECT_EQ(m.precision, oracles::div(c.tp, c.tp + c.fp));
        const auto p = oracles::div(c.tp, c.tp + c.fp), s = oracles::div(c.tp, c.tp + c.fn);
        std::optional<double> f1;
        if (p && s && *p + *s > 0) f1 = 2 * *p * *s / (*p + *s);
        EXPECT_EQ(m.f1, f1);
    }
}

TEST(Quantiles, NearestRankOracle) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> xs(1 + rng() % 120);
        for (auto& x : xs) x = double(rng() % 50) / 100.0;
        const auto s = summarize_errors(xs);
        EXPECT_EQ(s.min, *std::min_element(xs.begin(), xs.end()));
        EXPECT_EQ(s.max, *std::max_element(xs.begin(), xs.end()));
        EXPECT_EQ(s.q1, oracles::nearest_rank(xs, 0.25));
        EXPECT_EQ(s.median, oracles::nearest_rank(xs, 0.5));
        EXPECT_EQ(s.q3, oracles::nearest_rank(xs, 0.75));
    }
    const std::vector<double> four = {0.1, 0.2, 0.3, 0.4};
    EXPECT_EQ(nearest_rank(four, 1, 2), 0.2);
    EXPECT_EQ(nearest_rank(four, 3, 4), 0.3);
}

TEST(Grids, ProductSizesAndOrder) {
    const auto full = HyperGrid::full(), desk = HyperGrid::desk();
    EXPECT_EQ(full.adaboost.size(), 12u);
    EXPECT_EQ(full.naive_bayes.size(), 2u);
    EXPECT_EQ(full.cart.size(), 48u);
    EXPECT_EQ(full.forest.size(), 80u);
    EXPECT_EQ(desk.forest.size(), 40u);
    EXPECT_EQ(full.tuples(Family::logistic).size(), 1u);
    // Textual enumeration order: first factor slowest.
    EXPECT_EQ(full.adaboost[0], (AdaboostParams{0.01, 2, 100}));
    EXPECT_EQ(full.adaboost[1], (AdaboostParams{0.01, 4, 100}));
    EXPECT_EQ(full.cart[1], (CartParams{0.01, 5, 5}));
    EXPECT_EQ(full.forest.back(), (ForestParams{2000, 5, 15}));
}

namespace {

struct Owned {
    std::shared_ptr<CategoricalTable> table;
    BinaryProblem problem;
};

// Label = (f0 == 0), one positive in four.
Owned separable() {
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 200; ++i) rows.push_back(coded_row({i % 4, i % 3}, i % 4 == 0 ? "a" : "b"));
    Owned o;
    o.table = std::make_shared<CategoricalTable>(build_table(rows));
    o.problem = make_binary_problem(*o.table, "a", 1);
    return o;
}

}  // namespace

TEST(GridSearch, SingletonArgminTie) {
    const auto o = separable();
    const auto plan = mccv_split(o.problem.size(), 0, 1, o.problem.labels);
    for (auto strategy : {GridStrategy::nested, GridStrategy::exhaustive}) {
        HyperGrid g;
        g.cart = {{0.5, 5, 5}};
        auto c = grid_search(o.problem, plan, Family::cart, g, 0, strategy);
        EXPECT_EQ(c.index, 0u);

        // The first tuple cannot split (minsplit above n), the second separates.
        g.cart = {{0.0, 1000, 5}, {0.0, 5, 5}};
        c = grid_search(o.problem, plan, Family::cart, g, 0, strategy);
        EXPECT_EQ(c.index, 1u);
        EXPECT_EQ(c.cv_error, 0.0);

        g.cart = {{0.0, 5, 5}, {0.0, 5, 5}};
        c = grid_search(o.problem, plan, Family::cart, g, 0, strategy);
        EXPECT_EQ(c.index, 0u);

        g.naive_bayes = {{0.0}, {1.0}};  // both separate perfectly
        c = grid_search(o.problem, plan, Family::naive_bayes, g, 0, strategy);
        EXPECT_EQ(c.index, 0u);
    }
}

TEST(GridSearch, LogisticUsesFixedConfiguration) {
    const auto o = separable();
    const auto plan = mccv_split(o.problem.size(), 0, 1, o.problem.labels);
    const auto c = grid_search(o.problem, plan, Family::logistic, HyperGrid{}, 0);
    EXPECT_EQ(c.params, HyperParams{LogisticParams{}});
}

TEST(GridSearch, NestedEqualsExhaustive) {
    HyperGrid g = HyperGrid::full();
    g.forest.clear();
    for (std::uint32_t ntree : {5u, 20u})
        for (std::uint32_t mtry : {2u, 3u})
            for (std::uint32_t maxnodes : {3u, 8u, 15u}) g.forest.push_back({ntree, mtry, maxnodes});
    for (const std::string owner : {"platform", "storage"}) {
        const auto& p = bench_problem(owner);
        for (std::size_t it = 0; it < 2; ++it) {
            const auto plan = mccv_split(p.size(), it, 5, p.labels);
            for (Family f : {Family::adaboost, Family::cart, Family::random_forest}) {
                const auto seed = family_seed(5, it, f);
                const auto a = grid_search(p, plan, f, g, seed, GridStrategy::nested);
                const auto b = grid_search(p, plan, f, g, seed, GridStrategy::exhaustive);
                EXPECT_EQ(a.index, b.index) << owner << ' ' << to_string(f);
                EXPECT_EQ(a.params, b.params);
                EXPECT_EQ(a.cv_error, b.cv_error);
                EXPECT_TRUE(a.model == b.model) << owner << ' ' << to_string(f);
            }
        }
    }
}

TEST(GridSearch, ExhaustiveErrorsMatchRefits) {
    // Every tuple's cv error under the nested reading equals a fresh fit.
    const auto& p = bench_problem("security");
    const auto plan = mccv_split(p.size(), 3, 8, p.labels);
    const auto g = HyperGrid::full();
    const auto tuples = g.tuples(Family::cart);
    const auto choice = grid_search(p, plan, Family::cart, g, 0);
    double best = 1.0;
    for (const auto& t : tuples) {
        const auto m = fit_model(p, plan.train, t, 0);
        std::size_t wrong = 0;
        for (auto i : plan.cv) wrong += predict(m, p.row(i)).label != (p.labels[i] != 0);
        best = std::min(best, double(wrong) / double(plan.cv.size()));
    }
    EXPECT_EQ(choice.cv_error, best);
}

TEST(RunMccv, ReportInvariants) {
    const auto& p = bench_problem("end-user-compute");
    EvaluationConfig config;
    config.grid = tiny_grid();
    config.iterations = 6;
    config.master_seed = 77;
    const auto r = run_mccv(p, config);
    EXPECT_EQ(r.owner, "end-user-compute");
    EXPECT_EQ(r.iterations, 6u);
    EXPECT_EQ(r.grid_profile, "tiny");
    EXPECT_EQ(r.labeled_rows, p.size());
    ASSERT_EQ(r.families.size(), kAllFamilies.size());
    const std::size_t test_rows = split_sizes(p.size()).test;
    EXPECT_EQ(r.predictions.size(), 6 * test_rows);
    for (std::size_t k = 0; k < r.families.size(); ++k) {
        const auto& fr = r.families[k];
        EXPECT_EQ(fr.family, kAllFamilies[k]);
        ASSERT_EQ(fr.iterations.size(), 6u);
        ConfusionMatrix sum;
        std::vector<double> errors;
        FeatureImportance imp{};
        for (std::size_t i = 0; i < 6; ++i) {
            const auto& it = fr.iterations[i];
            EXPECT_EQ(it.iteration, i);
            EXPECT_EQ(it.test.total(), test_rows);
            EXPECT_EQ(it.test_error, 1.0 - metrics(it.test).accuracy);
            sum += it.test;
            errors.push_back(it.test_error);
            if (it.importance)
                for (std::size_t f = 0; f < kFeatureCount; ++f) imp[f] += (*it.importance)[f];
            // Recorded predictions agree with the confusion matrix.
            std::vector<std::uint8_t> pred, act;
            for (const auto& row : r.predictions)
                if (row.iteration == i) {
                    pred.push_back(row.labels[k]);
                    act.push_back(row.actual);
                }
            EXPECT_EQ(confusion(pred, act), it.test);
        }
        EXPECT_EQ(fr.aggregate, sum);
        EXPECT_EQ(fr.metrics, metrics(sum));
        EXPECT_EQ(fr.errors.median, oracles::nearest_rank(errors, 0.5));
        EXPECT_EQ(fr.errors.q3, oracles::nearest_rank(errors, 0.75));
        const bool trees = fr.family == Family::adaboost || fr.family == Family::cart ||
                           fr.family == Family::random_forest;
        EXPECT_EQ(fr.mean_importance.has_value(), trees);
        if (trees)
            for (std::size_t f = 0; f < kFeatureCount; ++f) EXPECT_EQ((*fr.mean_importance)[f], imp[f] / 6.0);
    }
}

TEST(RunMccv, FamilyOrderAndScheduleInvariance) {
    const auto& p = bench_problem("network-ops");
    EvaluationConfig config;
    config.grid = tiny_grid();
    config.iterations = 4;
    const auto base = run_mccv(p, config);

    auto shuffled = config;
    shuffled.families = {Family::random_forest, Family::naive_bayes, Family::adaboost, Family::cart,
                         Family::logistic, Family::cart};
    EXPECT_EQ(run_mccv(p, shuffled), base);

    auto serial = config;
    serial.parallel = false;
    EXPECT_EQ(run_mccv(p, serial), base);

    // A subset reports the same numbers for the families it keeps.
    auto subset = config;
    subset.families = {Family::cart};
    const auto sub = run_mccv(p, subset);
    EXPECT_EQ(sub.family(Family::cart), base.family(Family::cart));
}

TEST(RunMccv, Errors) {
    const auto& p = bench_problem("network-ops");
    EvaluationConfig config;
    config.grid = tiny_grid();
    config.iterations = 0;
    EXPECT_THROW(run_mccv(p, config), EvaluationError);
    config.iterations = 1;
    config.families.clear();
    EXPECT_THROW(run_mccv(p, config), EvaluationError);

    // Two positives cannot cover train, cv and test.
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 40; ++i) rows.push_back(coded_row({i % 3}, i < 2 ? "a" : "b"));
    const auto table = build_table(rows);
    const auto tiny = make_binary_problem(table, "a", 1);
    EvaluationConfig c2;
    c2.grid = tiny_grid();
    c2.iterations = 2;
    EXPECT_THROW(run_mccv(tiny, c2), EvaluationError);
}
