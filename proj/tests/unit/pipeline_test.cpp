#include <gtest/gtest.h>

#include <sstream>

#include "assetowner/pipeline.hpp"
#include "support.hpp"

using namespace assetowner;

namespace {

EvaluationConfig quick_config() {
    EvaluationConfig config;
    config.grid.profile = "tiny";
    config.grid.adaboost = {{0.1, 2, 10}};
    config.grid.naive_bayes = {{1.0}};
    config.grid.cart = {{0.01, 5, 5}};
    config.grid.forest = {{10, 3, 8}};
    config.iterations = 2;
    return config;
}

LoadedDataset load_inventory(const std::vector<AssetRecord>& records) {
    std::ostringstream csv;
    write_export(csv, records);
    std::istringstream in(csv.str());
    return load_dataset(in, testing_support::manuf());
}

}  // namespace

TEST(Pipeline, LoadDatasetMatchesDirectEngineering) {
    const auto& b = testing_support::benchmark();
    const auto data = load_inventory(b.inventory.records);
    EXPECT_EQ(data.ingest.records.size(), b.inventory.records.size());
    EXPECT_EQ(data.rows, b.rows);
    EXPECT_EQ(data.table.rows(), b.table.rows());

    std::istringstream empty("");
    EXPECT_THROW(load_dataset(empty, testing_support::manuf()), std::exception);
}

TEST(Pipeline, EvaluateOwnersSortsAndDeduplicates) {
    const auto data = load_inventory(testing_support::benchmark().inventory.records);
    std::vector<std::string> seen;
    const auto bundle = evaluate_owners(data, quick_config(), {"storage", "platform", "storage"},
                                        [&](const RunReport& r) { seen.push_back(r.owner); });
    EXPECT_EQ(seen, (std::vector<std::string>{"platform", "storage"}));
    ASSERT_EQ(bundle.reports.size(), 2u);
    EXPECT_EQ(bundle.reports[0].owner, "platform");
    EXPECT_TRUE(bundle.reports[0].predictions.empty());
    EXPECT_EQ(bundle.predictions[1].owner, "storage");
    EXPECT_FALSE(bundle.predictions[1].rows.empty());
    EXPECT_EQ(bundle.eda.n_rows, data.table.rows());
}

TEST(Pipeline, SelectOwnerModelPicksLowestMedian) {
    const auto& table = testing_support::benchmark().table;
    const auto problem = make_binary_problem(table, "security");
    auto report = run_mccv(problem, quick_config());
    const auto chosen = select_owner_model(problem, report);
    double best = 2.0;
    Family expected = Family::adaboost;
    for (const auto& fr : report.families)
        if (fr.errors.median < best) {
            best = fr.errors.median;
            expected = fr.family;
        }
    EXPECT_EQ(chosen.family, expected);
    EXPECT_EQ(chosen.model.family(), expected);
    EXPECT_EQ(chosen.params, report.family(expected).iterations.front().params);

    report.families.clear();
    EXPECT_THROW(select_owner_model(problem, report), EvaluationError);
}

TEST(Pipeline, AssignOwnersTakesHighestScore) {
    // Owner decided by the location value; the last two rows are unlabeled.
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 60; ++i) rows.push_back(testing_support::coded_row({0, 0, i % 2}, i % 2 ? "b" : "a"));
    rows.push_back(testing_support::coded_row({0, 0, 0}, ""));
    rows.push_back(testing_support::coded_row({0, 0, 1}, ""));
    const auto table = build_table(rows);
    std::vector<OwnerModel> models;
    for (const std::string owner : {"a", "b"}) {
        const auto p = make_binary_problem(table, owner, 1);
        OwnerModel m;
        m.owner = owner;
        m.family = Family::naive_bayes;
        m.params = NaiveBayesParams{1.0};
        m.model = fit_model(p, testing_support::all_rows(p.size()), m.params, 0);
        models.push_back(std::move(m));
    }
    const auto out = assign_owners(table, models);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].table_row, 60u);
    EXPECT_EQ(out[0].owner, "a");
    EXPECT_EQ(out[1].owner, "b");
    EXPECT_GT(out[1].score, 0.5);
    EXPECT_THROW(assign_owners(table, {}), EvaluationError);
}
