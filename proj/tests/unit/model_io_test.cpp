#include <gtest/gtest.h>

#include <cstring>

#include "assetowner/model_io.hpp"
#include "support.hpp"

using namespace assetowner;
using testing_support::all_rows;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(ModelIo, RoundTripEveryFamily) {
    const auto& b = testing_support::benchmark();
    const auto p = make_binary_problem(b.table, "security");
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < p.size(); i += 2) train.push_back(i);
    for (const HyperParams& params :
         {HyperParams{AdaboostParams{0.05, 4, 40}}, HyperParams{LogisticParams{}}, HyperParams{NaiveBayesParams{1.0}},
          HyperParams{CartParams{0.01, 5, 20}}, HyperParams{ForestParams{30, 3, 10}}}) {
        const auto model = fit_model(p, train, params, 42);
        const auto text = model_to_json(model);
        const auto back = model_from_json(text);
        EXPECT_EQ(back, model) << to_string(model.family());
        EXPECT_EQ(model_to_json(back), text);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto x = predict(model, p.row(i)), y = predict(back, p.row(i));
            EXPECT_EQ(x.label, y.label);
            EXPECT_TRUE(same_bits(x.score, y.score));
        }
    }
}

TEST(ModelIo, RejectsMalformed) {
    EXPECT_THROW(model_from_json("not json"), ModelError);
    EXPECT_THROW(model_from_json("{}"), ModelError);
    EXPECT_THROW(model_from_json(R"({"schema_version": 99, "family": "cart"})"), ModelError);

    std::mt19937_64 rng(1);
    const auto rp = testing_support::random_problem(rng, 40, {3, 2});
    auto text = model_to_json(fit_model(rp.problem, all_rows(40), CartParams{0.0, 2, 3}, 0));
    text.replace(text.find("\"cart\""), 6, "\"svm\"");
    EXPECT_THROW(model_from_json(text), ModelError);
}
