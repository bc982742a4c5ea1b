#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "assetowner/dataset.hpp"
#include "support.hpp"

using namespace assetowner;
using testing_support::coded_row;

namespace {

FeatureRow located(const std::string& location, const std::string& owner) {
    auto row = coded_row({}, owner);
    row[Feature::location] = location;
    return row;
}

}  // namespace

TEST(BuildTable, CanonicalVocabulary) {
    const std::vector<FeatureRow> rows = {located("AMER", "a"), located("APAC", "b"), located("AMER", "a")};
    const auto t = build_table(rows);
    const auto loc = static_cast<std::size_t>(Feature::location);
    EXPECT_EQ(t.vocabulary(loc), (Vocabulary{"AMER", "APAC"}));
    EXPECT_EQ(t.code(0, loc), 0u);
    EXPECT_EQ(t.code(1, loc), 1u);
    EXPECT_EQ(t.code(2, loc), 0u);
}

TEST(BuildTable, SingleRow) {
    const std::vector<FeatureRow> rows = {located("AMER", "a")};
    const auto t = build_table(rows);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        EXPECT_EQ(t.vocabulary(f).size(), 1u);
        EXPECT_EQ(t.code(0, f), 0u);
    }
}

TEST(BuildTable, EmptyFails) { EXPECT_THROW(build_table(std::vector<FeatureRow>{}), DatasetError); }

TEST(BuildTable, DecodeInvertsEncode) {
    const auto& b = testing_support::benchmark();
    for (std::size_t r = 0; r < b.rows.size(); r += 7) {
        const auto decoded = b.table.decode(r);
        EXPECT_EQ(decoded.values, b.rows[r].values);
        EXPECT_EQ(decoded.owner, b.rows[r].owner);
        EXPECT_EQ(encode_row(b.table.vocabularies(), b.rows[r]),
                  ([&] {
                      std::array<Code, kFeatureCount> c{};
                      for (std::size_t f = 0; f < kFeatureCount; ++f) c[f] = b.table.code(r, f);
                      return c;
                  }()));
    }
}

TEST(BuildTable, PermutationInvariance) {
    std::mt19937_64 rng(1);
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 40; ++i)
        rows.push_back(coded_row({int(rng() % 5), int(rng() % 3), int(rng() % 7)}, i % 2 ? "a" : "b"));
    std::vector<std::size_t> perm(rows.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<FeatureRow> shuffled;
    for (auto p : perm) shuffled.push_back(rows[p]);
    const auto a = build_table(rows), b = build_table(shuffled);
    EXPECT_EQ(a.vocabularies(), b.vocabularies());
    for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t f = 0; f < kFeatureCount; ++f) EXPECT_EQ(b.code(i, f), a.code(perm[i], f));
}

TEST(EncodeRow, UnseenMapsToVocabularySize) {
    const std::vector<FeatureRow> rows = {located("AMER", "a"), located("APAC", "b")};
    const auto t = build_table(rows);
    const auto codes = encode_row(t.vocabularies(), located("EMEA", ""));
    EXPECT_EQ(codes[static_cast<std::size_t>(Feature::location)], 2u);
    EXPECT_EQ(codes[0], 0u);
}

TEST(BinaryProblem, Labels) {
    const std::vector<FeatureRow> rows = {located("A", "a"), located("B", "b"), located("C", "a")};
    const auto t = build_table(rows);
    const auto p = make_binary_problem(t, "a", 1);
    EXPECT_EQ(p.labels, (std::vector<std::uint8_t>{1, 0, 1}));
    EXPECT_EQ(p.positives(), 2u);
}

TEST(BinaryProblem, UnlabeledHeldForInference) {
    const std::vector<FeatureRow> rows = {located("A", "a"), located("B", "b"), located("C", "")};
    const auto t = build_table(rows);
    const auto p = make_binary_problem(t, "a", 1);
    EXPECT_EQ(p.table_rows, (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(p.unlabeled, (std::vector<std::size_t>{2}));
    EXPECT_EQ(p.size(), 2u);
}

TEST(BinaryProblem, Refusals) {
    const std::vector<FeatureRow> rows = {located("A", "a"), located("B", "b")};
    const auto t = build_table(rows);
    EXPECT_THROW(make_binary_problem(t, "c", 1), DatasetError);
    try {
        make_binary_problem(t, "a");
        FAIL() << "expected refusal below min_positives";
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
    }
}

TEST(EligibleOwners, BenchmarkHasSix) {
    const auto owners = eligible_owners(testing_support::benchmark().table);
    EXPECT_EQ(owners.size(), 6u);
    EXPECT_TRUE(std::is_sorted(owners.begin(), owners.end()));
}

TEST(MccvSplit, Sizes) {
    std::vector<std::uint8_t> labels(1000, 0);
    for (int i = 0; i < 300; ++i) labels[i] = 1;
    auto plan = mccv_split(1000, 0, 42, labels);
    EXPECT_EQ(plan.train.size(), 800u);
    EXPECT_EQ(plan.cv.size(), 100u);
    EXPECT_EQ(plan.test.size(), 100u);
    labels.resize(70);
    labels[69] = 0;
    plan = mccv_split(70, 0, 42, labels);
    EXPECT_EQ(plan.train.size(), 56u);
    EXPECT_EQ(plan.cv.size(), 7u);
    EXPECT_EQ(plan.test.size(), 7u);
}

TEST(MccvSplit, DeterministicAndDistinct) {
    std::vector<std::uint8_t> labels(200, 0);
    for (int i = 0; i < 200; i += 3) labels[i] = 1;
    EXPECT_EQ(mccv_split(200, 5, 9, labels), mccv_split(200, 5, 9, labels));
    EXPECT_NE(mccv_split(200, 5, 9, labels).train, mccv_split(200, 6, 9, labels).train);
    EXPECT_NE(mccv_split(200, 5, 9, labels).train, mccv_split(200, 5, 10, labels).train);
}

TEST(MccvSplit, Errors) {
    std::vector<std::uint8_t> labels(9, 1);
    labels[0] = 0;
    EXPECT_THROW(mccv_split(9, 0, 1, labels), DatasetError);
    std::vector<std::uint8_t> one_class(20, 1);
    EXPECT_THROW(mccv_split(20, 0, 1, one_class), DatasetError);
}

// Property: disjoint, exhaustive, floor-sized, stratified when counts permit.
TEST(MccvSplit, Properties) {
    std::mt19937_64 rng(17);
    for (std::size_t n : {10u, 70u, 100u, 1000u}) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::uint8_t> labels(n);
            const std::size_t pos = 1 + rng() % (n - 1);
            for (std::size_t i = 0; i < pos; ++i) labels[i] = 1;
            std::shuffle(labels.begin(), labels.end(), rng);
            const auto plan = mccv_split(n, trial, rng(), labels);
            const auto sizes = split_sizes(n);
            EXPECT_EQ(plan.train.size(), n * 8 / 10);
            EXPECT_EQ(plan.cv.size(), n / 10);
            EXPECT_EQ(plan.test.size(), n - n * 8 / 10 - n / 10);
            EXPECT_EQ(plan.train.size(), sizes.train);
            std::vector<std::size_t> all;
            for (const auto* part : {&plan.train, &plan.cv, &plan.test}) all.insert(all.end(), part->begin(), part->end());
            std::sort(all.begin(), all.end());
            EXPECT_EQ(all, testing_support::all_rows(n));
            if (pos >= 10 && n - pos >= 10) {
                for (const auto* part : {&plan.train, &plan.cv, &plan.test}) {
                    std::size_t p = 0;
                    for (auto i : *part) p += labels[i];
                    EXPECT_GT(p, 0u);
                    EXPECT_LT(p, part->size());
                }
            }
        }
    }
}

TEST(Summarize, SmallTable) {
    std::vector<FeatureRow> rows = {located("AMER", "a"), located("AMER", "b"), located("APAC", "")};
    rows[0][Feature::cidr8] = "10.0.0.0/8";
    rows[0][Feature::cidr16] = "10.1.0.0/16";
    rows[1][Feature::cidr8] = "10.0.0.0/8";
    rows[1][Feature::cidr16] = "10.2.0.0/16";
    rows[2][Feature::cidr8] = "11.0.0.0/8";
    rows[2][Feature::cidr16] = "11.1.0.0/16";
    const auto eda = summarize(build_table(rows));
    EXPECT_EQ(eda.n_rows, 3u);
    EXPECT_EQ(eda.frequencies.at("location"), (FrequencyTable{{"AMER", 2}, {"APAC", 1}}));
    EXPECT_EQ(eda.frequencies.size(), kEdaFeatures.size());
    EXPECT_EQ(eda.owners, (FrequencyTable{{"", 1}, {"a", 1}, {"b", 1}}));
    EXPECT_EQ(eda.cidr16_by_cidr8.at("10.0.0.0/8"), (FrequencyTable{{"10.1.0.0/16", 1}, {"10.2.0.0/16", 1}}));
}

TEST(Summarize, ConservationAndNesting) {
    const auto& b = testing_support::benchmark();
    const auto eda = summarize(b.table);
    const auto sum = [](const FrequencyTable& t) {
        std::size_t s = 0;
        for (const auto& [k, v] : t) s += v;
        return s;
    };
    for (const auto& [name, table] : eda.frequencies) EXPECT_EQ(sum(table), b.rows.size()) << name;
    EXPECT_EQ(sum(eda.owners), b.rows.size());
    std::size_t nested = 0;
    for (const auto& [cidr8, children] : eda.cidr16_by_cidr8) {
        nested += sum(children);
        const std::string a = cidr8.substr(0, cidr8.find('.') + 1);
        for (const auto& [cidr16, n] : children) EXPECT_EQ(cidr16.substr(0, a.size()), a);
    }
    EXPECT_EQ(nested, b.rows.size());
    std::size_t os_total = 0;
    for (const auto& [parent, children] : eda.os_by_parent) {
        os_total += sum(children);
        for (const auto& [os, n] : children) EXPECT_EQ(derive_os_parent(os), parent);
    }
    EXPECT_EQ(os_total, b.rows.size());
}
