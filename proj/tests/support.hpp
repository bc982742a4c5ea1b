#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include "assetowner/dataset.hpp"
#include "assetowner/features.hpp"
#include "assetowner/synth.hpp"

namespace testing_support {

using namespace assetowner;

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const OuiDirectory& manuf() {
    static const OuiDirectory dir = OuiDirectory::load(std::string(ASSETOWNER_SOURCE_DIR) + "/data/manuf");
    return dir;
}

inline std::vector<FeatureRow> engineer_all(const std::vector<AssetRecord>& records) {
    std::vector<FeatureRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(engineer(r, manuf()));
    return rows;
}

struct Benchmark {
    Inventory inventory;
    std::vector<FeatureRow> rows;
    CategoricalTable table;
};

// The default synthetic benchmark, built once per process.
inline const Benchmark& benchmark() {
    static const Benchmark b = [] {
        Benchmark out;
        out.inventory = generate_inventory(benchmark_config());
        out.rows = engineer_all(out.inventory.records);
        out.table = build_table(out.rows);
        return out;
    }();
    return b;
}

// Row whose feature f takes "v<codes[f]>"; zero-padded so lexicographic
// vocabulary order matches numeric order.
inline FeatureRow coded_row(const std::vector<int>& codes, const std::string& owner) {
    FeatureRow row;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const int c = f < codes.size() ? codes[f] : 0;
        row.values[f] = (c < 10 ? "v0" : "v") + std::to_string(c);
    }
    row.owner = owner;
    return row;
}

/// Random categorical problem: n rows, each feature drawn uniformly from
/// vocab[f] values, label "a" vs "b". Owned table plus problem over it.
struct RandomProblem {
    std::shared_ptr<CategoricalTable> table;  // stable address for problem.table
    BinaryProblem problem;
};

inline RandomProblem random_problem(std::mt19937_64& rng, std::size_t n, const std::vector<int>& vocab,
                                    double positive_rate = 0.5) {
    std::vector<FeatureRow> rows;
    std::bernoulli_distribution pos(positive_rate);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> codes;
        for (int k : vocab) codes.push_back(std::uniform_int_distribution<int>(0, k - 1)(rng));
        rows.push_back(coded_row(codes, pos(rng) ? "a" : "b"));
    }
    // both classes
    rows[0].owner = "a";
    rows[1].owner = "b";
    RandomProblem out;
    out.table = std::make_shared<CategoricalTable>(build_table(rows));
    out.problem = make_binary_problem(*out.table, "a", 1);
    return out;
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

}  // namespace testing_support
