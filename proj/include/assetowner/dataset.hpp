#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "assetowner/features.hpp"

namespace assetowner {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Code = std::uint32_t;
using Vocabulary = std::vector<std::string>;

/// Dictionary-encoded feature matrix. Vocabularies are the distinct observed
/// values in lexicographic order; codes are row-major, kFeatureCount per row.
class CategoricalTable {
public:
    CategoricalTable() = default;

    std::size_t rows() const { return owners_.size(); }
    static constexpr std::size_t features() { return kFeatureCount; }

    Code code(std::size_t row, std::size_t feature) const { return codes_[row * kFeatureCount + feature]; }
    std::span<const Code> row_codes(std::size_t row) const {
        return {codes_.data() + row * kFeatureCount, kFeatureCount};
    }
    const Vocabulary& vocabulary(std::size_t feature) const { return vocab_[feature]; }
    const std::array<Vocabulary, kFeatureCount>& vocabularies() const { return vocab_; }
    const std::string& owner(std::size_t row) const { return owners_[row]; }
    const std::vector<std::string>& owners() const { return owners_; }

    // Display-only columns carried alongside the features.
    const std::string& os(std::size_t row) const { return os_[row]; }

    FeatureRow decode(std::size_t row) const;

    friend CategoricalTable build_table(std::span<const FeatureRow> rows);

private:
    std::array<Vocabulary, kFeatureCount> vocab_;
    std::vector<Code> codes_;
    std::vector<std::string> owners_;
    std::vector<std::string> os_;
};

// Throws DatasetError on empty input.
CategoricalTable build_table(std::span<const FeatureRow> rows);

/// Encodes a row against a vocabulary snapshot. Values missing from a
/// vocabulary map to that vocabulary's size (the reserved unseen code).
std::array<Code, kFeatureCount> encode_row(const std::array<Vocabulary, kFeatureCount>& vocab,
                                           const FeatureRow& row);

inline constexpr std::size_t kMinPositives = 30;

/// One-vs-rest view of a table. Only labeled rows take part; they are
/// renumbered 0..size()-1 and their codes copied densely for the fitters.
struct BinaryProblem {
    const CategoricalTable* table = nullptr;
    std::string target_owner;
    std::vector<std::size_t> table_rows;  // problem index -> table row
    std::vector<std::uint8_t> labels;     // 1 = owned by target_owner
    std::vector<Code> codes;              // size() x kFeatureCount
    std::vector<std::size_t> unlabeled;   // table rows held back for inference

    std::size_t size() const { return labels.size(); }
    std::span<const Code> row(std::size_t i) const { return {codes.data() + i * kFeatureCount, kFeatureCount}; }
    std::size_t vocab_size(std::size_t feature) const { return table->vocabulary(feature).size(); }
    std::size_t positives() const;
};

BinaryProblem make_binary_problem(const CategoricalTable& table, const std::string& owner,
                                  std::size_t min_positives = kMinPositives);

/// Owners with at least min_positives labeled rows, sorted.
std::vector<std::string> eligible_owners(const CategoricalTable& table, std::size_t min_positives = kMinPositives);

struct SplitPlan {
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> train;
    std::vector<std::size_t> cv;
    std::vector<std::size_t> test;

    friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

struct SplitSizes {
    std::size_t train, cv, test;
};

// floor(0.8n), floor(0.1n), remainder.
SplitSizes split_sizes(std::size_t n);

/// Stratified 80/10/10 split keyed by (master_seed, iteration). Each part
/// gets at least one row of each class whenever the counts allow it.
SplitPlan mccv_split(std::size_t n, std::size_t iteration, std::uint64_t master_seed,
                     std::span<const std::uint8_t> labels);

using FrequencyTable = std::map<std::string, std::size_t>;

struct EdaSummary {
    std::size_t n_rows = 0;
    std::map<std::string, FrequencyTable> frequencies;  // feature name -> counts
    FrequencyTable owners;                             // "" = unlabeled
    std::map<std::string, FrequencyTable> cidr16_by_cidr8;
    std::map<std::string, FrequencyTable> os_by_parent;

    friend bool operator==(const EdaSummary&, const EdaSummary&) = default;
};

inline constexpr std::array<std::string_view, 7> kEdaFeatures = {
    "class_name", "agent_installed", "location", "fqdn_top", "os_parent", "oui", "cidr8"};

EdaSummary summarize(const CategoricalTable& table);

}  // namespace assetowner
