#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "assetowner/ingest.hpp"

namespace assetowner {

class SynthConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WeightedValue {
    std::string value;
    double weight = 1.0;

    friend bool operator==(const WeightedValue&, const WeightedValue&) = default;
};

/// Box predicate over the three driver features; an empty list matches any value.
struct RuleClause {
    std::vector<std::string> fqdn_top;
    std::vector<std::string> cidr16;
    std::vector<std::string> location;

    friend bool operator==(const RuleClause&, const RuleClause&) = default;
};

struct SynthVocab {
    std::vector<std::string> locations;
    std::vector<std::string> fqdn_domains;
    std::vector<int> cidr8_octets;
    int cidr16_per_cidr8 = 4;
    int cidr24_per_cidr16 = 4;
    std::vector<std::string> ouis;
    std::vector<WeightedValue> os;
    std::vector<WeightedValue> class_names;
    std::vector<WeightedValue> systems;
    double agent_installed_rate = 0.8;

    // "a.b.0.0/16" strings in generation order.
    std::vector<std::string> cidr16_networks() const;

    friend bool operator==(const SynthVocab&, const SynthVocab&) = default;
};

struct SynthConfig {
    std::size_t n_rows = 0;
    std::vector<WeightedValue> owners;  // value = owner name
    double noise_rate = 0.0;
    std::uint64_t seed = 0;
    SynthVocab vocab;
    // owner -> union of clauses
    std::map<std::string, std::vector<RuleClause>> rule_table;

    friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

// 5000 rows, 6 owners, 3% label noise; owner planted on (fqdn_top, cidr16, location).
SynthConfig benchmark_config();

SynthConfig parse_synth_config(std::string_view json_text);
std::string synth_config_to_json(const SynthConfig& config);

struct SynthProvenance {
    std::vector<std::string> true_rule_owner;  // owner before the noise flip
};

struct Inventory {
    std::vector<AssetRecord> records;
    SynthProvenance provenance;
};

class InventoryGenerator {
public:
    /// Throws SynthConfigError on invalid weights or a rule table that
    /// overlaps or leaves gaps over the driver vocabulary.
    explicit InventoryGenerator(SynthConfig config);

    Inventory generate() const;
    const SynthConfig& config() const { return config_; }

    // Owner that the rule table assigns to a driver triple.
    const std::string& rule_owner(std::string_view fqdn_top, std::string_view cidr16,
                                  std::string_view location) const;

private:
    struct Cell {
        std::size_t fqdn;
        std::size_t cidr16;
        std::size_t location;
    };

    SynthConfig config_;
    std::vector<std::string> cidr16_;
    std::vector<std::vector<Cell>> cells_by_owner_;  // indexed like config_.owners
    std::map<std::string, std::size_t> cell_owner_;    // "f|c|l" -> owner index
};

inline Inventory generate_inventory(const SynthConfig& config) { return InventoryGenerator(config).generate(); }

}  // namespace assetowner
