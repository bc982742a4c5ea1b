#include "assetowner/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include <json.hpp>

#include "assetowner/rng.hpp"

namespace assetowner {

using nlohmann::json;

std::vector<std::string> SynthVocab::cidr16_networks() const {
    std::vector<std::string> out;
    for (int a : cidr8_octets) {
        for (int k = 0; k < cidr16_per_cidr8; ++k) {
            out.push_back(std::to_string(a) + "." + std::to_string(16 * (k + 1)) + ".0.0/16");
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// default benchmark

SynthConfig benchmark_config() {
    SynthConfig c;
    c.n_rows = 5000;
    c.noise_rate = 0.03;
    c.seed = 20230917;
    c.owners = {{"data-science", 0.20}, {"platform", 0.20},  {"network-ops", 0.15},
                {"security", 0.15},     {"storage", 0.15},   {"end-user-compute", 0.15}};

    auto& v = c.vocab;
    v.locations = {"AMER", "EMEA", "APAC", "LATAM", "INDIA", "ANZ"};
    v.fqdn_domains = {"corp.acme.com", "dev.acme.com", "lab.acme.com",
                      "prod.acme.net", "cloud.acme.io", "mgmt.acme.com"};
    v.cidr8_octets = {10, 100, 172, 192};
    v.cidr16_per_cidr8 = 4;
    v.cidr24_per_cidr16 = 1;
    v.ouis = {"00:50:56", "00:0C:29", "00:15:5D", "00:1C:42", "08:00:27", "3C:FD:FE",
              "F4:8E:38", "52:54:00", "00:1B:21", "A0:36:9F", "00:26:B9", "98:90:96",
              "B8:CA:3A", "00:17:A4", "3C:A8:2A", "00:25:B5"};
    v.os = {{"Ubuntu 20.04", 0.20},          {"Red Hat Enterprise Linux 8", 0.15},
            {"CentOS 7", 0.10},              {"Linux kernel 3.2", 0.08},
            {"Linux kernel 2.4", 0.07},      {"Windows Server 2019", 0.12},
            {"Windows Server 2016", 0.08},   {"Windows 10", 0.05},
            {"VMware ESXi 7.0", 0.05},       {"FreeBSD 13", 0.03},
            {"macOS 12", 0.03},              {"Cisco IOS XE 17", 0.02},
            {"Junos 21.2", 0.02}};
    v.class_names = {{"Linux Server"}, {"Windows Server"}, {"ESX Server"}, {"Network Gear"},
                     {"Storage Array"}, {"Virtual Machine"}, {"Database"}, {"Load Balancer"}};
    v.systems = {{"production", 0.55}, {"development", 0.20}, {"qa", 0.10}, {"dr", 0.10}, {"lab", 0.05}};
    v.agent_installed_rate = 0.8;

    // Domain pairs pick the business unit. Within unit k the first owner
    // holds the cells where at least two of (first domain, L0 location, C0
    // subnet) hold and its sibling the rest, so neither region is a box.
    const std::vector<std::vector<std::string>> domain_groups = {
        {"corp.acme.com", "dev.acme.com"}, {"lab.acme.com", "prod.acme.net"}, {"cloud.acme.io", "mgmt.acme.com"}};
    const std::vector<std::string> l0 = {"AMER", "EMEA", "APAC"};
    const std::vector<std::string> l1 = {"LATAM", "INDIA", "ANZ"};
    std::vector<std::string> c0, c1;
    for (int a : v.cidr8_octets) {
        c0.push_back(std::to_string(a) + ".16.0.0/16");
        c0.push_back(std::to_string(a) + ".48.0.0/16");
        c1.push_back(std::to_string(a) + ".32.0.0/16");
        c1.push_back(std::to_string(a) + ".64.0.0/16");
    }
    for (std::size_t g = 0; g < domain_groups.size(); ++g) {
        const std::vector<std::string> d0 = {domain_groups[g][0]}, d1 = {domain_groups[g][1]};
        c.rule_table[c.owners[2 * g].value] = {{d0, {}, l0}, {d0, c0, l1}, {d1, c0, l0}};
        c.rule_table[c.owners[2 * g + 1].value] = {{d1, {}, l1}, {d1, c1, l0}, {d0, c1, l1}};
    }
    return c;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json weighted_to_json(const std::vector<WeightedValue>& values, std::string_view key) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back({{std::string(key), v.value}, {"weight", v.weight}});
    return arr;
}

std::vector<WeightedValue> weighted_from_json(const json& arr, std::string_view key) {
    std::vector<WeightedValue> out;
    for (const auto& item : arr) {
        if (item.is_string()) {
            out.push_back({item.get<std::string>(), 1.0});
        } else {
            out.push_back({item.at(std::string(key)).get<std::string>(), item.value("weight", 1.0)});
        }
    }
    return out;
}

}  // namespace

SynthConfig parse_synth_config(std::string_view json_text) {
    try {
        const json j = json::parse(json_text);
        SynthConfig c;
        c.n_rows = j.at("n_rows").get<std::size_t>();
        c.noise_rate = j.at("noise_rate").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.owners = weighted_from_json(j.at("owners"), "name");
        const json& v = j.at("vocab");
        c.vocab.locations = v.at("locations").get<std::vector<std::string>>();
        c.vocab.fqdn_domains = v.at("fqdn_domains").get<std::vector<std::string>>();
        c.vocab.cidr8_octets = v.at("cidr8_octets").get<std::vector<int>>();
        c.vocab.cidr16_per_cidr8 = v.at("cidr16_per_cidr8").get<int>();
        c.vocab.cidr24_per_cidr16 = v.at("cidr24_per_cidr16").get<int>();
        c.vocab.ouis = v.at("ouis").get<std::vector<std::string>>();
        c.vocab.os = weighted_from_json(v.at("os"), "name");
        c.vocab.class_names = weighted_from_json(v.at("class_names"), "name");
        c.vocab.systems = weighted_from_json(v.at("systems"), "name");
        c.vocab.agent_installed_rate = v.value("agent_installed_rate", 0.8);
        for (const auto& [owner, clauses] : j.at("rule_table").items()) {
            auto& out = c.rule_table[owner];
            for (const auto& cl : clauses) {
                out.push_back({cl.value("fqdn_top", std::vector<std::string>{}),
                               cl.value("cidr16", std::vector<std::string>{}),
                               cl.value("location", std::vector<std::string>{})});
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw SynthConfigError(std::string("malformed synth config: ") + e.what());
    }
}

std::string synth_config_to_json(const SynthConfig& c) {
    json rules = json::object();
    for (const auto& [owner, clauses] : c.rule_table) {
        json arr = json::array();
        for (const auto& cl : clauses) {
            json o = json::object();
            if (!cl.fqdn_top.empty()) o["fqdn_top"] = cl.fqdn_top;
            if (!cl.cidr16.empty()) o["cidr16"] = cl.cidr16;
            if (!cl.location.empty()) o["location"] = cl.location;
            arr.push_back(std::move(o));
        }
        rules[owner] = std::move(arr);
    }
    const json j = {
        {"n_rows", c.n_rows},
        {"noise_rate", c.noise_rate},
        {"seed", c.seed},
        {"owners", weighted_to_json(c.owners, "name")},
        {"vocab",
         {{"locations", c.vocab.locations},
          {"fqdn_domains", c.vocab.fqdn_domains},
          {"cidr8_octets", c.vocab.cidr8_octets},
          {"cidr16_per_cidr8", c.vocab.cidr16_per_cidr8},
          {"cidr24_per_cidr16", c.vocab.cidr24_per_cidr16},
          {"ouis", c.vocab.ouis},
          {"os", weighted_to_json(c.vocab.os, "name")},
          {"class_names", weighted_to_json(c.vocab.class_names, "name")},
          {"systems", weighted_to_json(c.vocab.systems, "name")},
          {"agent_installed_rate", c.vocab.agent_installed_rate}}},
        {"rule_table", rules},
    };
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// generator

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw SynthConfigError(message);
}

void check_weights(const std::vector<WeightedValue>& values, std::string_view what) {
    require(!values.empty(), std::string(what) + " list is empty");
    for (const auto& v : values) {
        require(std::isfinite(v.weight) && v.weight > 0,
                std::string(what) + " '" + v.value + "' needs a positive weight");
    }
}

bool clause_matches(const RuleClause& cl, const std::string& f, const std::string& c, const std::string& l) {
    const auto in = [](const std::vector<std::string>& set, const std::string& x) {
        return set.empty() || std::find(set.begin(), set.end(), x) != set.end();
    };
    return in(cl.fqdn_top, f) && in(cl.cidr16, c) && in(cl.location, l);
}

std::string cell_key(std::string_view f, std::string_view c, std::string_view l) {
    std::string key(f);
    key += '|';
    key += c;
    key += '|';
    key += l;
    return key;
}

template <class T>
std::discrete_distribution<std::size_t> make_discrete(const std::vector<T>& values) {
    std::vector<double> w;
    w.reserve(values.size());
    for (const auto& v : values) w.push_back(v.weight);
    return std::discrete_distribution<std::size_t>(w.begin(), w.end());
}

}  // namespace

InventoryGenerator::InventoryGenerator(SynthConfig config) : config_(std::move(config)) {
    const auto& v = config_.vocab;
    require(config_.noise_rate >= 0.0 && config_.noise_rate <= 1.0, "noise_rate must lie in [0,1]");
    check_weights(config_.owners, "owner");
    check_weights(v.os, "os");
    check_weights(v.class_names, "class_name");
    check_weights(v.systems, "system");
    require(!v.locations.empty() && !v.fqdn_domains.empty() && !v.cidr8_octets.empty() && !v.ouis.empty(),
            "vocabulary lists must be non-empty");
    require(v.cidr16_per_cidr8 >= 1 && v.cidr16_per_cidr8 <= 15, "cidr16_per_cidr8 must be in 1..15");
    require(v.cidr24_per_cidr16 >= 1 && v.cidr24_per_cidr16 <= 254, "cidr24_per_cidr16 must be in 1..254");
    require(v.agent_installed_rate >= 0.0 && v.agent_installed_rate <= 1.0, "agent_installed_rate must lie in [0,1]");
    for (int a : v.cidr8_octets) require(a >= 0 && a <= 255, "cidr8 octet out of range");
    for (const auto& o : v.ouis) {
        require(o.size() == 8 && o[2] == ':' && o[5] == ':', "oui '" + o + "' is not XX:XX:XX");
    }
    std::set<std::string> names;
    for (const auto& o : config_.owners) require(names.insert(o.value).second, "duplicate owner '" + o.value + "'");

    cidr16_ = v.cidr16_networks();
    for (const auto& [owner, clauses] : config_.rule_table) {
        require(names.count(owner) == 1, "rule_table names unknown owner '" + owner + "'");
        for (const auto& cl : clauses) {
            for (const auto& f : cl.fqdn_top)
                require(std::count(v.fqdn_domains.begin(), v.fqdn_domains.end(), f) == 1,
                        "rule for '" + owner + "' references unknown fqdn_top '" + f + "'");
            for (const auto& c : cl.cidr16)
                require(std::count(cidr16_.begin(), cidr16_.end(), c) == 1,
                        "rule for '" + owner + "' references unknown cidr16 '" + c + "'");
            for (const auto& l : cl.location)
                require(std::count(v.locations.begin(), v.locations.end(), l) == 1,
                        "rule for '" + owner + "' references unknown location '" + l + "'");
        }
    }

    cells_by_owner_.resize(config_.owners.size());
    for (std::size_t fi = 0; fi < v.fqdn_domains.size(); ++fi) {
        for (std::size_t ci = 0; ci < cidr16_.size(); ++ci) {
            for (std::size_t li = 0; li < v.locations.size(); ++li) {
                const auto& f = v.fqdn_domains[fi];
                const auto& c = cidr16_[ci];
                const auto& l = v.locations[li];
                std::size_t matched = 0;
                std::size_t owner_index = 0;
                for (std::size_t oi = 0; oi < config_.owners.size(); ++oi) {
                    const auto it = config_.rule_table.find(config_.owners[oi].value);
                    if (it == config_.rule_table.end()) continue;
                    std::size_t hits = 0;
                    for (const auto& cl : it->second) hits += clause_matches(cl, f, c, l) ? 1 : 0;
                    require(hits <= 1, "rule clauses for '" + config_.owners[oi].value + "' overlap at (" + f +
                                           ", " + c + ", " + l + ")");
                    if (hits == 1) {
                        ++matched;
                        owner_index = oi;
                    }
                }
                require(matched != 0, "rule table leaves (" + f + ", " + c + ", " + l + ") without an owner");
                require(matched == 1, "rule table assigns (" + f + ", " + c + ", " + l + ") to several owners");
                cells_by_owner_[owner_index].push_back({fi, ci, li});
                cell_owner_[cell_key(f, c, l)] = owner_index;
            }
        }
    }
    for (std::size_t oi = 0; oi < config_.owners.size(); ++oi) {
        require(!cells_by_owner_[oi].empty(), "owner '" + config_.owners[oi].value + "' has an empty rule region");
    }
}

const std::string& InventoryGenerator::rule_owner(std::string_view fqdn_top, std::string_view cidr16,
                                                  std::string_view location) const {
    const auto it = cell_owner_.find(cell_key(fqdn_top, cidr16, location));
    if (it == cell_owner_.end()) throw SynthConfigError("driver triple outside the generated vocabulary");
    return config_.owners[it->second].value;
}

Inventory InventoryGenerator::generate() const {
    const auto& v = config_.vocab;
    Rng rng(config_.seed);
    auto pick_owner = make_discrete(config_.owners);
    auto pick_os = make_discrete(v.os);
    auto pick_class = make_discrete(v.class_names);
    auto pick_system = make_discrete(v.systems);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> host(1, 254);
    std::uniform_int_distribution<int> cidr24(1, v.cidr24_per_cidr16);
    std::uniform_int_distribution<std::size_t> pick_oui(0, v.ouis.size() - 1);
    std::uniform_int_distribution<int> site(1, 4);
    static constexpr const char* kEnvs[] = {"prod", "dev", "test"};
    static constexpr const char* kTiers[] = {"web", "app", "db"};
    std::uniform_int_distribution<int> three(0, 2);

    Inventory inv;
    inv.records.reserve(config_.n_rows);
    inv.provenance.true_rule_owner.reserve(config_.n_rows);
    const std::size_t n_owners = config_.owners.size();
    for (std::size_t i = 0; i < config_.n_rows; ++i) {
        const std::size_t owner = pick_owner(rng);
        const auto& cells = cells_by_owner_[owner];
        const Cell cell = cells[std::uniform_int_distribution<std::size_t>(0, cells.size() - 1)(rng)];

        AssetRecord r;
        char name[32];
        std::snprintf(name, sizeof name, "ast-%05zu", i);
        r.asset_name = name;
        r.netbios = unit(rng) < 0.05 ? std::string() : "ACME-" + std::string(name + 4);
        r.os = v.os[pick_os(rng)].value;
        r.class_name = v.class_names[pick_class(rng)].value;
        r.fqdn = r.asset_name + ".dc" + std::to_string(site(rng)) + "." + v.fqdn_domains[cell.fqdn];

        const std::string& net16 = cidr16_[cell.cidr16];
        const std::string ab = net16.substr(0, net16.size() - 7);  // strip ".0.0/16"
        const int c = cidr24(rng);
        const int d = host(rng);
        r.ip = ab + "." + std::to_string(c) + "." + std::to_string(d);

        char mac[32];
        const int b3 = byte(rng), b4 = byte(rng), b5 = byte(rng);
        std::snprintf(mac, sizeof mac, "%s:%02X:%02X:%02X", v.ouis[pick_oui(rng)].c_str(), b3, b4, b5);
        r.mac = mac;

        r.agent_installed = unit(rng) < v.agent_installed_rate ? AgentInstalled::yes : AgentInstalled::no;
        r.location = v.locations[cell.location];
        r.system = v.systems[pick_system(rng)].value;
        r.tags["env"] = kEnvs[three(rng)];
        r.tags["tier"] = kTiers[three(rng)];

        std::size_t label = owner;
        if (n_owners > 1 && unit(rng) < config_.noise_rate) {
            const std::size_t shift = std::uniform_int_distribution<std::size_t>(1, n_owners - 1)(rng);
            label = (owner + shift) % n_owners;
        }
        r.owner = config_.owners[label].value;
        inv.provenance.true_rule_owner.push_back(config_.owners[owner].value);
        inv.records.push_back(std::move(r));
    }
    return inv;
}

}  // namespace assetowner
