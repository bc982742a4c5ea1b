#include "assetowner/features.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <vector>

#include "assetowner/netaddr.hpp"

namespace assetowner {

std::size_t feature_index(std::string_view name) {
    const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
    if (it == kFeatureNames.end()) throw FeatureError("unknown feature '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - kFeatureNames.begin());
}

std::string truncate_fqdn(std::string_view fqdn) {
    std::size_t cut = fqdn.size();
    for (int labels = 0; labels < 3; ++labels) {
        const auto dot = fqdn.rfind('.', cut == 0 ? 0 : cut - 1);
        if (dot == std::string_view::npos || cut == 0) return to_lower(fqdn);
        cut = dot;
    }
    return to_lower(fqdn.substr(cut + 1));
}

CidrPrefixes derive_cidrs(std::string_view ip) {
    const auto parsed = parse_ipv4(ip);
    if (!parsed) throw FeatureError("invalid IPv4 address '" + std::string(ip) + "'");
    const auto& o = *parsed;
    const auto a = std::to_string(o[0]);
    const auto b = std::to_string(o[1]);
    const auto c = std::to_string(o[2]);
    return {a + ".0.0.0/8", a + "." + b + ".0.0/16", a + "." + b + "." + c + ".0/24"};
}

std::string extract_oui(std::string_view mac) {
    const auto parsed = parse_mac(mac);
    if (!parsed) throw FeatureError("not a 6-byte MAC address: '" + std::string(mac) + "'");
    return format_mac(*parsed).substr(0, 8);
}

// ---------------------------------------------------------------------------

void OuiDirectory::insert(std::string oui, std::string vendor) { entries_[std::move(oui)] = std::move(vendor); }

const std::string* OuiDirectory::find(std::string_view oui) const {
    const auto it = entries_.find(std::string(oui));
    return it == entries_.end() ? nullptr : &it->second;
}

OuiDirectory OuiDirectory::parse(std::istream& in) {
    OuiDirectory dir;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        std::string prefix = line.substr(0, tab);
        if (const auto slash = prefix.find('/'); slash != std::string::npos) {
            // "xx-xx-xx-00-00-00/24" is still a plain OUI block.
            if (prefix.substr(slash + 1) != "24") continue;
            prefix = prefix.substr(0, 8);
        }
        if (prefix.size() != 8) continue;
        std::replace(prefix.begin(), prefix.end(), '-', ':');
        const auto probe = parse_mac(prefix + ":00:00:00");
        if (!probe) continue;
        auto rest = std::string_view(line).substr(tab + 1);
        const auto vendor = trim(rest.substr(0, rest.find('\t')));
        if (vendor.empty()) continue;
        dir.insert(format_mac(*probe).substr(0, 8), vendor);
    }
    return dir;
}

OuiDirectory OuiDirectory::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FeatureError("cannot open OUI directory '" + path.string() + "'");
    return parse(in);
}

std::string lookup_vendor(std::string_view oui, const OuiDirectory& dir) {
    const auto* vendor = dir.find(oui);
    return vendor ? *vendor : std::string("unknown");
}

// ---------------------------------------------------------------------------

namespace {

struct OsKeyword {
    std::string_view keyword;
    std::string_view parent;
    bool whole_word;
};

// First match wins, so more specific families come first.
constexpr OsKeyword kOsTable[] = {
    {"esx", "esx", false},           {"vmware", "esx", false},     {"windows", "windows", false},
    {"win", "windows", true},        {"macos", "macos", false},    {"mac os", "macos", false},
    {"os x", "macos", false},        {"darwin", "macos", false},   {"freebsd", "bsd", false},
    {"openbsd", "bsd", false},       {"netbsd", "bsd", false},     {"bsd", "bsd", false},
    {"ios", "network-os", true},     {"ios-xe", "network-os", true}, {"ios-xr", "network-os", true},
    {"network-os", "network-os", false}, {"nx-os", "network-os", false},  {"junos", "network-os", false}, {"fortios", "network-os", false},
    {"pan-os", "network-os", false}, {"eos", "network-os", true},    {"cisco", "network-os", false},
    {"linux", "linux", false},       {"ubuntu", "linux", false},   {"centos", "linux", false},
    {"red hat", "linux", false},     {"rhel", "linux", false},     {"debian", "linux", false},
    {"suse", "linux", false},        {"fedora", "linux", false},   {"rocky", "linux", false},
    {"alma", "linux", false},
};

bool word_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

bool contains_word(std::string_view text, std::string_view word) {
    for (auto pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        const bool left_ok = pos == 0 || !word_char(text[pos - 1]);
        const auto end = pos + word.size();
        const bool right_ok = end == text.size() || !word_char(text[end]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

}  // namespace

std::string derive_os_parent(std::string_view os) {
    const std::string lowered = to_lower(os);
    for (const auto& entry : kOsTable) {
        const bool hit = entry.whole_word ? contains_word(lowered, entry.keyword)
                                          : lowered.find(entry.keyword) != std::string::npos;
        if (hit) return std::string(entry.parent);
    }
    return "other";
}

FeatureRow engineer(const AssetRecord& record, const OuiDirectory& dir) {
    FeatureRow row;
    auto cidrs = derive_cidrs(record.ip);
    row[Feature::class_name] = record.class_name;
    row[Feature::agent_installed] = std::string(to_string(record.agent_installed));
    row[Feature::location] = record.location;
    row[Feature::system] = record.system;
    row[Feature::os_parent] = derive_os_parent(record.os);
    row[Feature::fqdn_top] = truncate_fqdn(record.fqdn);
    row[Feature::cidr8] = std::move(cidrs.cidr8);
    row[Feature::cidr16] = std::move(cidrs.cidr16);
    row[Feature::cidr24] = std::move(cidrs.cidr24);
    row[Feature::oui] = extract_oui(record.mac);
    row.owner = record.owner;
    row.os = record.os;
    row.oui_vendor = lookup_vendor(row[Feature::oui], dir);
    return row;
}

}  // namespace assetowner
