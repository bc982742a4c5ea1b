#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "assetowner/ingest.hpp"

namespace assetowner {

class FeatureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kFeatureCount = 10;

// Model feature order. Trees break exact impurity ties toward the lower index.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "class_name", "agent_installed", "location", "system", "os_parent",
    "fqdn_top",   "cidr8",           "cidr16",   "cidr24", "oui"};

enum class Feature : std::size_t {
    class_name,
    agent_installed,
    location,
    system,
    os_parent,
    fqdn_top,
    cidr8,
    cidr16,
    cidr24,
    oui,
};

std::size_t feature_index(std::string_view name);  // throws FeatureError

/// Engineered categorical view of one asset. `os` and `oui_vendor` ride
/// along for display; they are not model features.
struct FeatureRow {
    std::array<std::string, kFeatureCount> values;
    std::string owner;
    std::string os;
    std::string oui_vendor;

    const std::string& operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    std::string& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct CidrPrefixes {
    std::string cidr8;
    std::string cidr16;
    std::string cidr24;
};

class OuiDirectory {
public:
    OuiDirectory() = default;

    /// Wireshark manuf format: "<prefix>\t<short>[\t<long>]" with '#'
    /// comments. Only exact 3-byte prefixes load; /28 and /36 blocks and
    /// full-address entries are ignored.
    static OuiDirectory parse(std::istream& in);
    static OuiDirectory load(const std::filesystem::path& path);

    void insert(std::string oui, std::string vendor);
    const std::string* find(std::string_view oui) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    std::unordered_map<std::string, std::string> entries_;
};

// Last three labels, lowercased; shorter names are returned whole.
std::string truncate_fqdn(std::string_view fqdn);

CidrPrefixes derive_cidrs(std::string_view ip);

// First three bytes of the address as "XX:XX:XX". Throws FeatureError.
std::string extract_oui(std::string_view mac);

// Vendor short name, or "unknown".
std::string lookup_vendor(std::string_view oui, const OuiDirectory& dir);

// One of linux, windows, esx, bsd, macos, network-os, other.
std::string derive_os_parent(std::string_view os);

FeatureRow engineer(const AssetRecord& record, const OuiDirectory& dir);

}  // namespace assetowner
