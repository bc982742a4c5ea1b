#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace assetowner {

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AgentInstalled { yes, no };

std::string_view to_string(AgentInstalled a);

using TagMap = std::map<std::string, std::string>;

/// One validated CMDB row. `ip` is a canonical dotted quad, `mac` the
/// uppercase colon form, `owner` trimmed and lowercased ("" = unlabeled).
struct AssetRecord {
    std::string asset_name;
    std::string netbios;
    std::string os;
    std::string class_name;
    std::string fqdn;
    std::string ip;
    std::string mac;
    AgentInstalled agent_installed = AgentInstalled::no;
    std::string location;
    std::string system;
    std::string owner;
    TagMap tags;

    bool labeled() const { return !owner.empty(); }
    friend bool operator==(const AssetRecord&, const AssetRecord&) = default;
};

enum class IssueSeverity { skip_row, default_applied };

std::string_view to_string(IssueSeverity s);

struct IngestIssue {
    std::size_t row_index = 0;  // 0-based data row
    std::string field;
    std::string reason;
    IssueSeverity severity = IssueSeverity::skip_row;

    friend bool operator==(const IngestIssue&, const IngestIssue&) = default;
};

struct IngestConfig {
    // Substituted for empty os/class_name/location/system cells.
    std::string missing_category = "unknown";
};

struct IngestResult {
    std::vector<AssetRecord> records;
    std::vector<IngestIssue> issues;

    std::size_t skipped_rows() const;
};

inline constexpr std::array<std::string_view, 12> kExportColumns = {
    "asset_name", "netbios", "os",     "class_name", "fqdn",  "ip",
    "mac",        "agent_installed", "location", "system", "owner", "tags"};

IngestResult parse_export(std::istream& source, const IngestConfig& config = {});

/// Tag grammar: pair (";" pair)* with pair = key ":" value. Keys are trimmed
/// and lowercased, values trimmed, later duplicates win. Segments without a
/// ':' (or with an empty key) are skipped and counted in `malformed`.
TagMap parse_tags(std::string_view raw, std::size_t* malformed = nullptr);
std::string format_tags(const TagMap& tags);

// Header plus one line per record, quoting cells only where needed.
void write_export(std::ostream& out, std::span<const AssetRecord> records);

namespace csv {

/// Streaming RFC-4180 reader. Accepts \n and \r\n, quoted cells with
/// doubled quotes and embedded separators or newlines.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    // false at end of input. Throws IngestError on an unterminated quote.
    bool next(std::vector<std::string>& cells);
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

std::string escape(std::string_view cell);

}  // namespace csv

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace assetowner
