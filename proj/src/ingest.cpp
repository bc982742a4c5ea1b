#include "assetowner/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <optional>
#include <ostream>

#include "assetowner/netaddr.hpp"

namespace assetowner {

std::string_view to_string(AgentInstalled a) { return a == AgentInstalled::yes ? "yes" : "no"; }

std::string_view to_string(IssueSeverity s) {
    return s == IssueSeverity::skip_row ? "skip_row" : "default_applied";
}

std::size_t IngestResult::skipped_rows() const {
    return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const IngestIssue& i) {
        return i.severity == IssueSeverity::skip_row;
    }));
}

std::string trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace csv {

bool Reader::next(std::vector<std::string>& cells) {
    cells.clear();
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return false;
    ++line_;

    std::string cell;
    bool quoted = false;
    bool cell_was_quoted = false;
    while (true) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw IngestError("unterminated quoted cell starting near line " + std::to_string(line_));
            break;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    cell.push_back('"');
                    in_.get();
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                cell.push_back(ch);
            }
        } else if (ch == '"' && !cell_was_quoted && cell.empty()) {
            quoted = true;
            cell_was_quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
            cell_was_quoted = false;
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r' && in_.peek() == '\n') {
            in_.get();
            break;
        } else {
            cell.push_back(ch);
        }
        c = in_.get();
    }
    cells.push_back(std::move(cell));
    return true;
}

std::string escape(std::string_view cell) {
    const bool needs_quotes = cell.find_first_of(",\"\r\n") != std::string_view::npos ||
                              (!cell.empty() && (std::isspace(static_cast<unsigned char>(cell.front())) ||
                                                 std::isspace(static_cast<unsigned char>(cell.back()))));
    if (!needs_quotes) return std::string(cell);
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace csv

// ---------------------------------------------------------------------------
// tags

TagMap parse_tags(std::string_view raw, std::size_t* malformed) {
    TagMap tags;
    std::size_t bad = 0;
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t end = raw.find(';', start);
        if (end == std::string_view::npos) end = raw.size();
        const std::string_view segment = raw.substr(start, end - start);
        start = end + 1;
        if (trim(segment).empty()) continue;
        const auto colon = segment.find(':');
        if (colon == std::string_view::npos) {
            ++bad;
            continue;
        }
        std::string key = to_lower(trim(segment.substr(0, colon)));
        if (key.empty()) {
            ++bad;
            continue;
        }
        tags[std::move(key)] = trim(segment.substr(colon + 1));
    }
    if (malformed) *malformed = bad;
    return tags;
}

std::string format_tags(const TagMap& tags) {
    std::string out;
    for (const auto& [k, v] : tags) {
        if (!out.empty()) out.push_back(';');
        out += k;
        out.push_back(':');
        out += v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// export

namespace {

enum Column : std::size_t {
    kAssetName,
    kNetbios,
    kOs,
    kClassName,
    kFqdn,
    kIp,
    kMac,
    kAgent,
    kLocation,
    kSystem,
    kOwner,
    kTags,
};

// Lowercase name without one trailing root dot; nullopt on an empty label.
std::optional<std::string> normalize_fqdn(std::string_view raw) {
    std::string fqdn = to_lower(raw);
    if (!fqdn.empty() && fqdn.back() == '.') fqdn.pop_back();
    if (fqdn.empty()) return std::nullopt;
    std::size_t start = 0;
    while (true) {
        const auto dot = fqdn.find('.', start);
        const auto len = (dot == std::string::npos ? fqdn.size() : dot) - start;
        if (len == 0) return std::nullopt;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return fqdn;
}

struct RowContext {
    std::size_t row_index;
    std::vector<IngestIssue> defaults;

    void note(std::string field, std::string reason) {
        defaults.push_back({row_index, std::move(field), std::move(reason), IssueSeverity::default_applied});
    }
};

}  // namespace

IngestResult parse_export(std::istream& source, const IngestConfig& config) {
    csv::Reader reader(source);
    std::vector<std::string> cells;
    if (!reader.next(cells) || (cells.size() == 1 && trim(cells[0]).empty())) {
        throw IngestError("empty export: no header row");
    }
    if (cells[0].starts_with("\xEF\xBB\xBF")) cells[0].erase(0, 3);

    std::array<std::size_t, kExportColumns.size()> position{};
    for (std::size_t c = 0; c < kExportColumns.size(); ++c) {
        const auto it = std::find_if(cells.begin(), cells.end(),
                                     [&](const std::string& h) { return trim(h) == kExportColumns[c]; });
        if (it == cells.end()) {
            throw IngestError("missing mandatory column '" + std::string(kExportColumns[c]) + "'");
        }
        position[c] = static_cast<std::size_t>(it - cells.begin());
    }
    const std::size_t width = cells.size();

    IngestResult result;
    std::size_t row_index = 0;
    while (reader.next(cells)) {
        if (cells.size() == 1 && trim(cells[0]).empty()) continue;  // blank line
        const std::size_t row = row_index++;
        const auto skip = [&](std::string field, std::string reason) {
            result.issues.push_back({row, std::move(field), std::move(reason), IssueSeverity::skip_row});
        };
        if (cells.size() != width) {
            skip("row", "expected " + std::to_string(width) + " cells, found " + std::to_string(cells.size()));
            continue;
        }
        const auto cell = [&](Column c) { return trim(cells[position[c]]); };

        const auto ip = parse_ipv4(cell(kIp));
        if (!ip) {
            skip("ip", "not a dotted quad with octets in 0..255: '" + cell(kIp) + "'");
            continue;
        }
        const auto mac = parse_mac(cell(kMac));
        if (!mac) {
            skip("mac", "not a 6-byte hardware address: '" + cell(kMac) + "'");
            continue;
        }
        const auto fqdn = normalize_fqdn(cell(kFqdn));
        if (!fqdn) {
            skip("fqdn", "empty name or empty label: '" + cell(kFqdn) + "'");
            continue;
        }
        RowContext ctx{row, {}};
        AssetRecord rec;
        const std::string agent = to_lower(cell(kAgent));
        if (agent == "yes") {
            rec.agent_installed = AgentInstalled::yes;
        } else if (agent == "no") {
            rec.agent_installed = AgentInstalled::no;
        } else if (agent.empty()) {
            rec.agent_installed = AgentInstalled::no;
            ctx.note("agent_installed", "empty, defaulted to 'no'");
        } else {
            skip("agent_installed", "expected yes/no: '" + cell(kAgent) + "'");
            continue;
        }

        rec.asset_name = cell(kAssetName);
        if (rec.asset_name.empty()) ctx.note("asset_name", "empty");
        rec.netbios = cell(kNetbios);
        if (rec.netbios.empty()) ctx.note("netbios", "empty");
        const auto category = [&](Column c, std::string_view name) {
            std::string v = cell(c);
            if (v.empty()) {
                ctx.note(std::string(name), "empty, defaulted to '" + config.missing_category + "'");
                v = config.missing_category;
            }
            return v;
        };
        rec.os = category(kOs, "os");
        rec.class_name = category(kClassName, "class_name");
        rec.location = category(kLocation, "location");
        rec.system = category(kSystem, "system");
        rec.fqdn = *fqdn;
        rec.ip = format_ipv4(*ip);
        rec.mac = format_mac(*mac);
        rec.owner = to_lower(cell(kOwner));
        if (rec.owner.empty()) ctx.note("owner", "unlabeled");
        std::size_t malformed = 0;
        rec.tags = parse_tags(cells[position[kTags]], &malformed);
        if (malformed > 0) ctx.note("tags", std::to_string(malformed) + " segment(s) without key:value ignored");

        result.records.push_back(std::move(rec));
        result.issues.insert(result.issues.end(), ctx.defaults.begin(), ctx.defaults.end());
    }
    return result;
}

void write_export(std::ostream& out, std::span<const AssetRecord> records) {
    for (std::size_t c = 0; c < kExportColumns.size(); ++c) {
        if (c) out << ',';
        out << kExportColumns[c];
    }
    out << '\n';
    for (const auto& r : records) {
        out << csv::escape(r.asset_name) << ',' << csv::escape(r.netbios) << ',' << csv::escape(r.os) << ','
            << csv::escape(r.class_name) << ',' << csv::escape(r.fqdn) << ',' << r.ip << ',' << r.mac << ','
            << to_string(r.agent_installed) << ',' << csv::escape(r.location) << ',' << csv::escape(r.system)
            << ',' << csv::escape(r.owner) << ',' << csv::escape(format_tags(r.tags)) << '\n';
    }
}

}  // namespace assetowner
