#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "assetowner/dataset.hpp"
#include "assetowner/evaluation.hpp"

namespace assetowner {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kArtifactSchemaVersion = 1;

// Value written for a real: %.6g, read back as a double.
double round_sig6(double x);

/// Test-row predictions of one owner in columnar form: each asset's feature
/// values appear once, rows reference assets by table row.
struct PredictionTable {
    std::string owner;
    std::vector<Family> models;
    struct Asset {
        std::uint32_t row = 0;
        std::array<std::string, kFeatureCount> values;
        friend bool operator==(const Asset&, const Asset&) = default;
    };
    std::vector<Asset> assets;  // ascending row
    std::vector<PredictionRow> rows;

    friend bool operator==(const PredictionTable&, const PredictionTable&) = default;
};

PredictionTable make_prediction_table(const RunReport& report, const CategoricalTable& table);

struct ArtifactBundle {
    EdaSummary eda;
    std::vector<RunReport> reports;  // predictions live in `predictions`
    std::vector<PredictionTable> predictions;
};

ArtifactBundle make_bundle(const CategoricalTable& table, std::vector<RunReport> reports);

std::string eda_to_json(const EdaSummary& eda);
EdaSummary eda_from_json(std::string_view text);

// The report document omits per-row predictions; see predictions_to_json.
std::string report_to_json(const RunReport& report);
RunReport report_from_json(std::string_view text);

std::string predictions_to_json(const PredictionTable& table);
PredictionTable predictions_from_json(std::string_view text);

std::string owners_to_json(const std::vector<std::string>& owners);
std::vector<std::string> owners_from_json(std::string_view text);

// File-name-safe form of an owner: bytes outside [A-Za-z0-9_-] and a
// leading '.' become %XX.
std::string encode_owner(std::string_view owner);

struct ArtifactLayout {
    std::filesystem::path root;

    std::filesystem::path eda() const { return root / "eda_summary.json"; }
    std::filesystem::path owners() const { return root / "owners.json"; }
    std::filesystem::path report(std::string_view owner) const {
        return root / "reports" / (encode_owner(owner) + ".json");
    }
    std::filesystem::path predictions(std::string_view owner) const {
        return root / "predictions" / (encode_owner(owner) + ".json");
    }
};

/// Writes eda_summary.json, owners.json, reports/<owner>.json and
/// predictions/<owner>.json. Output bytes depend only on the bundle.
void write_artifacts(const ArtifactBundle& bundle, const std::filesystem::path& directory);

// Throws ReportError naming the offending file.
ArtifactBundle read_artifacts(const std::filesystem::path& directory);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Read-only HTTP view of an artifact directory. Every body is loaded and
/// validated at construction; requests only route to those bytes.
///   GET /api/eda                eda_summary.json
///   GET /api/owners             owners.json
///   GET /api/report/<owner>     reports/<owner>.json
///   GET /api/predictions/<owner> predictions/<owner>.json
///   GET /...                    files under static_dir, when given
class ArtifactServer {
public:
    explicit ArtifactServer(const std::filesystem::path& directory,
                            std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~ArtifactServer();
    ArtifactServer(const ArtifactServer&) = delete;
    ArtifactServer& operator=(const ArtifactServer&) = delete;

    // Port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    void run();  // blocks until stop()
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace assetowner
