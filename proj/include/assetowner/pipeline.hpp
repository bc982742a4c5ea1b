#pragma once

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "assetowner/evaluation.hpp"
#include "assetowner/features.hpp"
#include "assetowner/ingest.hpp"
#include "assetowner/report.hpp"

namespace assetowner {

struct LoadedDataset {
    IngestResult ingest;
    std::vector<FeatureRow> rows;  // parallel to ingest.records
    CategoricalTable table;
};

LoadedDataset load_dataset(std::istream& csv, const OuiDirectory& directory);

/// Runs MCCV for each owner (all eligible owners when `owners` is empty) and
/// assembles the artifact bundle. `progress` is called after each owner.
ArtifactBundle evaluate_owners(const LoadedDataset& data, const EvaluationConfig& config,
                               std::vector<std::string> owners = {},
                               const std::function<void(const RunReport&)>& progress = {});

/// Model used to label new assets for one owner: the family with the lowest
/// median test error (ties to the earlier family) and its most frequently
/// chosen hyperparameters (ties to the earliest iteration), refit on every
/// labeled row.
struct OwnerModel {
    std::string owner;
    Family family = Family::adaboost;
    HyperParams params;
    FittedModel model;
};

OwnerModel select_owner_model(const BinaryProblem& problem, const RunReport& report);

struct OwnerAssignment {
    std::size_t table_row = 0;
    std::string owner;   // highest-scoring owner; ties to the earlier owner
    double score = 0.0;
};

// Scores every unlabeled table row under each owner model.
std::vector<OwnerAssignment> assign_owners(const CategoricalTable& table, const std::vector<OwnerModel>& models);

}  // namespace assetowner
