#include "assetowner/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "assetowner/rng.hpp"

namespace assetowner {

LoadedDataset load_dataset(std::istream& csv, const OuiDirectory& directory) {
    LoadedDataset d;
    d.ingest = parse_export(csv);
    if (d.ingest.records.empty()) throw DatasetError("no usable rows in the export");
    d.rows.reserve(d.ingest.records.size());
    for (const auto& r : d.ingest.records) d.rows.push_back(engineer(r, directory));
    d.table = build_table(d.rows);
    return d;
}

ArtifactBundle evaluate_owners(const LoadedDataset& data, const EvaluationConfig& config,
                               std::vector<std::string> owners,
                               const std::function<void(const RunReport&)>& progress) {
    if (owners.empty()) owners = eligible_owners(data.table);
    std::sort(owners.begin(), owners.end());
    owners.erase(std::unique(owners.begin(), owners.end()), owners.end());
    std::vector<RunReport> reports;
    for (const auto& owner : owners) {
        const BinaryProblem problem = make_binary_problem(data.table, owner);
        reports.push_back(run_mccv(problem, config));
        if (progress) progress(reports.back());
    }
    return make_bundle(data.table, std::move(reports));
}

OwnerModel select_owner_model(const BinaryProblem& problem, const RunReport& report) {
    if (report.families.empty()) throw EvaluationError("report for '" + report.owner + "' has no models");
    const FamilyReport* best = &report.families.front();
    for (const auto& fr : report.families)
        if (fr.errors.median < best->errors.median) best = &fr;

    // Modal hyperparameters, ties to the first seen.
    std::vector<std::pair<HyperParams, std::size_t>> counts;
    for (const auto& it : best->iterations) {
        auto hit = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == it.params; });
        if (hit == counts.end()) counts.emplace_back(it.params, 1);
        else ++hit->second;
    }
    const auto mode = std::max_element(counts.begin(), counts.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });

    OwnerModel out;
    out.owner = report.owner;
    out.family = best->family;
    out.params = mode->first;
    std::vector<std::size_t> all(problem.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto seed = derive_seed(report.master_seed, {0x1ABE1, static_cast<std::uint64_t>(out.family)});
    out.model = fit_model(problem, all, out.params, seed);
    return out;
}

std::vector<OwnerAssignment> assign_owners(const CategoricalTable& table, const std::vector<OwnerModel>& models) {
    if (models.empty()) throw EvaluationError("no owner models to label with");
    std::vector<OwnerAssignment> out;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (!table.owner(r).empty()) continue;
        const FeatureRow row = table.decode(r);
        OwnerAssignment a;
        a.table_row = r;
        a.score = -1.0;
        for (const auto& m : models) {
            const auto codes = encode_row(m.model.vocabulary, row);
            const double s = predict(m.model, codes).score;
            if (s > a.score) {
                a.score = s;
                a.owner = m.owner;
            }
        }
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace assetowner
