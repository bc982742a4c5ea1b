#include "assetowner/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <httplib.h>

#include "json_params.hpp"

namespace assetowner {

using detail::json;
namespace fs = std::filesystem;

double round_sig6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

namespace {

json num(double x) { return round_sig6(x); }

json opt(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

void check_version(const json& doc, std::string_view what) {
    const auto it = doc.find("schema_version");
    if (it == doc.end()) throw ReportError(std::string(what) + ": missing schema_version");
    if (it->get<int>() != kArtifactSchemaVersion) {
        throw ReportError(std::string(what) + ": unsupported schema_version " + std::to_string(it->get<int>()));
    }
}

json parse(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ReportError(std::string(what) + ": " + e.what());
    }
}

template <class F>
auto guarded(std::string_view what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ReportError(std::string(what) + ": " + e.what());
    } catch (const ModelError& e) {
        throw ReportError(std::string(what) + ": " + e.what());
    }
}

json importance_json(const FeatureImportance& imp) {
    json out = json::object();
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[std::string(kFeatureNames[f])] = num(imp[f]);
    return out;
}

FeatureImportance importance_from(const json& j) {
    FeatureImportance out{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = j.at(std::string(kFeatureNames[f])).get<double>();
    return out;
}

json matrix_json(const ConfusionMatrix& cm) { return {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}}; }

ConfusionMatrix matrix_from(const json& j) {
    return {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>(),
            j.at("fn").get<std::uint64_t>()};
}

constexpr std::array<std::string_view, 4> kMeanNames = {"sensitivity", "specificity", "precision", "f1"};

}  // namespace

// ---------------------------------------------------------------------------
// EDA

std::string eda_to_json(const EdaSummary& eda) {
    const json doc = {{"schema_version", kArtifactSchemaVersion},
                      {"n_rows", eda.n_rows},
                      {"frequencies", eda.frequencies},
                      {"owners", eda.owners},
                      {"cidr16_by_cidr8", eda.cidr16_by_cidr8},
                      {"os_by_parent", eda.os_by_parent}};
    return doc.dump(1) + "\n";
}

EdaSummary eda_from_json(std::string_view text) {
    const json doc = parse(text, "eda_summary");
    check_version(doc, "eda_summary");
    return guarded("eda_summary", [&] {
        EdaSummary e;
        e.n_rows = doc.at("n_rows").get<std::size_t>();
        e.frequencies = doc.at("frequencies").get<decltype(e.frequencies)>();
        e.owners = doc.at("owners").get<FrequencyTable>();
        e.cidr16_by_cidr8 = doc.at("cidr16_by_cidr8").get<decltype(e.cidr16_by_cidr8)>();
        e.os_by_parent = doc.at("os_by_parent").get<decltype(e.os_by_parent)>();
        return e;
    });
}

// ---------------------------------------------------------------------------
// run report

std::string report_to_json(const RunReport& report) {
    json models = json::object();
    for (const auto& fr : report.families) {
        json iterations = json::array();
        for (const auto& it : fr.iterations) {
            iterations.push_back({{"iteration", it.iteration},
                                  {"params", detail::params_json(it.params)},
                                  {"cv_error", num(it.cv_error)},
                                  {"test", matrix_json(it.test)},
                                  {"test_error", num(it.test_error)},
                                  {"importance", it.importance ? importance_json(*it.importance) : json(nullptr)}});
        }
        json means = json::object();
        for (std::size_t j = 0; j < kMeanNames.size(); ++j) {
            means[std::string(kMeanNames[j])] = {{"mean", opt(fr.iteration_means[j].mean)},
                                                 {"undefined", fr.iteration_means[j].undefined}};
        }
        const auto& m = fr.metrics;
        models[std::string(to_string(fr.family))] = {
            {"iterations", std::move(iterations)},
            {"aggregate", matrix_json(fr.aggregate)},
            {"metrics",
             {{"accuracy", num(m.accuracy)},
              {"error_rate", num(m.error_rate)},
              {"sensitivity", opt(m.sensitivity)},
              {"specificity", opt(m.specificity)},
              {"precision", opt(m.precision)},
              {"f1", opt(m.f1)}}},
            {"iteration_means", std::move(means)},
            {"error_summary",
             {{"min", num(fr.errors.min)},
              {"q1", num(fr.errors.q1)},
              {"median", num(fr.errors.median)},
              {"q3", num(fr.errors.q3)},
              {"max", num(fr.errors.max)}}},
            {"mean_importance", fr.mean_importance ? importance_json(*fr.mean_importance) : json(nullptr)}};
    }
    const json doc = {{"schema_version", kArtifactSchemaVersion},
                      {"owner", report.owner},
                      {"master_seed", report.master_seed},
                      {"iterations", report.iterations},
                      {"grid_profile", report.grid_profile},
                      {"labeled_rows", report.labeled_rows},
                      {"positives", report.positives},
                      {"models", std::move(models)}};
    return doc.dump(1) + "\n";
}

RunReport report_from_json(std::string_view text) {
    const json doc = parse(text, "run report");
    check_version(doc, "run report");
    return guarded("run report", [&] {
        RunReport r;
        r.owner = doc.at("owner").get<std::string>();
        r.master_seed = doc.at("master_seed").get<std::uint64_t>();
        r.iterations = doc.at("iterations").get<std::size_t>();
        r.grid_profile = doc.at("grid_profile").get<std::string>();
        r.labeled_rows = doc.at("labeled_rows").get<std::size_t>();
        r.positives = doc.at("positives").get<std::size_t>();
        for (const auto& [name, fj] : doc.at("models").items()) {
            FamilyReport fr;
            fr.family = family_from_string(name);
            for (const auto& ij : fj.at("iterations")) {
                IterationResult it;
                it.iteration = ij.at("iteration").get<std::size_t>();
                it.params = detail::params_from(fr.family, ij.at("params"));
                it.cv_error = ij.at("cv_error").get<double>();
                it.test = matrix_from(ij.at("test"));
                it.test_error = ij.at("test_error").get<double>();
                if (!ij.at("importance").is_null()) it.importance = importance_from(ij.at("importance"));
                fr.iterations.push_back(std::move(it));
            }
            if (fr.iterations.size() != r.iterations) throw ReportError("run report: iteration count mismatch");
            fr.aggregate = matrix_from(fj.at("aggregate"));
            const auto& mj = fj.at("metrics");
            fr.metrics.accuracy = mj.at("accuracy").get<double>();
            fr.metrics.error_rate = mj.at("error_rate").get<double>();
            fr.metrics.sensitivity = opt_from(mj.at("sensitivity"));
            fr.metrics.specificity = opt_from(mj.at("specificity"));
            fr.metrics.precision = opt_from(mj.at("precision"));
            fr.metrics.f1 = opt_from(mj.at("f1"));
            for (std::size_t j = 0; j < kMeanNames.size(); ++j) {
                const auto& e = fj.at("iteration_means").at(std::string(kMeanNames[j]));
                fr.iteration_means[j] = {opt_from(e.at("mean")), e.at("undefined").get<std::size_t>()};
            }
            const auto& sj = fj.at("error_summary");
            fr.errors = {sj.at("min").get<double>(), sj.at("q1").get<double>(), sj.at("median").get<double>(),
                         sj.at("q3").get<double>(), sj.at("max").get<double>()};
            if (!fj.at("mean_importance").is_null()) fr.mean_importance = importance_from(fj.at("mean_importance"));
            r.families.push_back(std::move(fr));
        }
        std::sort(r.families.begin(), r.families.end(),
                  [](const FamilyReport& a, const FamilyReport& b) { return a.family < b.family; });
        return r;
    });
}

// ---------------------------------------------------------------------------
// predictions

PredictionTable make_prediction_table(const RunReport& report, const CategoricalTable& table) {
    PredictionTable out;
    out.owner = report.owner;
    for (const auto& fr : report.families) out.models.push_back(fr.family);
    out.rows = report.predictions;
    std::set<std::uint32_t> rows;
    for (const auto& p : report.predictions) rows.insert(p.row);
    for (auto r : rows) {
        if (r >= table.rows()) throw ReportError("prediction row " + std::to_string(r) + " outside the table");
        PredictionTable::Asset a;
        a.row = r;
        const auto decoded = table.decode(r);
        a.values = decoded.values;
        out.assets.push_back(std::move(a));
    }
    return out;
}

std::string predictions_to_json(const PredictionTable& t) {
    json models = json::array();
    for (auto f : t.models) models.push_back(to_string(f));
    json features = json::array();
    for (auto name : kFeatureNames) features.push_back(name);
    json assets = json::array();
    for (const auto& a : t.assets) assets.push_back({{"row", a.row}, {"values", a.values}});
    json rows = json::array();
    for (const auto& p : t.rows) {
        json r = {p.iteration, p.row, p.actual ? 1 : 0};
        for (auto l : p.labels) r.push_back(l);
        rows.push_back(std::move(r));
    }
    const json doc = {{"schema_version", kArtifactSchemaVersion},
                      {"owner", t.owner},
                      {"features", std::move(features)},
                      {"models", std::move(models)},
                      {"row_columns", {"iteration", "row", "actual"}},
                      {"assets", std::move(assets)},
                      {"rows", std::move(rows)}};
    return doc.dump() + "\n";
}

PredictionTable predictions_from_json(std::string_view text) {
    const json doc = parse(text, "predictions");
    check_version(doc, "predictions");
    return guarded("predictions", [&] {
        PredictionTable t;
        t.owner = doc.at("owner").get<std::string>();
        for (const auto& m : doc.at("models")) t.models.push_back(family_from_string(m.get<std::string>()));
        const auto features = doc.at("features").get<std::vector<std::string>>();
        if (features.size() != kFeatureCount || !std::equal(features.begin(), features.end(), kFeatureNames.begin()))
            throw ReportError("predictions: unexpected feature columns");
        for (const auto& a : doc.at("assets")) {
            t.assets.push_back({a.at("row").get<std::uint32_t>(),
                                a.at("values").get<std::array<std::string, kFeatureCount>>()});
        }
        for (const auto& r : doc.at("rows")) {
            if (r.size() != 3 + t.models.size()) throw ReportError("predictions: row width mismatch");
            PredictionRow p;
            p.iteration = r[0].get<std::uint32_t>();
            p.row = r[1].get<std::uint32_t>();
            p.actual = r[2].get<int>() != 0;
            for (std::size_t k = 0; k < t.models.size(); ++k) p.labels.push_back(r[3 + k].get<std::uint8_t>());
            t.rows.push_back(std::move(p));
        }
        return t;
    });
}

std::string owners_to_json(const std::vector<std::string>& owners) {
    const json doc = {{"schema_version", kArtifactSchemaVersion}, {"owners", owners}};
    return doc.dump(1) + "\n";
}

std::vector<std::string> owners_from_json(std::string_view text) {
    const json doc = parse(text, "owners");
    check_version(doc, "owners");
    return guarded("owners", [&] { return doc.at("owners").get<std::vector<std::string>>(); });
}

std::string encode_owner(std::string_view owner) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (std::size_t i = 0; i < owner.size(); ++i) {
        const auto c = static_cast<unsigned char>(owner[i]);
        const bool plain = std::isalnum(c) || c == '_' || c == '-' || (c == '.' && i > 0);
        if (plain) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += kHex[c >> 4];
            out += kHex[c & 15];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// bundle

ArtifactBundle make_bundle(const CategoricalTable& table, std::vector<RunReport> reports) {
    ArtifactBundle b;
    b.eda = summarize(table);
    std::sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& c) { return a.owner < c.owner; });
    for (auto& r : reports) {
        b.predictions.push_back(make_prediction_table(r, table));
        r.predictions.clear();
    }
    b.reports = std::move(reports);
    return b;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw ReportError("error reading " + path.string());
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw ReportError("cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ReportError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw ReportError("error writing " + path.string());
}

void write_artifacts(const ArtifactBundle& bundle, const fs::path& directory) {
    const ArtifactLayout layout{directory};
    std::vector<std::string> owners;
    for (const auto& r : bundle.reports) owners.push_back(r.owner);
    std::sort(owners.begin(), owners.end());
    if (std::adjacent_find(owners.begin(), owners.end()) != owners.end()) throw ReportError("duplicate owner report");
    std::set<std::string> with_predictions;
    for (const auto& p : bundle.predictions) with_predictions.insert(p.owner);
    if (with_predictions != std::set<std::string>(owners.begin(), owners.end())) {
        throw ReportError("every report needs exactly one prediction table");
    }

    write_file(layout.eda(), eda_to_json(bundle.eda));
    write_file(layout.owners(), owners_to_json(owners));
    for (const auto& r : bundle.reports) write_file(layout.report(r.owner), report_to_json(r));
    for (const auto& p : bundle.predictions) write_file(layout.predictions(p.owner), predictions_to_json(p));
}

ArtifactBundle read_artifacts(const fs::path& directory) {
    const ArtifactLayout layout{directory};
    const auto labelled = [](const fs::path& p, auto&& f) {
        try {
            return f(read_file(p));
        } catch (const ReportError& e) {
            throw ReportError(p.string() + ": " + e.what());
        }
    };
    ArtifactBundle b;
    b.eda = labelled(layout.eda(), [](const std::string& s) { return eda_from_json(s); });
    const auto owners = labelled(layout.owners(), [](const std::string& s) { return owners_from_json(s); });
    for (const auto& owner : owners) {
        const auto rp = layout.report(owner);
        auto report = labelled(rp, [](const std::string& s) { return report_from_json(s); });
        if (report.owner != owner) throw ReportError(rp.string() + ": owner field is '" + report.owner + "'");
        const auto pp = layout.predictions(owner);
        auto table = labelled(pp, [](const std::string& s) { return predictions_from_json(s); });
        if (table.owner != owner) throw ReportError(pp.string() + ": owner field is '" + table.owner + "'");
        b.reports.push_back(std::move(report));
        b.predictions.push_back(std::move(table));
    }
    return b;
}

// ---------------------------------------------------------------------------
// server

struct ArtifactServer::Impl {
    httplib::Server server;
    std::string eda, owners;
    std::map<std::string, std::string> reports, predictions;
};

ArtifactServer::ArtifactServer(const fs::path& directory, std::optional<fs::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
    read_artifacts(directory);  // validates every file before anything is served
    const ArtifactLayout layout{directory};
    impl_->eda = read_file(layout.eda());
    impl_->owners = read_file(layout.owners());
    for (const auto& owner : owners_from_json(impl_->owners)) {
        impl_->reports[owner] = read_file(layout.report(owner));
        impl_->predictions[owner] = read_file(layout.predictions(owner));
    }

    auto& svr = impl_->server;
    auto* impl = impl_.get();
    const auto send = [](httplib::Response& res, const std::string& body) {
        res.set_content(body, "application/json");
    };
    const auto not_found = [](httplib::Response& res, const std::string& what) {
        res.status = 404;
        res.set_content(json{{"error", what}}.dump() + "\n", "application/json");
    };
    svr.Get("/api/eda", [=](const httplib::Request&, httplib::Response& res) { send(res, impl->eda); });
    svr.Get("/api/owners", [=](const httplib::Request&, httplib::Response& res) { send(res, impl->owners); });
    svr.Get(R"(/api/report/(.+))", [=](const httplib::Request& req, httplib::Response& res) {
        const auto it = impl->reports.find(req.matches[1]);
        if (it == impl->reports.end()) return not_found(res, "unknown owner");
        send(res, it->second);
    });
    svr.Get(R"(/api/predictions/(.+))", [=](const httplib::Request& req, httplib::Response& res) {
        const auto it = impl->predictions.find(req.matches[1]);
        if (it == impl->predictions.end()) return not_found(res, "unknown owner");
        send(res, it->second);
    });
    if (static_dir) {
        if (!svr.set_mount_point("/", static_dir->string())) {
            throw ReportError("static directory " + static_dir->string() + " does not exist");
        }
    }
    svr.set_error_handler([=](const httplib::Request&, httplib::Response& res) {
        if (res.status == 404 && res.body.empty()) not_found(res, "not found");
    });
}

ArtifactServer::~ArtifactServer() { stop(); }

int ArtifactServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw ReportError("cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw ReportError("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void ArtifactServer::run() { impl_->server.listen_after_bind(); }

void ArtifactServer::stop() {
    if (impl_) impl_->server.stop();
}

void ArtifactServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace assetowner
