#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "assetowner/model_io.hpp"
#include "assetowner/pipeline.hpp"
#include "assetowner/synth.hpp"

#ifndef ASSETOWNER_MANUF_PATH
#define ASSETOWNER_MANUF_PATH "data/manuf"
#endif

namespace ao = assetowner;
namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

ao::LoadedDataset load(const std::string& input, const std::string& manuf) {
    auto in = open_input(input);
    const auto dir = ao::OuiDirectory::load(manuf);
    auto data = ao::load_dataset(in, dir);
    std::cerr << input << ": " << data.ingest.records.size() << " rows kept, " << data.ingest.skipped_rows()
              << " skipped\n";
    return data;
}

ao::ArtifactServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asset ownership modelling over CMDB exports"};
    app.require_subcommand(1);
    std::string manuf = ASSETOWNER_MANUF_PATH;
    app.add_option("--manuf", manuf, "Wireshark manuf file for OUI vendors")->capture_default_str();

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic inventory CSV");
    std::string gen_config, gen_out, gen_provenance;
    gen->add_option("--config", gen_config, "Synthetic config JSON (default: built-in benchmark)");
    gen->add_option("--out", gen_out, "Output CSV")->required();
    gen->add_option("--provenance", gen_provenance, "Also write the pre-noise owner of each row");

    auto* bcfg = app.add_subcommand("benchmark-config", "Write the built-in benchmark config as JSON");
    std::string bcfg_out;
    bcfg->add_option("--out", bcfg_out, "Output file (default: stdout)");

    // ingest
    auto* ing = app.add_subcommand("ingest", "Validate a CMDB export");
    std::string ing_in, ing_out, ing_issues;
    ing->add_option("--input", ing_in, "Export CSV")->required();
    ing->add_option("--out", ing_out, "Cleaned CSV");
    ing->add_option("--issues", ing_issues, "Issue list CSV");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Write eda_summary.json");
    std::string ana_in, ana_out;
    ana->add_option("--input", ana_in, "Export CSV")->required();
    ana->add_option("--out", ana_out, "Artifact directory")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Monte Carlo cross validation per owner");
    std::string ev_in, ev_out;
    std::vector<std::string> ev_owners;
    std::size_t ev_iterations = 100;
    std::uint64_t ev_seed = ao::kDefaultMasterSeed;
    bool ev_desk = false, ev_serial = false;
    ev->add_option("--input", ev_in, "Export CSV")->required();
    ev->add_option("--out", ev_out, "Artifact directory")->required();
    ev->add_option("--owner", ev_owners, "Owner to evaluate (repeatable; default all eligible)");
    ev->add_option("--iterations", ev_iterations, "MCCV iterations")->capture_default_str()->check(CLI::PositiveNumber);
    ev->add_option("--seed", ev_seed, "Master seed")->capture_default_str();
    ev->add_flag("--desk-grid", ev_desk, "Forest ntree in {100, 250} instead of {250, ..., 2000}");
    ev->add_flag("--serial", ev_serial, "Run iterations on one thread");

    // label
    auto* lab = app.add_subcommand("label", "Predict owners of unlabeled assets");
    std::string lab_in, lab_artifacts, lab_out, lab_models;
    lab->add_option("--input", lab_in, "Export CSV")->required();
    lab->add_option("--artifacts", lab_artifacts, "Directory written by evaluate")->required();
    lab->add_option("--out", lab_out, "Predicted owners CSV")->required();
    lab->add_option("--models", lab_models, "Also save the fitted models here");

    // serve
    auto* srv = app.add_subcommand("serve", "Serve an artifact directory over HTTP");
    std::string srv_dir, srv_host = "127.0.0.1", srv_static;
    int srv_port = 8080;
    srv->add_option("--dir", srv_dir, "Artifact directory")->required();
    srv->add_option("--host", srv_host)->capture_default_str();
    srv->add_option("--port", srv_port)->capture_default_str();
    srv->add_option("--static", srv_static, "Dashboard files served under /");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            ao::SynthConfig config = ao::benchmark_config();
            if (!gen_config.empty()) {
                auto in = open_input(gen_config);
                std::stringstream ss;
                ss << in.rdbuf();
                config = ao::parse_synth_config(ss.str());
            }
            const auto inv = ao::generate_inventory(config);
            std::ostringstream csv;
            ao::write_export(csv, inv.records);
            ao::write_file(gen_out, csv.str());
            if (!gen_provenance.empty()) {
                std::ostringstream prov;
                prov << "row,rule_owner\n";
                for (std::size_t i = 0; i < inv.provenance.true_rule_owner.size(); ++i)
                    prov << i << ',' << ao::csv::escape(inv.provenance.true_rule_owner[i]) << '\n';
                ao::write_file(gen_provenance, prov.str());
            }
            std::cerr << "wrote " << inv.records.size() << " rows to " << gen_out << "\n";
        } else if (*bcfg) {
            const auto text = ao::synth_config_to_json(ao::benchmark_config());
            if (bcfg_out.empty()) std::cout << text;
            else ao::write_file(bcfg_out, text);
        } else if (*ing) {
            auto in = open_input(ing_in);
            const auto result = ao::parse_export(in);
            std::cerr << result.records.size() << " rows kept, " << result.skipped_rows() << " skipped, "
                      << result.issues.size() << " issues\n";
            if (!ing_out.empty()) {
                std::ostringstream csv;
                ao::write_export(csv, result.records);
                ao::write_file(ing_out, csv.str());
            }
            std::ostringstream issues;
            issues << "row_index,field,severity,reason\n";
            for (const auto& i : result.issues) {
                issues << i.row_index << ',' << ao::csv::escape(i.field) << ',' << ao::to_string(i.severity) << ','
                       << ao::csv::escape(i.reason) << '\n';
            }
            if (!ing_issues.empty()) ao::write_file(ing_issues, issues.str());
            else std::cout << issues.str();
        } else if (*ana) {
            const auto data = load(ana_in, manuf);
            ao::write_file(ao::ArtifactLayout{ana_out}.eda(), ao::eda_to_json(ao::summarize(data.table)));
        } else if (*ev) {
            const auto data = load(ev_in, manuf);
            ao::EvaluationConfig config;
            config.grid = ev_desk ? ao::HyperGrid::desk() : ao::HyperGrid::full();
            config.iterations = ev_iterations;
            config.master_seed = ev_seed;
            config.parallel = !ev_serial;
            const auto start = std::chrono::steady_clock::now();
            const auto bundle = ao::evaluate_owners(data, config, ev_owners, [&](const ao::RunReport& r) {
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                std::cerr << r.owner << ":";
                for (const auto& fr : r.families) std::cerr << ' ' << ao::to_string(fr.family) << '=' << fr.errors.median;
                std::cerr << "  (" << secs << " s)\n";
            });
            ao::write_artifacts(bundle, ev_out);
        } else if (*lab) {
            const auto data = load(lab_in, manuf);
            const auto bundle = ao::read_artifacts(lab_artifacts);
            std::vector<ao::OwnerModel> models;
            for (const auto& report : bundle.reports) {
                const auto problem = ao::make_binary_problem(data.table, report.owner);
                models.push_back(ao::select_owner_model(problem, report));
                std::cerr << report.owner << ": " << ao::to_string(models.back().family) << "\n";
                if (!lab_models.empty()) {
                    ao::write_file(fs::path(lab_models) / (ao::encode_owner(report.owner) + ".model.json"),
                                   ao::model_to_json(models.back().model));
                }
            }
            std::ostringstream out;
            out << "asset_name,fqdn,ip,predicted_owner,score\n";
            for (const auto& a : ao::assign_owners(data.table, models)) {
                const auto& rec = data.ingest.records[a.table_row];
                out << ao::csv::escape(rec.asset_name) << ',' << ao::csv::escape(rec.fqdn) << ',' << rec.ip << ','
                    << ao::csv::escape(a.owner) << ',' << a.score << '\n';
            }
            ao::write_file(lab_out, out.str());
        } else if (*srv) {
            std::optional<fs::path> static_dir;
            if (!srv_static.empty()) static_dir = srv_static;
            ao::ArtifactServer server(srv_dir, static_dir);
            const int port = server.bind(srv_host, srv_port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "serving " << srv_dir << " on http://" << srv_host << ':' << port << "\n";
            server.run();
            g_server = nullptr;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
