// Command-line front end: run scenarios, compare traces, sweep one key.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "fcsmpcc/fcsmpcc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("FCSMPCC_OUT")) return env;
    return ".";
}

std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& sets) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& s : sets) out.push_back(fcsmpcc::parse_override(s));
    return out;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    return s;
}

// Runs the given scenarios (fanning across jobs) and writes one CSV per
// scenario plus a JSON summary. Output files are written by this single
// collector thread.
int run_and_write(const std::vector<fcsmpcc::ScenarioConfig>& scenarios, const fs::path& out_dir,
                  int jobs, const std::string& suite) {
    fs::create_directories(out_dir);
    std::vector<fcsmpcc::Trace> traces(scenarios.size());
    std::vector<std::string> errors(scenarios.size());

    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenarios.size()) return;
            try {
                traces[i] = fcsmpcc::run_scenario(scenarios[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();

    json summary;
    summary["suite"] = suite;
    summary["traces"] = json::array();
    bool failed = false;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (!errors[i].empty()) {
            std::cerr << "error: scenario '" << scenarios[i].label << "': " << errors[i] << "\n";
            failed = true;
            continue;
        }
        const fs::path file = out_dir / (sanitize(scenarios[i].label) + ".csv");
        traces[i].save(file.string());
        json entry;
        entry["label"] = scenarios[i].label;
        entry["controller"] = fcsmpcc::to_string(scenarios[i].controller);
        entry["file"] = file.string();
        entry["config_hash"] = traces[i].config_hash;
        entry["rows"] = traces[i].rows.size();
        entry["ts"] = traces[i].ts;
        entry["model_evals_per_period"] =
            traces[i].rows.empty() ? 0 : traces[i].rows.front().model_evals;
        summary["traces"].push_back(entry);
        std::cout << "wrote " << file.string() << " (" << traces[i].rows.size() << " rows)\n";
    }
    std::ofstream sf(out_dir / "summary.json");
    sf << summary.dump(2) << "\n";
    std::cout << "wrote " << (out_dir / "summary.json").string() << "\n";
    return failed ? 3 : 0;
}

json report_to_json(const fcsmpcc::CompareReport& rep) {
    json j;
    j["entries"] = json::array();
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        const fcsmpcc::TraceMetrics& m = rep.entries[i];
        json e;
        e["label"] = m.label;
        e["controller"] = m.controller;
        e["thd_pct"] = {{"ia", m.thd.ia.thd_pct},
                        {"ib", m.thd.ib.thd_pct},
                        {"ic", m.thd.ic.thd_pct},
                        {"average", m.thd.average_pct}};
        e["thd_fundamental_hz"] = m.thd.ia.fundamental_hz;
        e["thd_window"] = {m.thd.ia.window_begin, m.thd.ia.window_end};
        e["thd_harmonics"] = m.thd.ia.harmonic_count;
        e["thd_reduction_vs_baseline_pct"] = rep.thd_reduction_pct[i];
        e["ripple"] = {{"speed_rpm_pp", m.ripple.speed_rpm.peak_to_peak},
                       {"speed_rpm_rms", m.ripple.speed_rpm.rms_dev},
                       {"torque_pp", m.ripple.torque.peak_to_peak},
                       {"torque_rms", m.ripple.torque.rms_dev},
                       {"ia_pp", m.ripple.phase_a.peak_to_peak},
                       {"ia_rms", m.ripple.phase_a.rms_dev}};
        if (m.step) {
            e["step"] = {{"e_max_rpm", m.step->speed.e_max},
                         {"t_c_speed_s", m.step->speed.t_c},
                         {"speed_recovered", m.step->speed.recovered},
                         {"t_c_torque_s", m.step->torque.t_c},
                         {"torque_recovered", m.step->torque.recovered}};
        }
        j["entries"].push_back(e);
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FCS-MPCC PMSM drive simulator and analysis tool"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "Run scenario config files and write traces");
    std::vector<std::string> run_configs;
    std::vector<std::string> run_sets;
    std::string run_out = default_out_dir();
    int run_jobs = 1;
    run->add_option("--config", run_configs, "Scenario config file (repeatable)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--set", run_sets, "Override key=value (repeatable)");
    run->add_option("--out", run_out, "Output directory");
    run->add_option("--jobs", run_jobs, "Worker threads")->check(CLI::PositiveNumber);

    // ---- compare ----
    auto* cmp = app.add_subcommand("compare", "Compute metrics over trace CSVs");
    std::vector<std::string> cmp_traces;
    std::string cmp_out = default_out_dir();
    double cmp_window_start = 0.04;
    double cmp_ripple_window = 0.05;
    double cmp_band = 0.01;
    double cmp_torque_band = 0.02;
    double cmp_t_disturb = -1.0;
    cmp->add_option("traces", cmp_traces, "Trace CSV files (>= 2)")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("--out", cmp_out, "Output directory");
    cmp->add_option("--window-start", cmp_window_start, "Analysis window start [s]");
    cmp->add_option("--ripple-window", cmp_ripple_window, "Ripple window length [s]");
    cmp->add_option("--band", cmp_band, "Speed recovery band fraction");
    cmp->add_option("--torque-band", cmp_torque_band, "Torque recovery band fraction");
    cmp->add_option("--t-disturb", cmp_t_disturb, "Disturbance time for step metrics [s]");

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Grid over one config key");
    std::string sweep_config;
    std::string sweep_key;
    std::vector<std::string> sweep_values;
    std::vector<std::string> sweep_sets;
    std::string sweep_out = default_out_dir();
    int sweep_jobs = 1;
    sweep->add_option("--config", sweep_config, "Scenario config file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--key", sweep_key, "Dotted config key to sweep")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")
        ->required()
        ->delimiter(',');
    sweep->add_option("--set", sweep_sets, "Override key=value (repeatable)");
    sweep->add_option("--out", sweep_out, "Output directory");
    sweep->add_option("--jobs", sweep_jobs, "Worker threads")->check(CLI::PositiveNumber);

    // ---- version ----
    auto* version = app.add_subcommand("version", "Print version");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*version) {
            std::cout << "fcsmpcc " << fcsmpcc::kVersion << "\n";
            return 0;
        }
        if (*run) {
            const auto overrides = parse_overrides(run_sets);
            std::vector<fcsmpcc::ScenarioConfig> scenarios;
            for (const std::string& cfg : run_configs) {
                auto loaded = fcsmpcc::load_scenarios(cfg, overrides);
                scenarios.insert(scenarios.end(), loaded.begin(), loaded.end());
            }
            return run_and_write(scenarios, run_out, run_jobs, "run");
        }
        if (*cmp) {
            std::vector<fcsmpcc::Trace> traces;
            for (const std::string& p : cmp_traces) traces.push_back(fcsmpcc::Trace::load(p));
            fcsmpcc::MetricSpec spec;
            spec.thd_window_start = cmp_window_start;
            spec.ripple_window = cmp_ripple_window;
            spec.speed_band = cmp_band;
            spec.torque_band = cmp_torque_band;
            if (cmp_t_disturb >= 0.0) spec.t_disturb = cmp_t_disturb;
            const fcsmpcc::CompareReport rep = fcsmpcc::compare_report(traces, spec);
            const std::string text = fcsmpcc::format_report_text(rep);
            std::cout << text;
            fs::create_directories(cmp_out);
            std::ofstream(fs::path(cmp_out) / "report.txt") << text;
            std::ofstream(fs::path(cmp_out) / "report.json")
                << report_to_json(rep).dump(2) << "\n";
            std::cout << "wrote " << (fs::path(cmp_out) / "report.json").string() << "\n";
            return 0;
        }
        if (*sweep) {
            auto overrides = parse_overrides(sweep_sets);
            std::vector<fcsmpcc::ScenarioConfig> scenarios;
            for (const std::string& value : sweep_values) {
                auto with_value = overrides;
                with_value.emplace_back(sweep_key, value);
                auto loaded = fcsmpcc::load_scenarios(sweep_config, with_value);
                for (fcsmpcc::ScenarioConfig& c : loaded) {
                    c.label += "_" + sanitize(sweep_key) + "_" + sanitize(value);
                    scenarios.push_back(std::move(c));
                }
            }
            return run_and_write(scenarios, sweep_out, sweep_jobs, "sweep:" + sweep_key);
        }
    } catch (const fcsmpcc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fcsmpcc::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
