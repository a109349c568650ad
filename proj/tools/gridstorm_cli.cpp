// gridstorm command-line driver.
//
// Exit codes: 0 success, 1 usage error, 2 configuration or input error,
// 3 simulation error (solver failure, numerical breakdown).

#include "gridstorm/engine.hpp"
#include "gridstorm/error.hpp"
#include "gridstorm/metrics.hpp"
#include "gridstorm/presets.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gridstorm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitSimulation = 3;

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<TimeWindow> window_for(const std::string& text, const SimOutput& grid) {
    if (text.empty()) return std::nullopt;
    const auto [lo, hi] = parse_window(text);
    return TimeWindow{lo.value_or(grid.start), hi.value_or(grid.time(grid.steps))};
}

std::vector<SimConfig> expand(const RunFile& rf, const std::vector<std::string>& scenario_override) {
    std::vector<fs::path> files = rf.scenario_files;
    if (!scenario_override.empty()) files.assign(scenario_override.begin(), scenario_override.end());
    if (files.empty()) throw ValidationError("no scenarios configured");
    std::vector<SimConfig> out;
    for (const auto& f : files) {
        SimConfig c = rf.base;
        c.scenario = load_scenario(f);
        out.push_back(std::move(c));
    }
    return out;
}

struct Options {
    std::string config = "run.json";
    std::vector<std::string> scenarios;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string window;
    bool force = false;
    unsigned threads = 0;
    // init
    std::string preset = "desk";
    std::string init_dir;
    // report / compare
    std::vector<std::string> outputs;
    std::string reference;
};

int cmd_init(const Options& o) {
    const auto preset = parse_preset(o.preset);
    const fs::path dir = o.init_dir.empty() ? fs::path(o.out.empty() ? "." : o.out) : fs::path(o.init_dir);
    write_preset(dir, preset, o.seed.value_or(1), o.force);
    std::cout << "wrote " << o.preset << " configuration to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_run(const Options& o) {
    RunFile rf = load_run_file(o.config);
    if (o.seed) rf.base.seed = *o.seed;
    if (o.threads) rf.base.threads = o.threads;
    if (!o.out.empty()) rf.base.output_path = o.out;
    for (const auto& cfg : expand(rf, o.scenarios)) {
        const auto t0 = std::chrono::steady_clock::now();
        const SimOutput out = run(cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const fs::path dir = cfg.output_path / std::string(to_string(cfg.scenario.case_id));
        write_output(out, dir, utc_now());
        const auto p = peak(out);
        std::cout << to_string(cfg.scenario.case_id) << ": peak " << p.mw << " MW at t=" << p.time << ", "
                  << energy_mwh(out) << " MWh, " << secs << " s -> " << dir.string() << '\n';
    }
    return kExitOk;
}

int cmd_report(const Options& o) {
    if (o.outputs.size() != 1) throw ValidationError("report takes exactly one output directory");
    const SimOutput out = read_output(o.outputs.front());
    const auto w = window_for(o.window, out);
    const auto p = peak(out, w);
    nlohmann::json j{{"case", out.metadata.count("case") ? out.metadata.at("case") : ""},
                     {"peak_mw", p.mw},
                     {"peak_time", p.time},
                     {"energy_mwh", energy_mwh(out, w)},
                     {"losses_mwh", losses_mwh(out, w)}};
    const auto v = violation_summary(out, out, w);
    j["violations"] = {{"a_low", v.a_low.count}, {"a_high", v.a_high.count}, {"b_low", v.b_low.count},
                       {"b_high", v.b_high.count}};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_compare(const Options& o) {
    if (o.outputs.size() < 2) throw ValidationError("compare needs at least two output directories");
    std::vector<LabeledOutput> outputs;
    for (const auto& d : o.outputs) {
        SimOutput out = read_output(d);
        const auto it = out.metadata.find("case");
        std::string label = it != out.metadata.end() ? it->second : fs::path(d).filename().string();
        for (const auto& prev : outputs) {
            if (prev.label == label) label = fs::path(d).filename().string();
        }
        outputs.push_back({label, std::move(out)});
    }
    std::optional<ReferenceSeries> ref;
    if (!o.reference.empty()) ref = load_reference(o.reference);
    const auto report = compare(outputs, ref, window_for(o.window, outputs.front().output));
    const std::string table = format_table(report);
    std::cout << table;
    if (!o.out.empty()) {
        const fs::path dir = o.out;
        write_plot_data(outputs, report, dir / "plots");
        std::ofstream(dir / "report.json") << to_json(report).dump(2) << '\n';
        std::ofstream(dir / "report.txt") << table;
    }
    return kExitOk;
}

int cmd_validate(const Options& o) {
    nlohmann::json diag = nlohmann::json::array();
    try {
        RunFile rf = load_run_file(o.config);
        if (o.seed) rf.base.seed = *o.seed;
        for (const auto& cfg : expand(rf, o.scenarios)) {
            for (const auto& d : validate_spec(cfg.scenario)) diag.push_back({{"scope", "scenario"}, {"message", d}});
            try {
                validate(cfg);
            } catch (const Error& e) {
                diag.push_back({{"scope", std::string(to_string(cfg.scenario.case_id))}, {"message", e.what()}});
            }
        }
    } catch (const Error& e) {
        diag.push_back({{"scope", "config"}, {"message", e.what()}});
    }
    std::cout << nlohmann::json{{"ok", diag.empty()}, {"diagnostics", diag}}.dump(2) << '\n';
    return diag.empty() ? kExitOk : kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridstorm: distribution-grid demand under extreme cold"};
    app.require_subcommand(1, 1);
    Options o;

    const auto add_seed = [&](CLI::App* c) {
        c->add_option("--seed", o.seed, "Master seed")->envname("GRIDSTORM_SEED");
    };
    const auto add_config = [&](CLI::App* c) {
        c->add_option("--config", o.config, "Run configuration (JSON)")->envname("GRIDSTORM_CONFIG");
        c->add_option("--scenario", o.scenarios, "Scenario file(s); replaces the configured list")
            ->envname("GRIDSTORM_SCENARIO");
    };

    auto* init = app.add_subcommand("init", "Generate a configuration tree");
    init->add_option("dir", o.init_dir, "Target directory (or --out)");
    init->add_option("--preset", o.preset, "desk or paper-scale")->envname("GRIDSTORM_PRESET");
    init->add_option("--out", o.out, "Target directory")->envname("GRIDSTORM_OUT");
    init->add_flag("--force", o.force, "Write into a non-empty directory")->envname("GRIDSTORM_FORCE");
    add_seed(init);

    auto* runc = app.add_subcommand("run", "Simulate every configured scenario");
    add_config(runc);
    add_seed(runc);
    runc->add_option("--out", o.out, "Output root (overrides output_path)")->envname("GRIDSTORM_OUT");
    runc->add_option("--threads", o.threads, "Worker cap (0: all cores)")->envname("GRIDSTORM_THREADS");

    auto* report = app.add_subcommand("report", "Summarize one output directory");
    report->add_option("output", o.outputs, "Output directory")->required();
    report->add_option("--window", o.window, "start:end in seconds")->envname("GRIDSTORM_WINDOW");

    auto* cmp = app.add_subcommand("compare", "Compare outputs against the first (baseline)");
    cmp->add_option("outputs", o.outputs, "Output directories, baseline first")->required()->expected(2, 64);
    cmp->add_option("--reference", o.reference, "Supplied-demand CSV (timestamp,supplied_mw)");
    cmp->add_option("--window", o.window, "start:end in seconds")->envname("GRIDSTORM_WINDOW");
    cmp->add_option("--out", o.out, "Directory for report.json, report.txt and plots/")->envname("GRIDSTORM_OUT");

    auto* val = app.add_subcommand("validate", "Check a run configuration; prints diagnostics JSON");
    add_config(val);
    add_seed(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (init->parsed()) return cmd_init(o);
        if (runc->parsed()) return cmd_run(o);
        if (report->parsed()) return cmd_report(o);
        if (cmp->parsed()) return cmd_compare(o);
        if (val->parsed()) return cmd_validate(o);
    } catch (const SolverError& e) {
        std::cerr << "simulation error: " << e.what() << " (worst mismatch " << e.worst_mismatch() << " pu)\n";
        return kExitSimulation;
    } catch (const NumericalError& e) {
        std::cerr << "simulation error: " << e.what() << '\n';
        return kExitSimulation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitUsage;
}
