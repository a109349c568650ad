#include "gridstorm/presets.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace gridstorm {

namespace {

// Approximate county-seat latitudes and cold-snap minima for the paper-scale layout.
struct CountyWeather {
    double latitude;
    double floor_f;
};
constexpr std::array<CountyWeather, 8> kCounties = {{
    {32.78, -2.0},  // Dallas
    {29.76, 13.0},  // Houston
    {33.66, -4.0},  // Lamar
    {32.00, -3.0},  // Midland
    {29.99, 7.0},   // Hays
    {29.36, 10.0},  // Val Verde
    {27.80, 18.0},  // Nueces
    {29.56, 4.0},   // Presidio
}};

constexpr std::uint64_t kScenarioSeed = 42;

std::string feeder_name(const std::string& region, int k) { return region + "_f" + std::to_string(k + 1); }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace

Preset parse_preset(const std::string& name) {
    if (name == "desk") return Preset::Desk;
    if (name == "paper-scale") return Preset::PaperScale;
    throw ValidationError("unknown preset '" + name + "' (expected desk or paper-scale)");
}

std::vector<PresetRegion> preset_regions(Preset preset) {
    if (preset == Preset::Desk) {
        return {{"north", 32.78, -2.0, 1, 200, 1.0}, {"south", 29.76, 12.0, 1, 200, 1.0}};
    }
    std::vector<PresetRegion> out;
    const auto& table = region_table();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& row = table[i];
        const int per_feeder = static_cast<int>(std::lround(static_cast<double>(row.modeled_houses) / row.feeders));
        out.push_back({row.name, kCounties[i].latitude, kCounties[i].floor_f, row.feeders, per_feeder,
                       row.scaling_factor});
    }
    return out;
}

DeskFeederOptions preset_feeder_options() { return DeskFeederOptions{}; }

std::vector<RegionInput> preset_inputs(Preset preset, std::uint64_t seed) {
    std::vector<RegionInput> out;
    for (const auto& pr : preset_regions(preset)) {
        RegionInput in;
        auto& c = in.config;
        c.name = pr.name;
        c.weather_file = "weather/" + pr.name + ".csv";
        c.stats.n_houses = static_cast<std::size_t>(pr.houses_per_feeder);
        c.stats.latitude = pr.latitude;
        c.stats.seed = 1;
        c.total_customers = static_cast<double>(pr.feeders * pr.houses_per_feeder);
        c.residential_fraction = 1.0;
        c.industrial_mw = 0.0;
        c.scaling_factor = pr.scaling_factor;
        ColdSnapOptions opts;
        opts.start = kPresetStart;
        opts.latitude_deg = pr.latitude;
        in.weather = synth_cold_snap(kPresetDays, pr.floor_temp_f, derive_seed(seed, "weather:" + pr.name), opts);
        for (int k = 0; k < pr.feeders; ++k) {
            const auto name = feeder_name(pr.name, k);
            c.feeders.emplace_back("feeders/" + name + ".json");
            in.feeders.push_back(generate_desk_feeder(name, derive_seed(seed, "feeder:" + name), preset_feeder_options()));
        }
        out.push_back(std::move(in));
    }
    return out;
}

SimConfig preset_config(Preset preset, CaseId case_id, std::uint64_t seed) {
    SimConfig c;
    c.start = kPresetStart;
    c.end = kPresetStart + kPresetDays * kSecondsPerDay;
    c.dt = 30;
    c.regions = preset_inputs(preset, seed);
    c.scenario.case_id = case_id;
    c.scenario.seed = kScenarioSeed;
    c.seed = seed;
    return c;
}

void write_preset(const std::filesystem::path& dir, Preset preset, std::uint64_t seed, bool force) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
        throw ValidationError("'" + dir.string() + "' exists and is not empty (use --force to overwrite)");
    }
    for (const char* sub : {"weather", "feeders", "regions", "scenarios"}) {
        fs::create_directories(dir / sub, ec);
        if (ec) throw IoError("cannot create '" + (dir / sub).string() + "': " + ec.message());
    }

    const SimConfig base = preset_config(preset, CaseId::BAU, seed);
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : base.regions) {
        write_weather(r.weather, dir / r.config.weather_file);
        for (std::size_t k = 0; k < r.feeders.size(); ++k) save_feeder(r.feeders[k], dir / r.config.feeders[k]);
        // Region files live one level down; their paths point back up.
        RegionConfig rc = r.config;
        rc.weather_file = fs::path("..") / r.config.weather_file;
        for (auto& f : rc.feeders) f = fs::path("..") / f;
        write_json(dir / "regions" / (r.config.name + ".json"), to_json(rc));
        regions.push_back("regions/" + r.config.name + ".json");
    }

    nlohmann::json scenarios = nlohmann::json::array();
    for (const auto c : kAllCases) {
        ScenarioSpec spec;
        spec.case_id = c;
        spec.seed = kScenarioSeed;
        const std::string file = "scenarios/" + std::string(to_string(c)) + ".json";
        write_json(dir / file, to_json(spec));
        scenarios.push_back(file);
    }

    nlohmann::json run;
    run["schema_version"] = 1;
    run["start"] = base.start;
    run["end"] = base.end;
    run["dt"] = base.dt;
    run["seed"] = seed;
    run["threads"] = 0;
    run["output_path"] = "out";
    run["oversize_margin"] = base.options.oversize_margin;
    const auto& b = base.options.bands;
    run["bands"] = {{"a_low", b.band_a_low}, {"a_high", b.band_a_high}, {"b_low", b.band_b_low}, {"b_high", b.band_b_high}};
    run["regions"] = regions;
    run["scenarios"] = scenarios;
    write_json(dir / "run.json", run);
}

}  // namespace gridstorm
