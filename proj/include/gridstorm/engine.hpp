#pragma once

#include "gridstorm/feeder.hpp"
#include "gridstorm/population.hpp"
#include "gridstorm/scenario.hpp"
#include "gridstorm/weather.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

// Fixed-step co-simulation: weather -> devices -> feeder power flow, per step.

namespace gridstorm {

/// Per-step series for one feeder, region, or the whole system. Loads in MW
/// (pv negative when generating, battery + when charging); counts are node
/// counts summed over feeders and never scaled.
struct Series {
    std::vector<double> total_mw;
    std::vector<double> hvac_mw;
    std::vector<double> water_heater_mw;
    std::vector<double> zip_mw;
    std::vector<double> pv_mw;
    std::vector<double> battery_mw;
    std::vector<double> industrial_mw;
    std::vector<double> losses_mw;
    std::vector<std::int64_t> viol_a_low;
    std::vector<std::int64_t> viol_a_high;
    std::vector<std::int64_t> viol_b_low;
    std::vector<std::int64_t> viol_b_high;
    std::vector<std::int64_t> overloads;

    explicit Series(std::size_t n = 0);
    [[nodiscard]] std::size_t size() const noexcept { return total_mw.size(); }
    [[nodiscard]] ViolationCounts violations_at(std::size_t k) const;
    bool operator==(const Series&) const = default;
};

inline constexpr std::array<const char*, 8> kLoadColumns = {"total_mw",   "hvac_mw",       "water_heater_mw",
                                                             "zip_mw",     "pv_mw",         "battery_mw",
                                                             "industrial_mw", "losses_mw"};
inline constexpr std::array<const char*, 5> kCountColumns = {"viol_a_low", "viol_a_high", "viol_b_low", "viol_b_high",
                                                              "overloads"};

/// Column accessors in kLoadColumns / kCountColumns order.
[[nodiscard]] std::array<const std::vector<double>*, 8> load_columns(const Series& s);
[[nodiscard]] std::array<std::vector<double>*, 8> load_columns(Series& s);
[[nodiscard]] std::array<const std::vector<std::int64_t>*, 5> count_columns(const Series& s);
[[nodiscard]] std::array<std::vector<std::int64_t>*, 5> count_columns(Series& s);

struct SimOutput {
    Seconds start = 0;
    Seconds dt = 30;
    std::size_t steps = 0;  // step k covers [start + k dt, start + (k+1) dt)
    std::vector<std::string> region_names;
    std::vector<Series> regions;
    Series system;
    std::map<std::string, std::string> metadata;

    [[nodiscard]] Seconds time(std::size_t k) const noexcept { return start + static_cast<Seconds>(k) * dt; }
    bool operator==(const SimOutput&) const = default;
};

struct RegionInput {
    RegionConfig config;
    WeatherSeries weather;
    std::vector<FeederModel> feeders;
};

struct EngineOptions {
    ViolationBands bands;
    PowerFlowOptions flow;
    double oversize_margin = 1.25;
    int zip_iterations = 5;
    double zip_tolerance = 1e-6;  // pu
};

struct SimConfig {
    Seconds start = 0;
    Seconds end = 0;
    Seconds dt = 30;
    std::vector<RegionInput> regions;
    ScenarioSpec scenario;
    std::uint64_t seed = 1;
    std::filesystem::path output_path;
    unsigned threads = 0;  // 0: one worker per hardware thread
    EngineOptions options;
};

/// Throws ValidationError on the first broken invariant.
void validate(const SimConfig& config);

/// Houses for one feeder of a region under the configured scenario.
[[nodiscard]] std::vector<House> build_houses(const RegionInput& region, std::size_t feeder_index,
                                              const ScenarioSpec& scenario, std::uint64_t seed);

/// Simulates one feeder, unscaled and without industrial load. The feeder's
/// attachments must already reflect houses (see attach).
[[nodiscard]] Series simulate_feeder(const FeederModel& feeder, const std::vector<House>& houses,
                                     const WeatherSeries& weather, Seconds start, Seconds end, Seconds dt,
                                     const EngineOptions& options = {});

[[nodiscard]] SimOutput run(const SimConfig& config);

/// Sum of feeders times the scaling factor plus the constant industrial load.
[[nodiscard]] Series aggregate_region(const std::vector<Series>& feeders, const RegionConfig& config);

/// Elementwise sum; throws ValidationError when lengths differ.
[[nodiscard]] Series sum_series(const std::vector<Series>& parts);

/// Regions of all outputs concatenated; system series summed.
[[nodiscard]] SimOutput aggregate_system(const std::vector<SimOutput>& outputs);

inline constexpr int kOutputSchemaVersion = 1;

/// region_<name>.csv, system.csv and meta.json under dir. generated_at is the
/// only volatile field and lives in meta.json.
void write_output(const SimOutput& output, const std::filesystem::path& dir, const std::string& generated_at = "");
[[nodiscard]] SimOutput read_output(const std::filesystem::path& dir);

/// A run-config file: one SimConfig per listed scenario, paths resolved
/// relative to the file.
struct RunFile {
    SimConfig base;  // scenario unset
    std::vector<std::filesystem::path> scenario_files;
};

[[nodiscard]] RunFile load_run_file(const std::filesystem::path& path);
/// Loads the region file and the weather and feeder files it names.
[[nodiscard]] RegionInput load_region_input(const std::filesystem::path& region_file);

}  // namespace gridstorm
