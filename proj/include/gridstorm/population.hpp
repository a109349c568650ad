#pragma once

#include "gridstorm/der.hpp"
#include "gridstorm/feeder.hpp"
#include "gridstorm/rng.hpp"
#include "gridstorm/thermal.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gridstorm {

struct HeatingShares {
    double gas = 0.36;
    double resistance = 0.32;
    double heat_pump = 0.32;

    [[nodiscard]] double sum() const noexcept { return gas + resistance + heat_pump; }
    [[nodiscard]] double of(HeatType t) const noexcept;
    bool operator==(const HeatingShares&) const = default;
};

/// R-values and leakage of one construction vintage.
struct VintageEnvelope {
    double r_walls, r_ceilings, r_floors, r_doors;
    double u_windows;
    double ach;
    bool operator==(const VintageEnvelope&) const = default;
};

struct InsulationDistribution {
    double post2000_fraction = 0.4;
    VintageEnvelope pre2000{11.0, 19.0, 19.0, 3.0, 0.9, 1.2};
    VintageEnvelope post2000{13.0, 30.0, 22.0, 5.0, 0.55, 0.6};
    double jitter = 0.1;  // each component scaled by U[1-j, 1+j]
    bool operator==(const InsulationDistribution&) const = default;
};

/// Equipment is sized from the envelope's design heat loss
/// U_A (heat_setpoint - design_temp), rounded up to half-ton steps.
struct HvacSizing {
    double design_temp_f = 20.0;
    double heat_pump_factor = 1.0;
    double aux_factor = 0.35;
    double resistance_factor = 1.6;
    double gas_factor = 1.6;
    double cooling_factor = 1.0;
    bool operator==(const HvacSizing&) const = default;
};

struct FloorAreaDistribution {
    double mean = 1800.0;  // ft^2
    double sd = 500.0;
    double min = 800.0;
    double max = 4000.0;
    double two_story_fraction = 0.3;
    bool operator==(const FloorAreaDistribution&) const = default;
};

struct SetpointDistribution {
    double heat_mean = 70.0;
    double heat_sd = 1.5;
    double cool_mean = 76.0;
    double cool_sd = 1.5;
    double deadband = 2.0;
    bool operator==(const SetpointDistribution&) const = default;
};

struct PopulationStats {
    std::size_t n_houses = 200;
    HeatingShares heating_shares;
    InsulationDistribution insulation;
    HvacSizing hvac_sizing;
    FloorAreaDistribution floor_area;
    SetpointDistribution setpoints;
    double cop_min = 3.0;  // heat-pump rated COP, uniform
    double cop_max = 4.0;
    double water_heater_fraction = 0.5;
    double pv_penetration = 0.0;
    double battery_penetration = 0.0;
    double latitude = 32.78;
    std::uint64_t seed = 1;
    bool operator==(const PopulationStats&) const = default;
};

/// Throws ValidationError listing the first violated invariant.
void validate(const PopulationStats& stats);

/// Plug and lighting load of one house.
struct ZipLoad {
    double nominal_kw = 1.0;  // daily mean
    double power_factor = 0.95;
    ZipFractions fractions;
    double shape_shift_hours = 0.0;
    bool operator==(const ZipLoad&) const = default;
};

struct WaterHeaterUse {
    WaterHeater tank;
    double daily_gallons = 50.0;
    double shape_shift_hours = 0.0;
    double inlet_temp = 55.0;
    bool operator==(const WaterHeaterUse&) const = default;
};

struct House {
    std::size_t id = 0;
    std::string node;
    double floor_area = 0.0;
    int vintage = 0;  // 0 pre-2000, 1 post-2000
    ThermalEnvelope envelope;
    HvacSystem hvac;
    HouseState initial;
    ZipLoad zip;
    std::optional<WaterHeaterUse> water_heater;
    double solar_gain_factor = 0.0;  // Q_S = factor * GHI, Btu/h per W/m^2
    std::optional<PvPanel> pv;
    std::optional<Battery> battery;

    bool operator==(const House&) const = default;
};

/// Daily multiplier (mean 1) for plug loads at a fractional hour.
[[nodiscard]] double zip_shape(double hour) noexcept;
/// Fraction of daily hot water used per hour at a fractional hour (sums to 1 over a day).
[[nodiscard]] double hot_water_shape(double hour) noexcept;

[[nodiscard]] double design_heat_load(const House& house, const HvacSizing& sizing);

/// Recomputes capacities (and fan power) from the current envelope.
void size_hvac(House& house, const HvacSizing& sizing);

/// Seeded population; houses assigned round-robin to the feeder's
/// attachment nodes. Streams are keyed by the feeder name so sibling
/// feeders draw independently.
[[nodiscard]] std::vector<House> populate(const PopulationStats& stats, const FeederModel& feeder);

/// round(fraction * n) distinct indices in [0, n), ascending.
[[nodiscard]] std::vector<std::size_t> select_exact(std::size_t n, double fraction, Rng rng);

/// Rooftop array: 3-7 kW, tilt 15-35, azimuth 135-225.
[[nodiscard]] PvPanel sample_pv_panel(Rng& rng, double latitude);
struct BatterySampling {
    double energy_kwh = 13.5;
    double power_kw = 5.0;
    double spread = 0.2;  // both ratings scaled by one draw of U[1-spread, 1+spread]
    bool operator==(const BatterySampling&) const = default;
};

/// Battery starting full, with a skewed default schedule drawn from schedule_seed.
[[nodiscard]] Battery sample_battery(Rng& rng, std::uint64_t schedule_seed, const BatterySampling& params = {});

/// Copy of feeder with attachments rebuilt from the house list.
[[nodiscard]] FeederModel attach(const FeederModel& feeder, const std::vector<House>& houses);

/// Non-coincident peak of one house, kVA (heating at design + water heater + plugs).
[[nodiscard]] double house_peak_kva(const House& house);

[[nodiscard]] double scaling_factor(double total_customers, double residential_fraction, double n_modeled);

struct RegionConfig {
    std::string name;
    std::filesystem::path weather_file;
    std::vector<std::filesystem::path> feeders;
    PopulationStats stats;
    double total_customers = 0.0;
    double residential_fraction = 1.0;
    double industrial_mw = 0.0;
    std::optional<double> scaling_factor;  // pinned; otherwise computed

    [[nodiscard]] double effective_scaling_factor() const;
};

[[nodiscard]] nlohmann::json to_json(const PopulationStats& stats);
[[nodiscard]] PopulationStats stats_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const RegionConfig& region);
/// Relative paths in the file are kept as written; callers resolve them.
[[nodiscard]] RegionConfig region_from_json(const nlohmann::json& j);
[[nodiscard]] RegionConfig load_region(const std::filesystem::path& path);

/// Eight-region table: modeled houses and pinned scaling factors.
struct RegionTableRow {
    std::string name;
    std::string area;
    int feeders;
    int modeled_houses;
    double scaling_factor;
};
[[nodiscard]] const std::array<RegionTableRow, 8>& region_table();

}  // namespace gridstorm
