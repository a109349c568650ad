#pragma once

#include "gridstorm/population.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

// Cases as pure transformations of a base (business-as-usual) population.

namespace gridstorm {

enum class CaseId { BAU, Case1, Case1a, Case1b, Case1c, Case2, Case2a };

[[nodiscard]] std::string_view to_string(CaseId c) noexcept;
/// Throws ValidationError for unknown ids.
[[nodiscard]] CaseId parse_case_id(std::string_view name);

struct ScenarioOverrides {
    // Split of converted gas houses; the gas entry must be 0.
    std::optional<HeatingShares> heating_shares;
    std::optional<std::pair<double, double>> r_multiplier_range;
    std::optional<double> pv_penetration;
    std::optional<double> battery_penetration;
    std::optional<BatterySampling> battery;
    // Case2/2a on the Case1 (electrified) population instead of BAU.
    std::optional<bool> electrify_base;

    bool operator==(const ScenarioOverrides&) const = default;
};

struct ScenarioSpec {
    CaseId case_id = CaseId::BAU;
    ScenarioOverrides overrides;
    std::uint64_t seed = 42;

    bool operator==(const ScenarioSpec&) const = default;
};

inline constexpr std::pair<double, double> kInsulationMultiplierRange{1.229, 1.639};
inline constexpr double kPvPenetration = 0.4;
inline constexpr double kBatteryPenetration = 0.5;

/// Population-level settings a transformation needs but houses do not carry.
struct ScenarioContext {
    HvacSizing sizing;
    double latitude = 32.78;
    std::string stream = "";  // distinguishes sibling feeders sharing a seed
};

/// Human-readable diagnostics; empty when the spec is consistent.
[[nodiscard]] std::vector<std::string> validate_spec(const ScenarioSpec& spec);

/// Throws ValidationError if base is empty or the spec has diagnostics.
[[nodiscard]] std::vector<House> apply_scenario(const std::vector<House>& base, const ScenarioSpec& spec,
                                                std::uint64_t seed, const ScenarioContext& ctx = {});

// Individual transformations; apply_scenario composes these. cop_pool is the
// base population's heat-pump rated COPs (empty -> U[3, 4]).
[[nodiscard]] std::vector<House> electrify(std::vector<House> houses, const HeatingShares& split,
                                           const std::vector<double>& cop_pool, std::uint64_t seed,
                                           const ScenarioContext& ctx);
[[nodiscard]] std::vector<House> insulate(std::vector<House> houses, std::pair<double, double> range,
                                          std::uint64_t seed, const ScenarioContext& ctx);
[[nodiscard]] std::vector<House> convert_resistance(std::vector<House> houses, const std::vector<double>& cop_pool,
                                                    std::uint64_t seed, const ScenarioContext& ctx);
[[nodiscard]] std::vector<House> add_pv(std::vector<House> houses, double penetration, std::uint64_t seed,
                                        const ScenarioContext& ctx);
[[nodiscard]] std::vector<House> add_batteries(std::vector<House> houses, double penetration,
                                               const BatterySampling& params, std::uint64_t seed,
                                               const ScenarioContext& ctx);

[[nodiscard]] std::vector<double> heat_pump_cops(const std::vector<House>& houses);

[[nodiscard]] nlohmann::json to_json(const ScenarioSpec& spec);
[[nodiscard]] ScenarioSpec scenario_from_json(const nlohmann::json& j);
[[nodiscard]] ScenarioSpec load_scenario(const std::filesystem::path& path);

}  // namespace gridstorm
