#pragma once

#include "gridstorm/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Ready-made configurations: a two-region desk reduction and an eight-region
// layout following the published region table.

namespace gridstorm {

enum class Preset { Desk, PaperScale };

[[nodiscard]] Preset parse_preset(const std::string& name);

struct PresetRegion {
    std::string name;
    double latitude;
    double floor_temp_f;  // cold-snap minimum
    int feeders;
    int houses_per_feeder;
    std::optional<double> scaling_factor;
};

[[nodiscard]] std::vector<PresetRegion> preset_regions(Preset preset);

inline constexpr int kPresetDays = 7;
inline constexpr Seconds kPresetStart = 43 * kSecondsPerDay;  // Feb 13

/// Feeder shape used by both presets.
[[nodiscard]] DeskFeederOptions preset_feeder_options();

/// In-memory region inputs (weather synthesized, feeders generated).
[[nodiscard]] std::vector<RegionInput> preset_inputs(Preset preset, std::uint64_t seed);

/// Full in-memory configuration for one case.
[[nodiscard]] SimConfig preset_config(Preset preset, CaseId case_id, std::uint64_t seed);

inline constexpr std::array<CaseId, 7> kAllCases = {CaseId::BAU,    CaseId::Case1, CaseId::Case1a, CaseId::Case1b,
                                                    CaseId::Case1c, CaseId::Case2, CaseId::Case2a};

/// Writes weather/, feeders/, regions/, scenarios/ and run.json under dir.
/// Refuses a non-empty dir unless force is set.
void write_preset(const std::filesystem::path& dir, Preset preset, std::uint64_t seed, bool force);

}  // namespace gridstorm
