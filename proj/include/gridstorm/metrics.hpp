#pragma once

#include "gridstorm/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

// Comparison quantities over system series. Integration is the rectangle
// rule: step k contributes value[k] * dt, matching the simulation's steps.

namespace gridstorm {

/// Half-open [start, end) in simulation seconds.
struct TimeWindow {
    Seconds start = 0;
    Seconds end = 0;
    bool operator==(const TimeWindow&) const = default;
};

/// "start:end" in seconds; either side may be empty to mean the grid edge.
[[nodiscard]] std::pair<std::optional<Seconds>, std::optional<Seconds>> parse_window(const std::string& text);

/// Step indices [first, last) of the grid inside window (whole grid if unset).
/// Throws ValidationError for an empty or out-of-grid window.
[[nodiscard]] std::pair<std::size_t, std::size_t> window_steps(const SimOutput& grid,
                                                               const std::optional<TimeWindow>& window);

struct Peak {
    double mw = 0.0;
    Seconds time = 0;
};

[[nodiscard]] Peak peak(const SimOutput& output, const std::optional<TimeWindow>& window = std::nullopt);
[[nodiscard]] double energy_mwh(const SimOutput& output, const std::optional<TimeWindow>& window = std::nullopt);
[[nodiscard]] double losses_mwh(const SimOutput& output, const std::optional<TimeWindow>& window = std::nullopt);

/// Running integral of (case - base) system total, MWh, one entry per step.
[[nodiscard]] std::vector<double> energy_delta(const SimOutput& case_output, const SimOutput& base,
                                               const std::optional<TimeWindow>& window = std::nullopt);

struct ReferenceSeries {
    Seconds start = 0;
    Seconds dt = 0;
    std::vector<double> supplied_mw;
    std::string label = "reference";

    [[nodiscard]] Seconds time(std::size_t k) const noexcept { return start + static_cast<Seconds>(k) * dt; }
};

/// CSV `timestamp,supplied_mw`, uniformly spaced.
[[nodiscard]] ReferenceSeries load_reference(const std::filesystem::path& path);
void write_reference(const ReferenceSeries& ref, const std::filesystem::path& path);

/// Reference value held over each of its intervals, sampled on the output grid.
[[nodiscard]] std::vector<double> align_reference(const ReferenceSeries& ref, const SimOutput& grid);

/// Base system total minus notch_mw over [notch.start, notch.end).
[[nodiscard]] ReferenceSeries synthetic_reference(const SimOutput& base, const TimeWindow& notch, double notch_mw);

/// Sum of max(0, case - supplied) * dt, MWh.
[[nodiscard]] double unmet_energy(const SimOutput& case_output, const ReferenceSeries& ref,
                                  const std::optional<TimeWindow>& window = std::nullopt);

struct BandChange {
    std::int64_t base = 0;
    std::int64_t count = 0;
    std::optional<double> pct;  // unset when base is 0
};

struct ViolationSummary {
    BandChange a_low, a_high, b_low, b_high;
};

[[nodiscard]] ViolationSummary violation_summary(const SimOutput& case_output, const SimOutput& base,
                                                 const std::optional<TimeWindow>& window = std::nullopt);

struct CaseMetrics {
    std::string label;
    Peak peak;
    double peak_delta_mw = 0.0;
    double energy_mwh = 0.0;
    double energy_delta_mwh = 0.0;
    double losses_mwh = 0.0;
    std::optional<double> losses_pct;
    ViolationSummary violations;
    std::optional<double> unmet_mwh;
};

struct MetricsReport {
    std::string baseline;
    std::optional<std::string> reference;
    Seconds window_start = 0;
    Seconds window_end = 0;
    std::vector<CaseMetrics> cases;  // baseline first
};

struct LabeledOutput {
    std::string label;
    SimOutput output;
};

/// First output is the baseline. Throws ValidationError for fewer than two
/// outputs or mismatched grids.
[[nodiscard]] MetricsReport compare(const std::vector<LabeledOutput>& outputs,
                                    const std::optional<ReferenceSeries>& reference = std::nullopt,
                                    const std::optional<TimeWindow>& window = std::nullopt);

[[nodiscard]] nlohmann::json to_json(const MetricsReport& report);
[[nodiscard]] std::string format_table(const MetricsReport& report);

/// Tidy (time, series, value) files: load_difference.csv, energy_difference.csv,
/// decomposition.csv, and violations_losses.csv (case, metric, value).
void write_plot_data(const std::vector<LabeledOutput>& outputs, const MetricsReport& report,
                     const std::filesystem::path& dir);

}  // namespace gridstorm
