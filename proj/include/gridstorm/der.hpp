#pragma once

#include "gridstorm/weather.hpp"

#include <cstdint>
#include <vector>

namespace gridstorm {

struct PvPanel {
    double rated_dc = 5.0;   // kW
    double tilt = 25.0;      // degrees from horizontal
    double azimuth = 180.0;  // degrees clockwise from north
    double derate = 0.86;
    double latitude = 32.78;

    bool operator==(const PvPanel&) const = default;
};

void validate(const PvPanel& panel);

/// Plane-of-array irradiance, W/m^2, from GHI by Erbs decomposition and
/// isotropic-sky transposition (albedo 0.2).
[[nodiscard]] double plane_of_array(const PvPanel& panel, double ghi, Seconds time);

/// AC output in kW at unity power factor, clamped to [0, rated_dc].
[[nodiscard]] double pv_power(const PvPanel& panel, const WeatherSample& sample, Seconds time);

enum class BatteryCommand { Idle, Charge, Discharge };

struct ScheduleWindow {
    double start_hour = 0.0;  // inclusive
    double end_hour = 0.0;    // exclusive; may wrap past midnight
    BatteryCommand command = BatteryCommand::Idle;

    bool operator==(const ScheduleWindow&) const = default;
};

struct DispatchSchedule {
    std::vector<ScheduleWindow> base;  // first matching window wins; Idle otherwise
    Seconds skew = 0;                  // |skew| <= 7200

    [[nodiscard]] BatteryCommand at(Seconds time) const;
    bool operator==(const DispatchSchedule&) const = default;
};

inline constexpr Seconds kMaxScheduleSkew = 7200;

/// Charge 10:00-15:00, discharge 18:00-23:00, idle otherwise.
[[nodiscard]] DispatchSchedule default_schedule();

struct Battery {
    double energy_capacity = 13.5;  // kWh (DC)
    double power_rating = 5.0;      // kW (AC)
    double soc = 0.0;               // kWh
    double discharge_eff = 0.96;
    double charge_eff = 0.96;
    double inverter_eff = 0.98;
    DispatchSchedule schedule = default_schedule();

    bool operator==(const Battery&) const = default;
};

void validate(const Battery& b);

struct BatteryStep {
    Battery battery;
    double meter_power = 0.0;  // kW AC, + = load (charging)
    double dc_in = 0.0;        // kWh stored during the step
    double dc_out = 0.0;       // kWh withdrawn during the step
};

/// Applies one command for dt seconds, tapering at the SoC limits.
[[nodiscard]] BatteryStep battery_apply(const Battery& b, BatteryCommand command, double dt_seconds);

/// Evaluates the schedule at (time + skew) and applies it.
[[nodiscard]] BatteryStep battery_step(const Battery& b, Seconds time, double dt_seconds);

/// Copy of base with a uniform skew in [-7200, 7200] s drawn from seed.
[[nodiscard]] DispatchSchedule make_schedule(const DispatchSchedule& base, std::uint64_t seed);

}  // namespace gridstorm
