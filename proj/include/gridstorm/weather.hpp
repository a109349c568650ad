#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace gridstorm {

// Simulation clock: integer seconds since 00:00 local solar time, January 1
// of a non-leap year. Day-of-year and solar hour are derived from it.
using Seconds = std::int64_t;

inline constexpr Seconds kSecondsPerDay = 86400;
inline constexpr Seconds kSecondsPerHour = 3600;

struct WeatherSample {
    Seconds timestamp = 0;
    double temperature_f = 0.0;
    double humidity_pct = 0.0;
    double pressure_mbar = 1013.25;
    double wind_mps = 0.0;
    double ghi_wm2 = 0.0;

    bool operator==(const WeatherSample&) const = default;
};

/// Immutable, uniformly spaced weather record.
class WeatherSeries {
public:
    WeatherSeries() = default;

    /// Validates every invariant; throws ValidationError naming the row.
    explicit WeatherSeries(std::vector<WeatherSample> samples);

    [[nodiscard]] std::span<const WeatherSample> samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
    [[nodiscard]] const WeatherSample& operator[](std::size_t i) const { return samples_[i]; }
    [[nodiscard]] Seconds native_resolution() const noexcept { return resolution_; }
    [[nodiscard]] Seconds start() const { return samples_.front().timestamp; }
    [[nodiscard]] Seconds end() const { return samples_.back().timestamp; }

    /// Linear interpolation at an arbitrary time inside [start, end].
    [[nodiscard]] WeatherSample at(Seconds t) const;

    bool operator==(const WeatherSeries&) const = default;

private:
    std::vector<WeatherSample> samples_;
    Seconds resolution_ = 0;
};

/// Checks the per-sample invariants (humidity, irradiance, pressure).
void validate_sample(const WeatherSample& s, std::size_t row);

[[nodiscard]] WeatherSeries load_weather(const std::filesystem::path& path);
[[nodiscard]] WeatherSeries parse_weather(std::istream& in);
void write_weather(const WeatherSeries& series, const std::filesystem::path& path);
void write_weather(const WeatherSeries& series, std::ostream& out);

/// Linear resampling onto t0 + k*dt, k = 0..floor(span/dt).
[[nodiscard]] WeatherSeries resample(const WeatherSeries& series, Seconds dt);

struct ColdSnapOptions {
    Seconds start = 43 * kSecondsPerDay;  // Feb 13, 00:00
    Seconds resolution = 300;
    double latitude_deg = 32.78;
    double baseline_mean_f = 45.0;
    double diurnal_amplitude_f = 8.0;
    double dip_center_days = 2.25;  // coldest point: third morning, 06:00
    double dip_halfwidth_days = 1.6;
    double noise_amplitude_f = 1.5;
};

/// Deterministic synthetic cold snap. The minimum temperature equals
/// floor_temp within 0.01 F by construction.
[[nodiscard]] WeatherSeries synth_cold_snap(int days, double floor_temp_f, std::uint64_t seed,
                                            const ColdSnapOptions& opts = {});

namespace solar {

[[nodiscard]] int day_of_year(Seconds t) noexcept;
[[nodiscard]] double solar_hour(Seconds t) noexcept;
/// Cooper's declination, radians.
[[nodiscard]] double declination(int day_of_year) noexcept;
/// Extraterrestrial normal irradiance, W/m^2.
[[nodiscard]] double extraterrestrial(int day_of_year) noexcept;
[[nodiscard]] double cos_zenith(double latitude_deg, Seconds t) noexcept;
/// Haurwitz clear-sky GHI, W/m^2 (0 with the sun below the horizon).
[[nodiscard]] double clear_sky_ghi(double latitude_deg, Seconds t) noexcept;

}  // namespace solar

}  // namespace gridstorm
