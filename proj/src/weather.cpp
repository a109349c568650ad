#include "gridstorm/weather.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"
#include "text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace gridstorm {

namespace {

constexpr std::string_view kHeader = "timestamp,temperature_f,humidity_pct,pressure_mbar,wind_mps,ghi_wm2";
constexpr std::array<std::string_view, 6> kColumns = {"timestamp",     "temperature_f", "humidity_pct",
                                                      "pressure_mbar", "wind_mps",      "ghi_wm2"};

double lerp_bounded(double a, double b, double f) {
    const double v = a + (b - a) * f;
    return std::clamp(v, std::min(a, b), std::max(a, b));
}

// Diurnal shape in [-1, 1]: minimum at 06:00, maximum at 15:00.
double diurnal_shape(double hour) {
    double h = std::fmod(hour, 24.0);
    if (h < 6.0) h += 24.0;
    if (h <= 15.0) return -std::cos(std::numbers::pi * (h - 6.0) / 9.0);
    return std::cos(std::numbers::pi * (h - 15.0) / 15.0);
}

}  // namespace

WeatherSeries::WeatherSeries(std::vector<WeatherSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ValidationError("no samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) validate_sample(samples_[i], i + 1);
    if (samples_.size() >= 2) resolution_ = samples_[1].timestamp - samples_[0].timestamp;
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        const Seconds gap = samples_[i].timestamp - samples_[i - 1].timestamp;
        if (gap <= 0) {
            throw ValidationError("row " + std::to_string(i + 1) + ": timestamps not strictly increasing");
        }
        if (gap != resolution_) {
            throw ValidationError("row " + std::to_string(i + 1) + ": spacing " + std::to_string(gap) +
                                  " s differs from native resolution " + std::to_string(resolution_) +
                                  " s (missing or extra rows)");
        }
    }
}

WeatherSample WeatherSeries::at(Seconds t) const {
    if (samples_.empty()) throw ContractError("weather series is empty");
    if (t < start() || t > end()) {
        throw ContractError("time " + std::to_string(t) + " outside weather span [" + std::to_string(start()) +
                            ", " + std::to_string(end()) + "]");
    }
    if (samples_.size() == 1) return samples_.front();
    const Seconds offset = t - start();
    const auto i = static_cast<std::size_t>(offset / resolution_);
    const Seconds rem = offset - static_cast<Seconds>(i) * resolution_;
    if (rem == 0) {
        WeatherSample s = samples_[i];
        s.timestamp = t;
        return s;
    }
    const WeatherSample& a = samples_[i];
    const WeatherSample& b = samples_[i + 1];
    const double f = static_cast<double>(rem) / static_cast<double>(resolution_);
    WeatherSample s;
    s.timestamp = t;
    s.temperature_f = lerp_bounded(a.temperature_f, b.temperature_f, f);
    s.humidity_pct = lerp_bounded(a.humidity_pct, b.humidity_pct, f);
    s.pressure_mbar = lerp_bounded(a.pressure_mbar, b.pressure_mbar, f);
    s.wind_mps = lerp_bounded(a.wind_mps, b.wind_mps, f);
    s.ghi_wm2 = lerp_bounded(a.ghi_wm2, b.ghi_wm2, f);
    return s;
}

void validate_sample(const WeatherSample& s, std::size_t row) {
    const auto fail = [row](const std::string& msg) {
        throw ValidationError("row " + std::to_string(row) + ": " + msg);
    };
    const std::array<double, 5> values = {s.temperature_f, s.humidity_pct, s.pressure_mbar, s.wind_mps, s.ghi_wm2};
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) fail(std::string(kColumns[k + 1]) + " is not finite");
    }
    if (s.humidity_pct < 0.0 || s.humidity_pct > 100.0) {
        fail("humidity_pct " + text::format_double(s.humidity_pct) + " outside [0, 100]");
    }
    if (s.ghi_wm2 < 0.0) fail("ghi_wm2 " + text::format_double(s.ghi_wm2) + " is negative");
    if (s.pressure_mbar <= 0.0) fail("pressure_mbar " + text::format_double(s.pressure_mbar) + " is not positive");
    if (s.wind_mps < 0.0) fail("wind_mps " + text::format_double(s.wind_mps) + " is negative");
}

WeatherSeries parse_weather(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ValidationError("no samples");
    ++line_no;
    text::strip_cr(line);
    if (line != kHeader) {
        throw ParseError("expected header '" + std::string(kHeader) + "', got '" + line + "'", line_no);
    }
    std::vector<WeatherSample> samples;
    while (std::getline(in, line)) {
        ++line_no;
        text::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != kColumns.size()) {
            throw ParseError("expected " + std::to_string(kColumns.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        WeatherSample s;
        s.timestamp = text::parse_int(fields[0], kColumns[0], line_no);
        s.temperature_f = text::parse_double(fields[1], kColumns[1], line_no);
        s.humidity_pct = text::parse_double(fields[2], kColumns[2], line_no);
        s.pressure_mbar = text::parse_double(fields[3], kColumns[3], line_no);
        s.wind_mps = text::parse_double(fields[4], kColumns[4], line_no);
        s.ghi_wm2 = text::parse_double(fields[5], kColumns[5], line_no);
        try {
            validate_sample(s, samples.size() + 1);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ", " + e.what());
        }
        samples.push_back(s);
    }
    if (samples.empty()) throw ValidationError("no samples");
    return WeatherSeries(std::move(samples));
}

WeatherSeries load_weather(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open weather file '" + path.string() + "'");
    try {
        return parse_weather(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_weather(const WeatherSeries& series, std::ostream& out) {
    out << kHeader << '\n';
    for (const auto& s : series.samples()) {
        out << s.timestamp << ',' << text::format_double(s.temperature_f) << ','
            << text::format_double(s.humidity_pct) << ',' << text::format_double(s.pressure_mbar) << ','
            << text::format_double(s.wind_mps) << ',' << text::format_double(s.ghi_wm2) << '\n';
    }
}

void write_weather(const WeatherSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weather file '" + path.string() + "'");
    write_weather(series, out);
}

WeatherSeries resample(const WeatherSeries& series, Seconds dt) {
    if (dt <= 0) throw ContractError("resample: dt must be positive");
    if (series.size() < 2) throw ContractError("resample: series needs at least two samples");
    const Seconds span = series.end() - series.start();
    if (dt > span) {
        throw ContractError("resample: dt " + std::to_string(dt) + " s exceeds series span " + std::to_string(span) +
                            " s");
    }
    if (dt == series.native_resolution()) return series;
    const Seconds n = span / dt;
    std::vector<WeatherSample> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (Seconds k = 0; k <= n; ++k) out.push_back(series.at(series.start() + k * dt));
    return WeatherSeries(std::move(out));
}

WeatherSeries synth_cold_snap(int days, double floor_temp_f, std::uint64_t seed, const ColdSnapOptions& opts) {
    if (days < 1) throw ContractError("synth_cold_snap: days must be >= 1");
    if (opts.resolution <= 0 || kSecondsPerDay % opts.resolution != 0) {
        throw ContractError("synth_cold_snap: resolution must divide one day");
    }
    const Seconds n = days * kSecondsPerDay / opts.resolution;

    Rng rng = make_rng(seed, "cold-snap");
    struct Wave {
        double period_h, phase, amplitude;
    };
    std::array<Wave, 3> waves{};
    for (auto& w : waves) {
        w.period_h = uniform(rng, 11.0, 31.0);
        w.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        w.amplitude = opts.noise_amplitude_f / 3.0;
    }

    std::vector<double> base(static_cast<std::size_t>(n) + 1);
    std::vector<double> dip(base.size());
    for (Seconds k = 0; k <= n; ++k) {
        const Seconds t = opts.start + k * opts.resolution;
        const double hours = static_cast<double>(k * opts.resolution) / 3600.0;
        double noise = 0.0;
        for (const auto& w : waves) noise += w.amplitude * std::sin(2.0 * std::numbers::pi * hours / w.period_h + w.phase);
        base[static_cast<std::size_t>(k)] =
            opts.baseline_mean_f + opts.diurnal_amplitude_f * diurnal_shape(solar::solar_hour(t)) + noise;
        const double x = (hours / 24.0 - opts.dip_center_days) / opts.dip_halfwidth_days;
        dip[static_cast<std::size_t>(k)] = std::abs(x) < 1.0 ? 0.5 * (1.0 + std::cos(std::numbers::pi * x)) : 0.0;
    }

    const auto min_at = [&](double depth) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < base.size(); ++i) m = std::min(m, base[i] - depth * dip[i]);
        return m;
    };
    // min_at is nonincreasing in depth; bisect for the requested floor.
    double depth = 0.0;
    if (min_at(0.0) > floor_temp_f) {
        double lo = 0.0, hi = 1.0;
        while (min_at(hi) > floor_temp_f) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
            const double mid = 0.5 * (lo + hi);
            (min_at(mid) > floor_temp_f ? lo : hi) = mid;
        }
        depth = hi;
    }

    std::vector<WeatherSample> samples;
    samples.reserve(base.size());
    for (Seconds k = 0; k <= n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const Seconds t = opts.start + k * opts.resolution;
        WeatherSample s;
        s.timestamp = t;
        s.temperature_f = base[i] - depth * dip[i];
        s.humidity_pct = std::clamp(65.0 - 15.0 * diurnal_shape(solar::solar_hour(t)), 0.0, 100.0);
        s.pressure_mbar = 1018.0 - 8.0 * dip[i];
        s.wind_mps = 3.0 + 4.0 * dip[i];
        s.ghi_wm2 = solar::clear_sky_ghi(opts.latitude_deg, t);
        samples.push_back(s);
    }
    return WeatherSeries(std::move(samples));
}

namespace solar {

int day_of_year(Seconds t) noexcept {
    Seconds day = t / kSecondsPerDay;
    if (t % kSecondsPerDay < 0) --day;
    const Seconds wrapped = ((day % 365) + 365) % 365;
    return static_cast<int>(wrapped) + 1;
}

double solar_hour(Seconds t) noexcept {
    const Seconds r = ((t % kSecondsPerDay) + kSecondsPerDay) % kSecondsPerDay;
    return static_cast<double>(r) / 3600.0;
}

double declination(int doy) noexcept {
    constexpr double deg = std::numbers::pi / 180.0;
    return 23.45 * deg * std::sin(2.0 * std::numbers::pi * (284.0 + doy) / 365.0);
}

double extraterrestrial(int doy) noexcept {
    return 1367.0 * (1.0 + 0.033 * std::cos(2.0 * std::numbers::pi * doy / 365.0));
}

double cos_zenith(double latitude_deg, Seconds t) noexcept {
    constexpr double deg = std::numbers::pi / 180.0;
    const double lat = latitude_deg * deg;
    const double dec = declination(day_of_year(t));
    const double omega = 15.0 * deg * (solar_hour(t) - 12.0);
    return std::sin(lat) * std::sin(dec) + std::cos(lat) * std::cos(dec) * std::cos(omega);
}

double clear_sky_ghi(double latitude_deg, Seconds t) noexcept {
    const double cz = cos_zenith(latitude_deg, t);
    if (cz <= 0.0) return 0.0;
    return 1098.0 * cz * std::exp(-0.057 / cz);
}

}  // namespace solar

}  // namespace gridstorm
