#include "gridstorm/error.hpp"
#include "gridstorm/weather.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace gridstorm;

namespace {

const std::string kHeader = "timestamp,temperature_f,humidity_pct,pressure_mbar,wind_mps,ghi_wm2\n";

WeatherSeries two_point(double t0, double t1) {
    return WeatherSeries({{0, t0, 50, 1000, 2, 0}, {300, t1, 50, 1000, 2, 0}});
}

// Trapezoid mean of temperature over the series span.
double trapezoid_mean(const WeatherSeries& s) {
    double area = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        area += 0.5 * (s[i].temperature_f + s[i - 1].temperature_f) *
                static_cast<double>(s[i].timestamp - s[i - 1].timestamp);
    }
    return area / static_cast<double>(s.end() - s.start());
}

}  // namespace

TEST(Weather, ParsesThreeRowsAndInfersResolution) {
    std::istringstream in(kHeader + "0,30,50,1000,2,0\n300,31.5,55,1001,3,0\n600,32,60,1002,4,10\n");
    const auto s = parse_weather(in);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.native_resolution(), 300);
    EXPECT_DOUBLE_EQ(s[1].temperature_f, 31.5);
    EXPECT_DOUBLE_EQ(s[2].ghi_wm2, 10.0);
}

TEST(Weather, HumidityOutOfRangeNamesFieldAndRow) {
    std::istringstream in(kHeader + "0,30,50,1000,2,0\n300,31,140,1000,2,0\n");
    try {
        (void)parse_weather(in);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("humidity_pct"), std::string::npos) << msg;
        EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    }
}

TEST(Weather, EmptyInputHasNoSamples) {
    std::istringstream empty("");
    EXPECT_THROW((void)parse_weather(empty), ValidationError);
    std::istringstream header_only(kHeader);
    try {
        (void)parse_weather(header_only);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("no samples"), std::string::npos);
    }
}

TEST(Weather, MalformedRowReportsLine) {
    std::istringstream in(kHeader + "0,30,50,1000,2,0\n300,abc,50,1000,2,0\n");
    try {
        (void)parse_weather(in);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Weather, RejectsBadHeaderGapsAndDisorder) {
    std::istringstream bad_header("time,temp\n0,1\n");
    EXPECT_THROW((void)parse_weather(bad_header), ParseError);
    std::istringstream gap(kHeader + "0,30,50,1000,2,0\n300,30,50,1000,2,0\n900,30,50,1000,2,0\n");
    EXPECT_THROW((void)parse_weather(gap), ValidationError);
    std::istringstream back(kHeader + "0,30,50,1000,2,0\n-300,30,50,1000,2,0\n");
    EXPECT_THROW((void)parse_weather(back), ValidationError);
}

TEST(Weather, RoundTripsExactly) {
    const auto s = synth_cold_snap(2, 5.0, 3);
    std::ostringstream out;
    write_weather(s, out);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_weather(in), s);
}

TEST(Weather, ResampleMidpoint) {
    const auto r = resample(two_point(30.0, 40.0), 150);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_DOUBLE_EQ(r[1].temperature_f, 35.0);
    EXPECT_DOUBLE_EQ(r[0].temperature_f, 30.0);
    EXPECT_DOUBLE_EQ(r[2].temperature_f, 40.0);
}

TEST(Weather, ResampleIdentityIdempotenceAndErrors) {
    const auto s = synth_cold_snap(1, 10.0, 9);
    EXPECT_EQ(resample(s, s.native_resolution()), s);
    const auto r = resample(s, 30);
    EXPECT_EQ(resample(r, 30), r);
    EXPECT_THROW((void)resample(two_point(1, 2), 600), ContractError);
    EXPECT_THROW((void)resample(two_point(1, 2), 0), ContractError);
}

TEST(Weather, ResamplePreservesTrapezoidMean) {
    const auto s = synth_cold_snap(3, 0.0, 4);
    const auto r = resample(s, 30);
    EXPECT_EQ(r.end(), s.end());
    EXPECT_NEAR(trapezoid_mean(r), trapezoid_mean(s), 1e-9);
}

TEST(Weather, InterpolationBoundedByNeighbours) {
    const auto s = synth_cold_snap(2, 3.0, 5);
    for (Seconds t = s.start(); t < s.end(); t += 37) {
        const auto w = s.at(t);
        const auto i = static_cast<std::size_t>((t - s.start()) / s.native_resolution());
        const double lo = std::min(s[i].temperature_f, s[i + 1].temperature_f);
        const double hi = std::max(s[i].temperature_f, s[i + 1].temperature_f);
        ASSERT_GE(w.temperature_f, lo);
        ASSERT_LE(w.temperature_f, hi);
    }
    EXPECT_THROW((void)s.at(s.end() + 1), ContractError);
}

TEST(Weather, ColdSnapHitsFloorDeterministicallyAndIsDarkAtNight) {
    const auto a = synth_cold_snap(7, 0.0, 1);
    const auto b = synth_cold_snap(7, 0.0, 1);
    EXPECT_EQ(a, b);
    double lo = 1e9;
    for (const auto& s : a.samples()) {
        lo = std::min(lo, s.temperature_f);
        const double hour = solar::solar_hour(s.timestamp);
        if (hour < 5.0 || hour > 19.0) {
            ASSERT_EQ(s.ghi_wm2, 0.0) << "t=" << s.timestamp;
        }
    }
    EXPECT_NEAR(lo, 0.0, 0.5);
    EXPECT_EQ(a.size(), 7u * 288u + 1u);
    EXPECT_NE(synth_cold_snap(7, 0.0, 2), a);
}

TEST(Weather, SolarNoonZenith) {
    // At solar noon the zenith angle is |latitude - declination|.
    const Seconds noon = 80 * kSecondsPerDay + 12 * kSecondsPerHour;
    const double dec = solar::declination(solar::day_of_year(noon));
    const double lat = 32.0 * std::numbers::pi / 180.0;
    EXPECT_NEAR(solar::cos_zenith(32.0, noon), std::cos(lat - dec), 1e-12);
    EXPECT_EQ(solar::clear_sky_ghi(32.0, 80 * kSecondsPerDay), 0.0);
    EXPECT_EQ(solar::day_of_year(0), 1);
    EXPECT_EQ(solar::day_of_year(365 * kSecondsPerDay), 1);
}
