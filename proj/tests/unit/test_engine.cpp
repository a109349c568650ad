#include "gridstorm/engine.hpp"
#include "gridstorm/error.hpp"
#include "gridstorm/presets.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace gridstorm;
namespace fs = std::filesystem;

namespace {

WeatherSeries constant_weather(Seconds start, Seconds end, double temp_f) {
    std::vector<WeatherSample> v;
    for (Seconds t = start; t <= end; t += 3600) v.push_back({t, temp_f, 50.0, 1013.25, 0.0, 0.0});
    return WeatherSeries(std::move(v));
}

Series flat(std::size_t n, double total) {
    Series s(n);
    std::fill(s.total_mw.begin(), s.total_mw.end(), total);
    std::fill(s.hvac_mw.begin(), s.hvac_mw.end(), total);
    return s;
}

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("gridstorm_engine_" + name);
    fs::remove_all(p);
    return p;
}

SimConfig short_desk(CaseId c, std::uint64_t seed = 7) {
    auto cfg = preset_config(Preset::Desk, c, seed);
    cfg.end = cfg.start + kSecondsPerDay;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST(Engine, ZeroHousesGiveZeroOutput) {
    const auto f = generate_desk_feeder("empty", 1);
    const auto w = constant_weather(0, 7200, 10.0);
    const auto s = simulate_feeder(f, {}, w, 0, 7200, 30);
    ASSERT_EQ(s.size(), 240u);
    for (const auto* col : load_columns(s)) {
        for (double x : *col) EXPECT_EQ(x, 0.0);
    }
    for (const auto* col : count_columns(s)) {
        for (auto x : *col) EXPECT_EQ(x, 0);
    }
}

TEST(Engine, ResistanceHouseMatchesDesignHeatLoss) {
    PopulationStats stats;
    stats.n_houses = 1;
    stats.heating_shares = {0.0, 1.0, 0.0};
    stats.water_heater_fraction = 0.0;
    const auto feeder = generate_desk_feeder("one", 2);
    auto houses = populate(stats, feeder);
    houses[0].zip.nominal_kw = 0.0;
    const double t_out = 20.0;
    const Seconds start = 0, end = 4 * kSecondsPerDay;
    const auto s = simulate_feeder(attach(feeder, houses), houses, constant_weather(start, end, t_out), start, end, 30);
    // Skip the first day so the initial transient is gone.
    const std::size_t from = s.size() / 4;
    const double mean_w =
        std::accumulate(s.hvac_mw.begin() + static_cast<long>(from), s.hvac_mw.end(), 0.0) / static_cast<double>(s.size() - from) * 1e6;
    const double oracle = compute_ua(houses[0].envelope) * (houses[0].hvac.heat_setpoint - t_out) / kBtuhPerWatt;
    EXPECT_NEAR(mean_w / oracle, 1.0, 0.05);
}

TEST(Engine, DecompositionIdentityAndDeterminism) {
    const auto a = run(short_desk(CaseId::Case2a));
    const auto b = run(short_desk(CaseId::Case2a));
    EXPECT_EQ(a, b);
    for (const auto& s : a.regions) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double parts = s.hvac_mw[k] + s.water_heater_mw[k] + s.zip_mw[k] + s.battery_mw[k] + s.pv_mw[k] +
                                 s.industrial_mw[k] + s.losses_mw[k];
            ASSERT_LT(std::abs(s.total_mw[k] - parts) / std::max(std::abs(s.total_mw[k]), 1.0), 1e-9);
        }
    }
}

TEST(Engine, ThreadCountDoesNotChangeResults) {
    auto cfg = short_desk(CaseId::BAU);
    cfg.end = cfg.start + 6 * 3600;
    const auto one = run(cfg);
    cfg.threads = 2;
    EXPECT_EQ(run(cfg), one);
}

TEST(Engine, WriteReadRoundTrip) {
    auto cfg = short_desk(CaseId::Case2);
    cfg.end = cfg.start + 3 * 3600;
    const auto out = run(cfg);
    const auto dir = scratch_dir("roundtrip");
    write_output(out, dir, "2024-01-01T00:00:00Z");
    EXPECT_EQ(read_output(dir), out);

    std::ifstream in(dir / "system.csv");
    std::string line;
    std::size_t rows = 0, cols = 0;
    while (std::getline(in, line)) {
        if (rows++ == 0) cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
    }
    EXPECT_EQ(rows, out.steps + 1);
    EXPECT_EQ(cols, 1 + kLoadColumns.size() + kCountColumns.size());

    auto meta = nlohmann::json::parse(std::ifstream(dir / "meta.json"));
    meta["schema_version"] = 42;
    std::ofstream(dir / "meta.json") << meta.dump();
    EXPECT_THROW((void)read_output(dir), IoError);
    fs::remove_all(dir);
}

TEST(Aggregate, RegionAffineAndIdentity) {
    RegionConfig r;
    r.scaling_factor = 1.0;
    const auto one = aggregate_region({flat(10, 10.0)}, r);
    EXPECT_EQ(one.total_mw, flat(10, 10.0).total_mw);
    r.scaling_factor = 2.0;
    r.industrial_mw = 5.0;
    const auto s = aggregate_region({flat(10, 10.0)}, r);
    for (double x : s.total_mw) EXPECT_EQ(x, 25.0);
    for (double x : s.hvac_mw) EXPECT_EQ(x, 20.0);
    for (double x : s.industrial_mw) EXPECT_EQ(x, 5.0);
    EXPECT_THROW((void)sum_series({flat(3, 1.0), flat(4, 1.0)}), ValidationError);
}

TEST(Aggregate, RegionLinearity) {
    RegionConfig r;
    r.scaling_factor = 3.0;
    r.industrial_mw = 1.5;
    Series x(20);
    for (std::size_t k = 0; k < 20; ++k) x.total_mw[k] = std::sin(0.3 * static_cast<double>(k)) + 2.0;
    Series ax = x;
    for (auto& v : ax.total_mw) v *= 4.0;
    const auto lhs = aggregate_region({ax}, r);
    const auto base = aggregate_region({x}, r);
    for (std::size_t k = 0; k < 20; ++k) {
        EXPECT_NEAR(lhs.total_mw[k], 4.0 * (base.total_mw[k] - 1.5) + 1.5, 1e-12);
    }
}

TEST(Aggregate, SystemAdditivity) {
    SimOutput o;
    o.steps = 5;
    o.region_names = {"a"};
    Series s(5);
    s.total_mw = {1, 4, 2, 3, 0};
    o.regions = {s};
    o.system = s;
    EXPECT_EQ(aggregate_system({o}), o);
    const auto two = aggregate_system({o, o});
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(two.system.total_mw[k], 2 * s.total_mw[k]);
    SimOutput p = o;
    p.regions[0].total_mw = {0, 0, 5, 0, 1};
    p.system = p.regions[0];
    const auto mixed = aggregate_system({o, p});
    const double sys_peak = *std::max_element(mixed.system.total_mw.begin(), mixed.system.total_mw.end());
    EXPECT_LE(sys_peak, 4.0 + 5.0);
    SimOutput q = o;
    q.dt = 60;
    EXPECT_THROW((void)aggregate_system({o, q}), ValidationError);
}

TEST(Engine, ColderWeatherNeverLowersHeatingEnergy) {
    PopulationStats stats;
    stats.n_houses = 40;
    stats.heating_shares = {0.0, 0.5, 0.5};
    const auto feeder = generate_desk_feeder("mono", 4);
    const auto houses = populate(stats, feeder);
    const auto attached = attach(feeder, houses);
    const auto warm = synth_cold_snap(2, 5.0, 3);
    std::vector<WeatherSample> colder(warm.samples().begin(), warm.samples().end());
    for (auto& w : colder) w.temperature_f -= 10.0;
    const Seconds start = warm.start(), end = warm.end();
    const auto a = simulate_feeder(attached, houses, warm, start, end, 30);
    const auto b = simulate_feeder(attached, houses, WeatherSeries(colder), start, end, 30);
    const double ea = std::accumulate(a.hvac_mw.begin(), a.hvac_mw.end(), 0.0);
    const double eb = std::accumulate(b.hvac_mw.begin(), b.hvac_mw.end(), 0.0);
    EXPECT_GE(eb, ea);
}

TEST(Engine, ValidationAndWeatherCoverage) {
    auto cfg = short_desk(CaseId::BAU);
    cfg.dt = 7;
    EXPECT_THROW(validate(cfg), ValidationError);
    cfg = short_desk(CaseId::BAU);
    cfg.end = cfg.start + 30 * kSecondsPerDay;
    EXPECT_THROW(validate(cfg), ValidationError);
    cfg = short_desk(CaseId::BAU);
    cfg.end = cfg.start;
    EXPECT_THROW(validate(cfg), ValidationError);

    const auto f = generate_desk_feeder("w", 1);
    EXPECT_THROW((void)simulate_feeder(f, {}, constant_weather(0, 3600, 10), 0, 7200, 30), ValidationError);
}
