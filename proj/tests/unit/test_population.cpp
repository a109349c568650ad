#include "gridstorm/error.hpp"
#include "gridstorm/population.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace gridstorm;

namespace {

FeederModel feeder() { return generate_desk_feeder("pop-test", 3); }

std::map<HeatType, double> shares(const std::vector<House>& houses) {
    std::map<HeatType, double> m;
    for (const auto& h : houses) m[h.hvac.heat_type] += 1.0 / static_cast<double>(houses.size());
    return m;
}

}  // namespace

TEST(Populate, DegenerateAllGas) {
    PopulationStats s;
    s.heating_shares = {1.0, 0.0, 0.0};
    for (const auto& h : populate(s, feeder())) EXPECT_EQ(h.hvac.heat_type, HeatType::Gas);
}

TEST(Populate, SharesConvergeAtTenThousand) {
    PopulationStats s;
    s.n_houses = 10000;
    s.seed = 17;
    const auto m = shares(populate(s, feeder()));
    EXPECT_NEAR(m.at(HeatType::Gas), 0.36, 0.01);
    EXPECT_NEAR(m.at(HeatType::Resistance), 0.32, 0.01);
    EXPECT_NEAR(m.at(HeatType::HeatPump), 0.32, 0.01);
}

TEST(Populate, DeterministicAndSeedSensitive) {
    PopulationStats s;
    s.seed = 5;
    const auto f = feeder();
    EXPECT_EQ(populate(s, f), populate(s, f));
    s.seed = 6;
    PopulationStats t;
    t.seed = 5;
    EXPECT_NE(populate(s, f), populate(t, f));
}

TEST(Populate, RoundRobinOverAttachmentNodes) {
    PopulationStats s;
    s.n_houses = 58;
    const auto f = feeder();
    std::map<std::string, int> per_node;
    for (const auto& h : populate(s, f)) {
        ASSERT_TRUE(f.attachments.count(h.node));
        ++per_node[h.node];
    }
    EXPECT_EQ(per_node.size(), f.attachments.size());
    for (const auto& [node, n] : per_node) EXPECT_EQ(n, 2) << node;
}

TEST(Populate, HousesAreValidAndSized) {
    PopulationStats s;
    s.n_houses = 500;
    for (const auto& h : populate(s, feeder())) {
        EXPECT_NO_THROW(validate(h.envelope));
        EXPECT_NO_THROW(validate(h.hvac));
        EXPECT_GE(h.hvac.rated_heat_capacity, design_heat_load(h, s.hvac_sizing) - 1e-9);
        EXPECT_EQ(std::fmod(h.hvac.rated_heat_capacity, 6000.0), 0.0);
        if (h.hvac.heat_type == HeatType::HeatPump) {
            EXPECT_GE(h.hvac.cop_rated, s.cop_min);
            EXPECT_LE(h.hvac.cop_rated, s.cop_max);
        }
        EXPECT_FALSE(h.pv);
        EXPECT_FALSE(h.battery);
    }
}

TEST(Populate, PenetrationsSelectExactCounts) {
    PopulationStats s;
    s.n_houses = 301;
    s.pv_penetration = 0.4;
    s.battery_penetration = 0.5;
    int pv = 0, bat = 0;
    for (const auto& h : populate(s, feeder())) {
        pv += h.pv.has_value();
        bat += h.battery.has_value();
    }
    EXPECT_EQ(pv, 120);
    EXPECT_EQ(bat, 151);
}

TEST(Populate, ErrorsOnEmptyFeederAndBadStats) {
    FeederModel f = feeder();
    f.attachments.clear();
    EXPECT_THROW((void)populate(PopulationStats{}, f), Error);
    PopulationStats s;
    s.heating_shares = {0.5, 0.5, 0.5};
    EXPECT_THROW(validate(s), ValidationError);
    s = {};
    s.pv_penetration = 1.2;
    EXPECT_THROW(validate(s), ValidationError);
}

TEST(SelectExact, CountsDistinctAscending) {
    const auto v = select_exact(1000, 0.4, make_rng(1, "t"));
    ASSERT_EQ(v.size(), 400u);
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
    EXPECT_EQ(std::set<std::size_t>(v.begin(), v.end()).size(), v.size());
    EXPECT_LT(v.back(), 1000u);
    EXPECT_TRUE(select_exact(10, 0.0, make_rng(1, "t")).empty());
    EXPECT_EQ(select_exact(7, 1.0, make_rng(1, "t")).size(), 7u);
}

TEST(Shapes, NormalizedOverADay) {
    double zip = 0.0, water = 0.0;
    const int n = 24 * 60;
    for (int k = 0; k < n; ++k) {
        zip += zip_shape(k / 60.0) / n;
        water += hot_water_shape(k / 60.0) / 60.0;
    }
    EXPECT_NEAR(zip, 1.0, 1e-3);
    EXPECT_NEAR(water, 1.0, 1e-3);
}

TEST(Scaling, FormulaAndPinnedTable) {
    EXPECT_DOUBLE_EQ(scaling_factor(1000, 1.0, 1000), 1.0);
    EXPECT_DOUBLE_EQ(scaling_factor(3000, 0.5, 1000), 6.0);
    EXPECT_THROW((void)scaling_factor(1000, 0.0, 1000), ContractError);
    EXPECT_THROW((void)scaling_factor(1000, 1.0, 0), ContractError);
    const auto& t = region_table();
    EXPECT_EQ(t.front().scaling_factor, 3816.95);
    EXPECT_EQ(t.back().scaling_factor, 23.55);
    RegionConfig r;
    r.scaling_factor = 3816.95;
    EXPECT_EQ(r.effective_scaling_factor(), 3816.95);
    r.scaling_factor.reset();
    r.total_customers = 2000;
    r.residential_fraction = 0.8;
    r.stats.n_houses = 250;
    EXPECT_DOUBLE_EQ(r.effective_scaling_factor(), 10.0);
}

TEST(PopulationJson, RoundTrip) {
    PopulationStats s;
    s.n_houses = 123;
    s.heating_shares = {0.2, 0.3, 0.5};
    s.seed = 99;
    s.insulation.jitter = 0.05;
    EXPECT_EQ(stats_from_json(to_json(s)), s);

    RegionConfig r;
    r.name = "north";
    r.weather_file = "weather/north.csv";
    r.feeders = {"feeders/a.json"};
    r.stats = s;
    r.industrial_mw = 2.5;
    r.scaling_factor = 4.0;
    const auto back = region_from_json(to_json(r));
    EXPECT_EQ(back.name, r.name);
    EXPECT_EQ(back.weather_file, r.weather_file);
    EXPECT_EQ(back.feeders, r.feeders);
    EXPECT_EQ(back.stats, s);
    EXPECT_EQ(back.industrial_mw, 2.5);
    EXPECT_EQ(back.scaling_factor, 4.0);
}
