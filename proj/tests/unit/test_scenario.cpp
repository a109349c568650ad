#include "gridstorm/error.hpp"
#include "gridstorm/scenario.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

using namespace gridstorm;

namespace {

std::vector<House> base(std::size_t n, std::uint64_t seed = 3) {
    PopulationStats s;
    s.n_houses = n;
    s.seed = seed;
    return populate(s, generate_desk_feeder("scn", 1));
}

double share(const std::vector<House>& houses, HeatType t) {
    double c = 0;
    for (const auto& h : houses) c += h.hvac.heat_type == t;
    return c / static_cast<double>(houses.size());
}

ScenarioSpec spec(CaseId c) {
    ScenarioSpec s;
    s.case_id = c;
    return s;
}

}  // namespace

TEST(Scenario, CaseIdsRoundTrip) {
    for (auto c : {CaseId::BAU, CaseId::Case1, CaseId::Case1a, CaseId::Case1b, CaseId::Case1c, CaseId::Case2,
                   CaseId::Case2a}) {
        EXPECT_EQ(parse_case_id(to_string(c)), c);
    }
    EXPECT_THROW((void)parse_case_id("Case3"), ValidationError);
}

TEST(Scenario, BauIsIdentity) {
    const auto b = base(200);
    EXPECT_EQ(apply_scenario(b, spec(CaseId::BAU), 1), b);
}

TEST(Scenario, Case1SplitsGasEvenly) {
    const auto b = base(10000, 11);
    const auto c = apply_scenario(b, spec(CaseId::Case1), 8);
    EXPECT_EQ(share(c, HeatType::Gas), 0.0);
    EXPECT_NEAR(share(c, HeatType::HeatPump) - share(b, HeatType::HeatPump), 0.18, 0.01);
    EXPECT_NEAR(share(c, HeatType::Resistance) - share(b, HeatType::Resistance), 0.18, 0.01);
    const auto pool = heat_pump_cops(b);
    const auto [lo, hi] = std::minmax_element(pool.begin(), pool.end());
    for (const auto& h : c) {
        if (h.hvac.heat_type == HeatType::HeatPump) {
            EXPECT_GE(h.hvac.cop_rated, *lo);
            EXPECT_LE(h.hvac.cop_rated, *hi);
        }
    }
}

TEST(Scenario, Case1bAllHeatPumps) {
    const auto c = apply_scenario(base(300), spec(CaseId::Case1b), 2);
    EXPECT_EQ(share(c, HeatType::HeatPump), 1.0);
}

TEST(Scenario, Case1aRaisesOpaqueRValuesWithinRange) {
    const auto b = base(300);
    const auto e = apply_scenario(b, spec(CaseId::Case1), 4);
    const auto a = apply_scenario(b, spec(CaseId::Case1a), 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double m = a[i].envelope.r_walls / e[i].envelope.r_walls;
        EXPECT_GE(m, 1.229 - 1e-12);
        EXPECT_LE(m, 1.639 + 1e-12);
        EXPECT_NEAR(a[i].envelope.r_ceilings / e[i].envelope.r_ceilings, m, 1e-12);
        EXPECT_LE(compute_ua(a[i].envelope), compute_ua(e[i].envelope));
        EXPECT_LE(a[i].hvac.rated_heat_capacity, e[i].hvac.rated_heat_capacity);
    }
}

TEST(Scenario, Case2And2aCounts) {
    const auto b = base(401);
    const auto c2 = apply_scenario(b, spec(CaseId::Case2), 6);
    const auto c2a = apply_scenario(b, spec(CaseId::Case2a), 6);
    int pv = 0, bat = 0;
    for (const auto& h : c2) pv += h.pv.has_value();
    for (const auto& h : c2a) bat += h.battery.has_value();
    EXPECT_EQ(pv, 160);
    EXPECT_EQ(bat, 201);
    for (const auto& h : c2a) {
        if (!h.battery) continue;
        EXPECT_GE(h.battery->energy_capacity, 13.5 * 0.8 - 1e-9);
        EXPECT_LE(h.battery->energy_capacity, 13.5 * 1.2 + 1e-9);
        EXPECT_LE(std::abs(h.battery->schedule.skew), kMaxScheduleSkew);
    }
}

TEST(Scenario, PreservesCountsAndNodes) {
    const auto b = base(250);
    for (auto c : {CaseId::Case1, CaseId::Case1a, CaseId::Case1b, CaseId::Case1c, CaseId::Case2, CaseId::Case2a}) {
        const auto out = apply_scenario(b, spec(c), 9);
        ASSERT_EQ(out.size(), b.size());
        for (std::size_t i = 0; i < b.size(); ++i) {
            EXPECT_EQ(out[i].node, b[i].node);
            EXPECT_EQ(out[i].id, b[i].id);
        }
    }
}

TEST(Scenario, CompositionLaw) {
    const auto b = base(300);
    const std::uint64_t seed = 12;
    const ScenarioContext ctx;
    const auto c1b = apply_scenario(b, spec(CaseId::Case1b), seed);
    EXPECT_EQ(apply_scenario(b, spec(CaseId::Case1c), seed), insulate(c1b, kInsulationMultiplierRange, seed, ctx));
    const auto c1 = apply_scenario(b, spec(CaseId::Case1), seed);
    EXPECT_EQ(convert_resistance(c1, heat_pump_cops(b), seed, ctx), c1b);
}

TEST(Scenario, Deterministic) {
    const auto b = base(200);
    EXPECT_EQ(apply_scenario(b, spec(CaseId::Case2a), 3), apply_scenario(b, spec(CaseId::Case2a), 3));
    EXPECT_NE(apply_scenario(b, spec(CaseId::Case2a), 3), apply_scenario(b, spec(CaseId::Case2a), 4));
}

TEST(ValidateSpec, Diagnostics) {
    for (auto c : {CaseId::BAU, CaseId::Case1, CaseId::Case1a, CaseId::Case1b, CaseId::Case1c, CaseId::Case2,
                   CaseId::Case2a}) {
        EXPECT_TRUE(validate_spec(spec(c)).empty());
    }
    auto s = spec(CaseId::Case1b);
    s.overrides.heating_shares = HeatingShares{0.0, 0.3, 0.7};
    auto d = validate_spec(s);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0], "Case1b requires zero resistance share");

    s = spec(CaseId::Case2);
    s.overrides.pv_penetration = 1.5;
    d = validate_spec(s);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0], "penetration out of [0,1]");

    EXPECT_THROW((void)apply_scenario(base(10), s, 1), ValidationError);
    EXPECT_THROW((void)apply_scenario({}, spec(CaseId::BAU), 1), ValidationError);
}

TEST(ScenarioJson, RoundTrip) {
    auto s = spec(CaseId::Case2a);
    s.overrides.battery_penetration = 0.25;
    s.overrides.battery = BatterySampling{10.0, 4.0, 0.1};
    s.overrides.r_multiplier_range = std::pair{1.1, 1.2};
    s.seed = 77;
    EXPECT_EQ(scenario_from_json(to_json(s)), s);
}
