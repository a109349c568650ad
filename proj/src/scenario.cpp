#include "gridstorm/scenario.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace gridstorm {

namespace {

constexpr std::array<std::pair<CaseId, std::string_view>, 7> kCaseNames = {{
    {CaseId::BAU, "BAU"},
    {CaseId::Case1, "Case1"},
    {CaseId::Case1a, "Case1a"},
    {CaseId::Case1b, "Case1b"},
    {CaseId::Case1c, "Case1c"},
    {CaseId::Case2, "Case2"},
    {CaseId::Case2a, "Case2a"},
}};

bool electrified(CaseId c) {
    return c == CaseId::Case1 || c == CaseId::Case1a || c == CaseId::Case1b || c == CaseId::Case1c;
}

bool all_heat_pump(CaseId c) { return c == CaseId::Case1b || c == CaseId::Case1c; }

std::string tag(const ScenarioContext& ctx, std::string_view what) {
    return ctx.stream.empty() ? std::string(what) : std::string(what) + ":" + ctx.stream;
}

double draw_cop(Rng& rng, const std::vector<double>& pool) {
    if (pool.empty()) return uniform(rng, 3.0, 4.0);
    return pool[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(pool.size()) - 1))];
}

}  // namespace

std::string_view to_string(CaseId c) noexcept {
    for (const auto& [id, name] : kCaseNames) {
        if (id == c) return name;
    }
    return "?";
}

CaseId parse_case_id(std::string_view name) {
    for (const auto& [id, n] : kCaseNames) {
        if (n == name) return id;
    }
    throw ValidationError("unknown case id '" + std::string(name) + "'");
}

std::vector<std::string> validate_spec(const ScenarioSpec& spec) {
    std::vector<std::string> diag;
    const auto& o = spec.overrides;
    if (o.heating_shares) {
        const auto& h = *o.heating_shares;
        if (h.gas < 0.0 || h.resistance < 0.0 || h.heat_pump < 0.0) diag.emplace_back("heating shares must be nonnegative");
        if (std::abs(h.sum() - 1.0) > 1e-9) diag.emplace_back("heating shares must sum to 1");
        if (h.gas > 0.0 && electrified(spec.case_id)) {
            diag.push_back(std::string(to_string(spec.case_id)) + " requires zero gas share");
        }
        if (h.resistance > 0.0 && all_heat_pump(spec.case_id)) {
            diag.push_back(std::string(to_string(spec.case_id)) + " requires zero resistance share");
        }
    }
    if (o.r_multiplier_range) {
        const auto [lo, hi] = *o.r_multiplier_range;
        if (!(lo > 0.0) || hi < lo) diag.emplace_back("R multiplier range must satisfy 0 < low <= high");
    }
    for (const auto& p : {o.pv_penetration, o.battery_penetration}) {
        if (p && !(*p >= 0.0 && *p <= 1.0)) diag.emplace_back("penetration out of [0,1]");
    }
    if (o.battery) {
        const auto& b = *o.battery;
        if (!(b.energy_kwh > 0.0) || !(b.power_kw > 0.0)) diag.emplace_back("battery ratings must be > 0");
        if (!(b.spread >= 0.0 && b.spread < 1.0)) diag.emplace_back("battery spread must lie in [0, 1)");
    }
    return diag;
}

std::vector<double> heat_pump_cops(const std::vector<House>& houses) {
    std::vector<double> out;
    for (const auto& h : houses) {
        if (h.hvac.heat_type == HeatType::HeatPump) out.push_back(h.hvac.cop_rated);
    }
    return out;
}

std::vector<House> electrify(std::vector<House> houses, const HeatingShares& split, const std::vector<double>& cop_pool,
                             std::uint64_t seed, const ScenarioContext& ctx) {
    const double electric = split.heat_pump + split.resistance;
    const double p_hp = electric > 0.0 ? split.heat_pump / electric : 0.5;
    for (std::size_t i = 0; i < houses.size(); ++i) {
        auto& h = houses[i];
        if (h.hvac.heat_type != HeatType::Gas) continue;
        Rng rng = make_rng(seed, tag(ctx, "electrify"), i);
        const double u = uniform(rng, 0.0, 1.0);
        const double c = draw_cop(rng, cop_pool);
        if (u < p_hp) {
            h.hvac.heat_type = HeatType::HeatPump;
            h.hvac.cop_rated = c;
        } else {
            h.hvac.heat_type = HeatType::Resistance;
            h.hvac.cop_rated = 1.0;
        }
        size_hvac(h, ctx.sizing);
    }
    return houses;
}

std::vector<House> insulate(std::vector<House> houses, std::pair<double, double> range, std::uint64_t seed,
                            const ScenarioContext& ctx) {
    for (std::size_t i = 0; i < houses.size(); ++i) {
        auto& h = houses[i];
        Rng rng = make_rng(seed, tag(ctx, "insulate"), i);
        const double m = uniform(rng, range.first, range.second);
        // Opaque assemblies only; glazing and leakage keep their base values.
        auto& e = h.envelope;
        e.r_walls *= m;
        e.r_ceilings *= m;
        e.r_floors *= m;
        e.r_doors *= m;
        // Equipment for the better envelope is sized smaller.
        size_hvac(h, ctx.sizing);
    }
    return houses;
}

std::vector<House> convert_resistance(std::vector<House> houses, const std::vector<double>& cop_pool,
                                      std::uint64_t seed, const ScenarioContext& ctx) {
    for (std::size_t i = 0; i < houses.size(); ++i) {
        auto& h = houses[i];
        if (h.hvac.heat_type != HeatType::Resistance) continue;
        Rng rng = make_rng(seed, tag(ctx, "technology"), i);
        h.hvac.heat_type = HeatType::HeatPump;
        h.hvac.cop_rated = draw_cop(rng, cop_pool);
        size_hvac(h, ctx.sizing);
    }
    return houses;
}

std::vector<House> add_pv(std::vector<House> houses, double penetration, std::uint64_t seed,
                          const ScenarioContext& ctx) {
    for (const auto i : select_exact(houses.size(), penetration, make_rng(seed, tag(ctx, "pv-select")))) {
        Rng rng = make_rng(seed, tag(ctx, "pv"), i);
        houses[i].pv = sample_pv_panel(rng, ctx.latitude);
    }
    return houses;
}

std::vector<House> add_batteries(std::vector<House> houses, double penetration, const BatterySampling& params,
                                 std::uint64_t seed, const ScenarioContext& ctx) {
    for (const auto i : select_exact(houses.size(), penetration, make_rng(seed, tag(ctx, "battery-select")))) {
        Rng rng = make_rng(seed, tag(ctx, "battery"), i);
        houses[i].battery = sample_battery(rng, derive_seed(seed, tag(ctx, "battery-schedule"), i), params);
    }
    return houses;
}

std::vector<House> apply_scenario(const std::vector<House>& base, const ScenarioSpec& spec, std::uint64_t seed,
                                  const ScenarioContext& ctx) {
    if (base.empty()) throw ValidationError("scenario: base population is empty");
    if (const auto diag = validate_spec(spec); !diag.empty()) throw ValidationError("scenario: " + diag.front());

    const auto& o = spec.overrides;
    const auto cops = heat_pump_cops(base);
    const HeatingShares split = o.heating_shares.value_or(HeatingShares{0.0, 0.5, 0.5});
    const auto range = o.r_multiplier_range.value_or(kInsulationMultiplierRange);

    switch (spec.case_id) {
        case CaseId::BAU: return base;
        case CaseId::Case1: return electrify(base, split, cops, seed, ctx);
        case CaseId::Case1a: return insulate(electrify(base, split, cops, seed, ctx), range, seed, ctx);
        case CaseId::Case1b: return convert_resistance(electrify(base, split, cops, seed, ctx), cops, seed, ctx);
        case CaseId::Case1c:
            return insulate(convert_resistance(electrify(base, split, cops, seed, ctx), cops, seed, ctx), range, seed,
                            ctx);
        case CaseId::Case2:
        case CaseId::Case2a: {
            auto houses = o.electrify_base.value_or(false) ? electrify(base, split, cops, seed, ctx) : base;
            houses = add_pv(std::move(houses), o.pv_penetration.value_or(kPvPenetration), seed, ctx);
            if (spec.case_id == CaseId::Case2a) {
                houses = add_batteries(std::move(houses), o.battery_penetration.value_or(kBatteryPenetration),
                                       o.battery.value_or(BatterySampling{}), seed, ctx);
            }
            return houses;
        }
    }
    throw ValidationError("scenario: unhandled case");
}

// ---- JSON -----------------------------------------------------------------

nlohmann::json to_json(const ScenarioSpec& spec) {
    nlohmann::json o = nlohmann::json::object();
    const auto& ov = spec.overrides;
    if (ov.heating_shares) {
        o["heating_shares"] = {{"Gas", ov.heating_shares->gas},
                               {"Resistance", ov.heating_shares->resistance},
                               {"HeatPump", ov.heating_shares->heat_pump}};
    }
    if (ov.r_multiplier_range) o["r_multiplier_range"] = {ov.r_multiplier_range->first, ov.r_multiplier_range->second};
    if (ov.pv_penetration) o["pv_penetration"] = *ov.pv_penetration;
    if (ov.battery_penetration) o["battery_penetration"] = *ov.battery_penetration;
    if (ov.battery) {
        o["battery"] = {{"energy_kwh", ov.battery->energy_kwh},
                        {"power_kw", ov.battery->power_kw},
                        {"spread", ov.battery->spread}};
    }
    if (ov.electrify_base) o["electrify_base"] = *ov.electrify_base;
    return {{"case", std::string(to_string(spec.case_id))}, {"overrides", o}, {"seed", spec.seed}};
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    try {
        ScenarioSpec s;
        s.case_id = parse_case_id(j.at("case").get<std::string>());
        s.seed = j.value("seed", s.seed);
        if (!j.contains("overrides")) return s;
        const auto& o = j.at("overrides");
        auto& ov = s.overrides;
        if (o.contains("heating_shares")) {
            const auto& h = o.at("heating_shares");
            ov.heating_shares = HeatingShares{h.value("Gas", 0.0), h.value("Resistance", 0.0), h.value("HeatPump", 0.0)};
        }
        if (o.contains("r_multiplier_range")) {
            const auto& r = o.at("r_multiplier_range");
            if (!r.is_array() || r.size() != 2) throw ValidationError("r_multiplier_range must be [low, high]");
            ov.r_multiplier_range = std::pair{r[0].get<double>(), r[1].get<double>()};
        }
        if (o.contains("pv_penetration")) ov.pv_penetration = o.at("pv_penetration").get<double>();
        if (o.contains("battery_penetration")) ov.battery_penetration = o.at("battery_penetration").get<double>();
        if (o.contains("battery")) {
            const auto& b = o.at("battery");
            BatterySampling d;
            ov.battery = BatterySampling{b.value("energy_kwh", d.energy_kwh), b.value("power_kw", d.power_kw),
                                         b.value("spread", d.spread)};
        }
        if (o.contains("electrify_base")) ov.electrify_base = o.at("electrify_base").get<bool>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

}  // namespace gridstorm
