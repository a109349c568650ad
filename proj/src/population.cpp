#include "gridstorm/population.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace gridstorm {

namespace {

constexpr double kHalfTon = 6000.0;  // Btu/h
constexpr double kCeilingHeight = 8.0;
constexpr double kDoorArea = 40.0;
constexpr double kWindowToFloor = 0.15;
constexpr double kAspect = 1.5;
constexpr double kMassSurfaceCoefficient = 1.46;  // Btu/(h ft^2 F)
constexpr double kCoolingDesignTemp = 95.0;

constexpr std::array<double, 24> kZipHourly = {0.60, 0.50, 0.45, 0.45, 0.50, 1.00, 1.35, 1.20,
                                               0.95, 0.85, 0.85, 0.90, 0.90, 0.85, 0.80, 0.85,
                                               1.00, 1.30, 1.60, 1.65, 1.55, 1.40, 1.10, 0.80};
constexpr std::array<double, 24> kHotWaterHourly = {0.010, 0.005, 0.005, 0.005, 0.010, 0.060, 0.100, 0.080,
                                                    0.060, 0.050, 0.040, 0.040, 0.040, 0.035, 0.030, 0.030,
                                                    0.035, 0.050, 0.070, 0.080, 0.070, 0.060, 0.040, 0.020};

double round_up_half_ton(double btuh) { return btuh <= 0.0 ? 0.0 : std::ceil(btuh / kHalfTon) * kHalfTon; }

double wrap_hour(double h) {
    h = std::fmod(h, 24.0);
    return h < 0.0 ? h + 24.0 : h;
}

double jitter(Rng& rng, double v, double j) { return v * uniform(rng, 1.0 - j, 1.0 + j); }

std::vector<std::string> attachment_nodes(const FeederModel& feeder) {
    std::vector<std::string> nodes;
    for (const auto& [id, _] : feeder.attachments) nodes.push_back(id);
    return nodes;
}

}  // namespace

double HeatingShares::of(HeatType t) const noexcept {
    switch (t) {
        case HeatType::Gas: return gas;
        case HeatType::Resistance: return resistance;
        case HeatType::HeatPump: return heat_pump;
    }
    return 0.0;
}

void validate(const PopulationStats& s) {
    const auto& h = s.heating_shares;
    if (h.gas < 0.0 || h.resistance < 0.0 || h.heat_pump < 0.0 || std::abs(h.sum() - 1.0) > 1e-9) {
        throw ValidationError("heating shares must be nonnegative and sum to 1");
    }
    for (double p : {s.pv_penetration, s.battery_penetration, s.water_heater_fraction,
                     s.insulation.post2000_fraction, s.floor_area.two_story_fraction}) {
        if (p < 0.0 || p > 1.0) throw ValidationError("penetrations and fractions must lie in [0, 1]");
    }
    if (s.cop_min < 1.0 || s.cop_max < s.cop_min) throw ValidationError("heat-pump COP range must satisfy 1 <= min <= max");
    if (!(s.floor_area.min > 0.0) || s.floor_area.max < s.floor_area.min) {
        throw ValidationError("floor-area bounds must satisfy 0 < min <= max");
    }
    if (!(s.setpoints.deadband > 0.0)) throw ValidationError("deadband must be > 0");
    if (s.insulation.jitter < 0.0 || s.insulation.jitter >= 1.0) throw ValidationError("insulation jitter must lie in [0, 1)");
}

double zip_shape(double hour) noexcept {
    static const double mean = std::accumulate(kZipHourly.begin(), kZipHourly.end(), 0.0) / 24.0;
    const double h = wrap_hour(hour);
    const auto i = static_cast<std::size_t>(h) % 24;
    const double f = h - std::floor(h);
    return (kZipHourly[i] * (1.0 - f) + kZipHourly[(i + 1) % 24] * f) / mean;
}

double hot_water_shape(double hour) noexcept {
    static const double total = std::accumulate(kHotWaterHourly.begin(), kHotWaterHourly.end(), 0.0);
    return kHotWaterHourly[static_cast<std::size_t>(wrap_hour(hour)) % 24] / total;
}

double design_heat_load(const House& house, const HvacSizing& sizing) {
    return compute_ua(house.envelope) * std::max(0.0, house.hvac.heat_setpoint - sizing.design_temp_f);
}

void size_hvac(House& house, const HvacSizing& sizing) {
    const double design = design_heat_load(house, sizing);
    auto& sys = house.hvac;
    sys.aux_capacity = 0.0;
    switch (sys.heat_type) {
        case HeatType::Gas: sys.rated_heat_capacity = round_up_half_ton(design * sizing.gas_factor); break;
        case HeatType::Resistance: sys.rated_heat_capacity = round_up_half_ton(design * sizing.resistance_factor); break;
        case HeatType::HeatPump:
            sys.rated_heat_capacity = round_up_half_ton(design * sizing.heat_pump_factor);
            sys.aux_capacity = round_up_half_ton(design * sizing.aux_factor);
            break;
    }
    const double ua = compute_ua(house.envelope);
    sys.rated_cool_capacity =
        round_up_half_ton(ua * std::max(0.0, kCoolingDesignTemp - sys.cool_setpoint) * sizing.cooling_factor);
    sys.fan_power = 0.0075 * std::max(sys.rated_heat_capacity, sys.rated_cool_capacity);
}

std::vector<House> populate(const PopulationStats& stats, const FeederModel& feeder) {
    validate(stats);
    const auto nodes = attachment_nodes(feeder);
    if (nodes.empty()) throw ValidationError("feeder '" + feeder.name + "' has no attachment nodes");

    const std::string tag = "house:" + feeder.name;
    std::vector<House> houses;
    houses.reserve(stats.n_houses);
    for (std::size_t i = 0; i < stats.n_houses; ++i) {
        Rng rng = make_rng(stats.seed, tag, i);
        House h;
        h.id = i;
        h.node = nodes[i % nodes.size()];

        const auto& fa = stats.floor_area;
        h.floor_area = std::clamp(normal(rng, fa.mean, fa.sd), fa.min, fa.max);
        const int stories = uniform(rng, 0.0, 1.0) < fa.two_story_fraction ? 2 : 1;
        h.vintage = uniform(rng, 0.0, 1.0) < stats.insulation.post2000_fraction ? 1 : 0;
        const auto& v = h.vintage ? stats.insulation.post2000 : stats.insulation.pre2000;
        const double j = stats.insulation.jitter;

        const double footprint = h.floor_area / stories;
        const double width = std::sqrt(footprint / kAspect);
        const double perimeter = 2.0 * (width + kAspect * width);
        const double gross_walls = perimeter * kCeilingHeight * stories;

        auto& e = h.envelope;
        e.area_windows = kWindowToFloor * h.floor_area;
        e.area_doors = kDoorArea;
        e.area_walls = std::max(0.0, gross_walls - e.area_windows - e.area_doors);
        e.area_ceilings = footprint;
        e.area_floors = footprint;
        e.r_walls = jitter(rng, v.r_walls, j);
        e.r_ceilings = jitter(rng, v.r_ceilings, j);
        e.r_floors = jitter(rng, v.r_floors, j);
        e.r_doors = jitter(rng, v.r_doors, j);
        e.u_windows = jitter(rng, v.u_windows, j);
        e.ach = jitter(rng, v.ach, j);
        e.volume = h.floor_area * kCeilingHeight;
        e.air_heat_capacity = 3.0 * kAirVolumetricHeatCapacity * e.volume;
        e.mass_heat_capacity = 5.0 * e.air_heat_capacity;
        e.mass_conductance = kMassSurfaceCoefficient * (gross_walls + e.area_ceilings + 1.5 * h.floor_area);
        e.solar_mass_fraction = 0.5;
        e.internal_mass_fraction = 0.5;
        h.solar_gain_factor = e.area_windows * 0.6 * 0.317 * 0.35;

        const double u = uniform(rng, 0.0, 1.0);
        const auto& sh = stats.heating_shares;
        auto& sys = h.hvac;
        sys.heat_type = u < sh.gas ? HeatType::Gas : (u < sh.gas + sh.resistance ? HeatType::Resistance : HeatType::HeatPump);
        const double hp_cop = uniform(rng, stats.cop_min, stats.cop_max);
        sys.cop_rated = sys.heat_type == HeatType::HeatPump ? hp_cop : 1.0;
        sys.cop_cool = 3.5;
        const auto& sp = stats.setpoints;
        sys.deadband = sp.deadband;
        sys.heat_setpoint = std::clamp(normal(rng, sp.heat_mean, sp.heat_sd), 64.0, 76.0);
        sys.cool_setpoint =
            std::max(normal(rng, sp.cool_mean, sp.cool_sd), sys.heat_setpoint + sys.deadband + 2.0);
        size_hvac(h, stats.hvac_sizing);

        h.zip.nominal_kw = 0.4 + 0.0005 * h.floor_area;
        h.zip.shape_shift_hours = uniform(rng, -1.0, 1.0);

        const bool has_wh = uniform(rng, 0.0, 1.0) < stats.water_heater_fraction;
        const double gallons_pick = uniform(rng, 0.0, 1.0);
        const double wh_setpoint = normal(rng, 120.0, 3.0);
        const double daily = uniform(rng, 30.0, 70.0);
        const double wh_shift = uniform(rng, -1.0, 1.0);
        const double wh_start = uniform(rng, -0.5, 0.5);
        if (has_wh) {
            WaterHeaterUse w;
            w.tank.tank_gallons = gallons_pick < 0.25 ? 40.0 : (gallons_pick < 0.8 ? 50.0 : 65.0);
            w.tank.setpoint = wh_setpoint;
            w.daily_gallons = daily;
            w.shape_shift_hours = wh_shift;
            h.water_heater = w;
        }

        const double start_offset = uniform(rng, -0.5, 0.5);
        h.initial.air_temp = sys.heat_setpoint + start_offset * sys.deadband;
        h.initial.mass_temp = h.initial.air_temp;
        h.initial.hvac_mode = HvacMode::Off;
        h.initial.wh_temp = h.water_heater ? wh_setpoint + wh_start * h.water_heater->tank.deadband : 120.0;
        houses.push_back(std::move(h));
    }

    // PV and batteries: exact-count selection from independent streams.
    const auto pick = [&](double fraction, const std::string& what) {
        return select_exact(houses.size(), fraction, make_rng(stats.seed, what + ":" + feeder.name));
    };
    for (const auto i : pick(stats.pv_penetration, "pv-select")) {
        Rng rng = make_rng(stats.seed, "pv:" + feeder.name, i);
        houses[i].pv = sample_pv_panel(rng, stats.latitude);
    }
    for (const auto i : pick(stats.battery_penetration, "battery-select")) {
        Rng rng = make_rng(stats.seed, "battery:" + feeder.name, i);
        houses[i].battery = sample_battery(rng, derive_seed(stats.seed, "skew:" + feeder.name, i));
    }
    return houses;
}

std::vector<std::size_t> select_exact(std::size_t n, double fraction, Rng rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates with the portable integer draw.
    const auto k = static_cast<std::size_t>(std::llround(std::clamp(fraction, 0.0, 1.0) * static_cast<double>(n)));
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(
            uniform_int(rng, static_cast<std::int64_t>(i), static_cast<std::int64_t>(n) - 1));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

PvPanel sample_pv_panel(Rng& rng, double latitude) {
    PvPanel p;
    p.rated_dc = uniform(rng, 3.0, 7.0);
    p.tilt = uniform(rng, 15.0, 35.0);
    p.azimuth = uniform(rng, 135.0, 225.0);
    p.derate = 0.86;
    p.latitude = latitude + uniform(rng, -0.5, 0.5);
    return p;
}

Battery sample_battery(Rng& rng, std::uint64_t schedule_seed, const BatterySampling& params) {
    Battery b;
    const double m = uniform(rng, 1.0 - params.spread, 1.0 + params.spread);
    b.energy_capacity = params.energy_kwh * m;
    b.power_rating = params.power_kw * m;
    b.discharge_eff = 0.96;
    b.charge_eff = 0.96;
    b.inverter_eff = 0.98;
    b.soc = b.energy_capacity;
    b.schedule = make_schedule(default_schedule(), schedule_seed);
    return b;
}

FeederModel attach(const FeederModel& feeder, const std::vector<House>& houses) {
    FeederModel out = feeder;
    for (auto& [_, list] : out.attachments) list.clear();
    for (std::size_t i = 0; i < houses.size(); ++i) {
        (void)feeder.node_index(houses[i].node);
        out.attachments[houses[i].node].push_back(i);
    }
    return out;
}

double house_peak_kva(const House& house) {
    const auto& sys = house.hvac;
    double hvac_w = sys.fan_power;
    switch (sys.heat_type) {
        case HeatType::Gas: break;
        case HeatType::Resistance: hvac_w += sys.rated_heat_capacity / kBtuhPerWatt; break;
        case HeatType::HeatPump: {
            const auto out = hvac_output(sys, HvacMode::HeatAux, -10.0);
            hvac_w = out.electric_power;
            break;
        }
    }
    if (sys.has_cooling()) hvac_w = std::max(hvac_w, hvac_output(sys, HvacMode::Cool, 105.0).electric_power);
    double kw = hvac_w / 1000.0 + house.zip.nominal_kw * 1.7;
    if (house.water_heater) kw += house.water_heater->tank.element_power / 1000.0;
    if (house.battery) kw += house.battery->power_rating;
    double export_kw = 0.0;
    if (house.pv) export_kw += house.pv->rated_dc;
    if (house.battery) export_kw += house.battery->power_rating;
    return std::max(kw, export_kw) / 0.95;
}

double scaling_factor(double total_customers, double residential_fraction, double n_modeled) {
    if (!(total_customers > 0.0) || !(residential_fraction > 0.0) || !(n_modeled > 0.0)) {
        throw ContractError("scaling factor inputs must all be > 0");
    }
    return total_customers / (residential_fraction * n_modeled);
}

double RegionConfig::effective_scaling_factor() const {
    if (scaling_factor) {
        if (!(*scaling_factor > 0.0)) throw ValidationError("region '" + name + "': scaling factor must be > 0");
        return *scaling_factor;
    }
    const double modeled = static_cast<double>(stats.n_houses * std::max<std::size_t>(feeders.size(), 1));
    return gridstorm::scaling_factor(total_customers, residential_fraction, modeled);
}

const std::array<RegionTableRow, 8>& region_table() {
    static const std::array<RegionTableRow, 8> table = {{
        {"region1", "Dallas, TX", 2, 893, 3816.95},
        {"region2", "Houston, TX", 2, 1308, 2351.17},
        {"region3", "Lamar, TX", 1, 1539, 58.14},
        {"region4", "Midland, TX", 1, 1539, 479.44},
        {"region5", "Hays, TX", 2, 1308, 1395.95},
        {"region6", "Val Verde, TX", 2, 1525, 67.95},
        {"region7", "Nueces, TX", 1, 1539, 895.00},
        {"region8", "Presidio, TX", 1, 1539, 23.55},
    }};
    return table;
}

// ---- JSON -----------------------------------------------------------------

namespace {

nlohmann::json vintage_json(const VintageEnvelope& v) {
    return {{"r_walls", v.r_walls}, {"r_ceilings", v.r_ceilings}, {"r_floors", v.r_floors},
            {"r_doors", v.r_doors}, {"u_windows", v.u_windows},   {"ach", v.ach}};
}

VintageEnvelope vintage_from(const nlohmann::json& j, const VintageEnvelope& d) {
    return {j.value("r_walls", d.r_walls), j.value("r_ceilings", d.r_ceilings), j.value("r_floors", d.r_floors),
            j.value("r_doors", d.r_doors), j.value("u_windows", d.u_windows),   j.value("ach", d.ach)};
}

const nlohmann::json& child(const nlohmann::json& j, const char* key) {
    static const nlohmann::json empty = nlohmann::json::object();
    return j.contains(key) ? j.at(key) : empty;
}

}  // namespace

nlohmann::json to_json(const PopulationStats& s) {
    nlohmann::json j;
    j["n_houses"] = s.n_houses;
    j["heating_shares"] = {{"Gas", s.heating_shares.gas},
                           {"Resistance", s.heating_shares.resistance},
                           {"HeatPump", s.heating_shares.heat_pump}};
    j["insulation"] = {{"post2000_fraction", s.insulation.post2000_fraction},
                       {"pre2000", vintage_json(s.insulation.pre2000)},
                       {"post2000", vintage_json(s.insulation.post2000)},
                       {"jitter", s.insulation.jitter}};
    const auto& z = s.hvac_sizing;
    j["hvac_sizing"] = {{"design_temp_f", z.design_temp_f},         {"heat_pump_factor", z.heat_pump_factor},
                        {"aux_factor", z.aux_factor},               {"resistance_factor", z.resistance_factor},
                        {"gas_factor", z.gas_factor},               {"cooling_factor", z.cooling_factor}};
    const auto& f = s.floor_area;
    j["floor_area"] = {{"mean", f.mean}, {"sd", f.sd}, {"min", f.min}, {"max", f.max},
                       {"two_story_fraction", f.two_story_fraction}};
    const auto& p = s.setpoints;
    j["setpoints"] = {{"heat_mean", p.heat_mean}, {"heat_sd", p.heat_sd},   {"cool_mean", p.cool_mean},
                      {"cool_sd", p.cool_sd},     {"deadband", p.deadband}};
    j["cop_min"] = s.cop_min;
    j["cop_max"] = s.cop_max;
    j["water_heater_fraction"] = s.water_heater_fraction;
    j["pv_penetration"] = s.pv_penetration;
    j["battery_penetration"] = s.battery_penetration;
    j["latitude"] = s.latitude;
    j["seed"] = s.seed;
    return j;
}

PopulationStats stats_from_json(const nlohmann::json& j) {
    try {
        PopulationStats s;
        s.n_houses = j.value("n_houses", s.n_houses);
        const auto& hs = child(j, "heating_shares");
        s.heating_shares = {hs.value("Gas", 0.0), hs.value("Resistance", 0.0), hs.value("HeatPump", 0.0)};
        if (hs.empty()) s.heating_shares = HeatingShares{};
        const auto& ins = child(j, "insulation");
        s.insulation.post2000_fraction = ins.value("post2000_fraction", s.insulation.post2000_fraction);
        s.insulation.pre2000 = vintage_from(child(ins, "pre2000"), s.insulation.pre2000);
        s.insulation.post2000 = vintage_from(child(ins, "post2000"), s.insulation.post2000);
        s.insulation.jitter = ins.value("jitter", s.insulation.jitter);
        const auto& z = child(j, "hvac_sizing");
        auto& sz = s.hvac_sizing;
        sz.design_temp_f = z.value("design_temp_f", sz.design_temp_f);
        sz.heat_pump_factor = z.value("heat_pump_factor", sz.heat_pump_factor);
        sz.aux_factor = z.value("aux_factor", sz.aux_factor);
        sz.resistance_factor = z.value("resistance_factor", sz.resistance_factor);
        sz.gas_factor = z.value("gas_factor", sz.gas_factor);
        sz.cooling_factor = z.value("cooling_factor", sz.cooling_factor);
        const auto& f = child(j, "floor_area");
        s.floor_area = {f.value("mean", s.floor_area.mean), f.value("sd", s.floor_area.sd),
                        f.value("min", s.floor_area.min), f.value("max", s.floor_area.max),
                        f.value("two_story_fraction", s.floor_area.two_story_fraction)};
        const auto& p = child(j, "setpoints");
        s.setpoints = {p.value("heat_mean", s.setpoints.heat_mean), p.value("heat_sd", s.setpoints.heat_sd),
                       p.value("cool_mean", s.setpoints.cool_mean), p.value("cool_sd", s.setpoints.cool_sd),
                       p.value("deadband", s.setpoints.deadband)};
        s.cop_min = j.value("cop_min", s.cop_min);
        s.cop_max = j.value("cop_max", s.cop_max);
        s.water_heater_fraction = j.value("water_heater_fraction", s.water_heater_fraction);
        s.pv_penetration = j.value("pv_penetration", s.pv_penetration);
        s.battery_penetration = j.value("battery_penetration", s.battery_penetration);
        s.latitude = j.value("latitude", s.latitude);
        s.seed = j.value("seed", s.seed);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("population stats: ") + e.what());
    }
}

nlohmann::json to_json(const RegionConfig& r) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["name"] = r.name;
    j["weather_file"] = r.weather_file.generic_string();
    j["feeders"] = nlohmann::json::array();
    for (const auto& f : r.feeders) j["feeders"].push_back(f.generic_string());
    j["stats"] = to_json(r.stats);
    j["total_customers"] = r.total_customers;
    j["residential_fraction"] = r.residential_fraction;
    j["industrial_mw"] = r.industrial_mw;
    if (r.scaling_factor) j["scaling_factor"] = *r.scaling_factor;
    return j;
}

RegionConfig region_from_json(const nlohmann::json& j) {
    try {
        const int version = j.value("schema_version", 1);
        if (version != 1) throw IoError("region schema_version " + std::to_string(version) + " is not supported");
        RegionConfig r;
        r.name = j.at("name").get<std::string>();
        r.weather_file = j.at("weather_file").get<std::string>();
        for (const auto& f : j.at("feeders")) r.feeders.emplace_back(f.get<std::string>());
        r.stats = stats_from_json(child(j, "stats"));
        r.total_customers = j.value("total_customers", 0.0);
        r.residential_fraction = j.value("residential_fraction", 1.0);
        r.industrial_mw = j.value("industrial_mw", 0.0);
        if (j.contains("scaling_factor") && !j.at("scaling_factor").is_null()) {
            r.scaling_factor = j.at("scaling_factor").get<double>();
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("region config: ") + e.what());
    }
}

RegionConfig load_region(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open region file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return region_from_json(j);
}

}  // namespace gridstorm
