#include "gridstorm/der.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridstorm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kAlbedo = 0.2;
constexpr double kMinBeamCosZenith = 0.065;  // below ~86 deg treat GHI as all diffuse

double erbs_diffuse_fraction(double kt) {
    if (kt <= 0.22) return 1.0 - 0.09 * kt;
    if (kt <= 0.80) return 0.9511 - 0.1604 * kt + 4.388 * kt * kt - 16.638 * kt * kt * kt + 12.336 * kt * kt * kt * kt;
    return 0.165;
}

bool in_window(const ScheduleWindow& w, double hour) {
    if (w.start_hour <= w.end_hour) return hour >= w.start_hour && hour < w.end_hour;
    return hour >= w.start_hour || hour < w.end_hour;
}

}  // namespace

void validate(const PvPanel& p) {
    if (!(p.rated_dc > 0.0)) throw ContractError("PV rated_dc must be > 0");
    if (p.tilt < 0.0 || p.tilt > 90.0) throw ContractError("PV tilt must lie in [0, 90]");
    if (p.azimuth < 0.0 || p.azimuth >= 360.0) throw ContractError("PV azimuth must lie in [0, 360)");
    if (!(p.derate > 0.0) || p.derate > 1.0) throw ContractError("PV derate must lie in (0, 1]");
}

double plane_of_array(const PvPanel& panel, double ghi, Seconds time) {
    if (ghi <= 0.0) return 0.0;
    const double beta = panel.tilt * kDeg;
    const double sky = 0.5 * (1.0 + std::cos(beta));
    const double ground = kAlbedo * 0.5 * (1.0 - std::cos(beta));
    const double cz = solar::cos_zenith(panel.latitude, time);
    if (cz < kMinBeamCosZenith) return ghi * (sky + ground);

    const int doy = solar::day_of_year(time);
    const double kt = std::clamp(ghi / (solar::extraterrestrial(doy) * cz), 0.0, 1.0);
    const double dhi = erbs_diffuse_fraction(kt) * ghi;
    const double dni = (ghi - dhi) / cz;

    // Solar azimuth clockwise from north.
    const double lat = panel.latitude * kDeg;
    const double dec = solar::declination(doy);
    const double omega = 15.0 * kDeg * (solar::solar_hour(time) - 12.0);
    const double sz = std::sqrt(std::max(0.0, 1.0 - cz * cz));
    double azimuth = 0.0;
    if (sz > 1e-12) {
        const double c = (std::sin(dec) * std::cos(lat) - std::cos(dec) * std::sin(lat) * std::cos(omega)) / sz;
        azimuth = std::acos(std::clamp(c, -1.0, 1.0));
        if (omega > 0.0) azimuth = 2.0 * std::numbers::pi - azimuth;
    }
    const double cos_inc = cz * std::cos(beta) + sz * std::sin(beta) * std::cos(azimuth - panel.azimuth * kDeg);
    return dni * std::max(0.0, cos_inc) + dhi * sky + ghi * ground;
}

double pv_power(const PvPanel& panel, const WeatherSample& sample, Seconds time) {
    if (sample.ghi_wm2 <= 0.0) return 0.0;
    const double poa = plane_of_array(panel, sample.ghi_wm2, time);
    const double ambient_c = (sample.temperature_f - 32.0) * 5.0 / 9.0;
    const double cell_c = ambient_c + 25.0 * sample.ghi_wm2 / 1000.0;
    const double temp_factor = 1.0 - 0.004 * std::max(0.0, cell_c - 25.0);
    const double p = panel.rated_dc * panel.derate * (poa / 1000.0) * temp_factor;
    return std::clamp(p, 0.0, panel.rated_dc);
}

BatteryCommand DispatchSchedule::at(Seconds time) const {
    const double hour = solar::solar_hour(time + skew);
    for (const auto& w : base) {
        if (in_window(w, hour)) return w.command;
    }
    return BatteryCommand::Idle;
}

DispatchSchedule default_schedule() {
    return DispatchSchedule{{{10.0, 15.0, BatteryCommand::Charge}, {18.0, 23.0, BatteryCommand::Discharge}}, 0};
}

void validate(const Battery& b) {
    if (!(b.energy_capacity > 0.0) || !(b.power_rating > 0.0)) throw ContractError("battery ratings must be > 0");
    if (b.soc < 0.0 || b.soc > b.energy_capacity) throw ContractError("battery SoC outside [0, capacity]");
    for (double e : {b.discharge_eff, b.charge_eff, b.inverter_eff}) {
        if (!(e > 0.0) || e > 1.0) throw ContractError("battery efficiencies must lie in (0, 1]");
    }
    if (std::abs(b.schedule.skew) > kMaxScheduleSkew) throw ContractError("battery schedule skew exceeds 2 h");
}

BatteryStep battery_apply(const Battery& b, BatteryCommand command, double dt_seconds) {
    if (!(dt_seconds > 0.0)) throw ContractError("battery step: dt must be > 0");
    BatteryStep out{b, 0.0, 0.0, 0.0};
    const double hours = dt_seconds / 3600.0;
    switch (command) {
        case BatteryCommand::Idle:
            break;
        case BatteryCommand::Charge: {
            const double path = b.inverter_eff * b.charge_eff;
            const double room = b.energy_capacity - b.soc;
            double ac = b.power_rating;
            double stored = ac * path * hours;
            if (stored >= room) {
                stored = room;
                ac = room / (path * hours);
                out.battery.soc = b.energy_capacity;
            } else {
                out.battery.soc = b.soc + stored;
            }
            out.meter_power = ac;
            out.dc_in = stored;
            break;
        }
        case BatteryCommand::Discharge: {
            const double path = b.inverter_eff * b.discharge_eff;
            double ac = b.power_rating;
            double withdrawn = ac / path * hours;
            if (withdrawn >= b.soc) {
                withdrawn = b.soc;
                ac = b.soc * path / hours;
                out.battery.soc = 0.0;
            } else {
                out.battery.soc = b.soc - withdrawn;
            }
            out.meter_power = -ac;
            out.dc_out = withdrawn;
            break;
        }
    }
    return out;
}

BatteryStep battery_step(const Battery& b, Seconds time, double dt_seconds) {
    return battery_apply(b, b.schedule.at(time), dt_seconds);
}

DispatchSchedule make_schedule(const DispatchSchedule& base, std::uint64_t seed) {
    Rng rng = make_rng(seed, "battery-skew");
    DispatchSchedule out = base;
    out.skew = uniform_int(rng, -kMaxScheduleSkew, kMaxScheduleSkew);
    return out;
}

}  // namespace gridstorm
