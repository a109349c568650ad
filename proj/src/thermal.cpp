#include "gridstorm/thermal.hpp"

#include "gridstorm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gridstorm {

namespace {

constexpr double kSecondsPerHour = 3600.0;
constexpr double kWaterBtuPerGallonF = 8.34;

// expm1(z)/z, continuous at 0.
double phi1(double z) {
    if (std::abs(z) < 1e-8) return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

// (e^z (z - 1) + 1) / z^2, continuous at 0 (value 1/2).
double phi2(double z) {
    if (std::abs(z) < 1e-4) return 0.5 + z / 3.0 + z * z / 8.0;
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

double conduction(double area, double r, const char* name) {
    if (area < 0.0) throw ContractError(std::string("negative area: ") + name);
    if (area == 0.0) return 0.0;
    if (!(r > 0.0)) throw ContractError(std::string("R-value must be > 0 when area > 0: ") + name);
    return area / r;
}

}  // namespace

std::string_view to_string(HvacMode m) noexcept {
    switch (m) {
        case HvacMode::Off: return "Off";
        case HvacMode::Heat: return "Heat";
        case HvacMode::HeatAux: return "HeatAux";
        case HvacMode::Cool: return "Cool";
    }
    return "?";
}

std::string_view to_string(HeatType t) noexcept {
    switch (t) {
        case HeatType::Gas: return "Gas";
        case HeatType::Resistance: return "Resistance";
        case HeatType::HeatPump: return "HeatPump";
    }
    return "?";
}

HeatType parse_heat_type(std::string_view name) {
    if (name == "Gas") return HeatType::Gas;
    if (name == "Resistance") return HeatType::Resistance;
    if (name == "HeatPump") return HeatType::HeatPump;
    throw ParseError("unknown heat type '" + std::string(name) + "'");
}

void validate(const ThermalEnvelope& env) {
    const double nonneg[] = {env.area_walls,         env.area_ceilings,    env.area_floors, env.area_doors,
                             env.area_windows,       env.r_walls,          env.r_ceilings,  env.r_floors,
                             env.r_doors,            env.u_windows,        env.ach,         env.volume,
                             env.air_heat_capacity,  env.mass_heat_capacity, env.mass_conductance};
    for (double v : nonneg) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("envelope parameters must be finite and >= 0");
    }
    if (env.solar_mass_fraction < 0.0 || env.solar_mass_fraction > 1.0 || env.internal_mass_fraction < 0.0 ||
        env.internal_mass_fraction > 1.0) {
        throw ContractError("gain fractions must lie in [0, 1]");
    }
    (void)compute_ua(env);
}

void validate(const HvacSystem& sys) {
    if (sys.rated_heat_capacity < 0.0 || sys.rated_cool_capacity < 0.0 || sys.aux_capacity < 0.0 ||
        sys.fan_power < 0.0) {
        throw ContractError("HVAC capacities and fan power must be >= 0");
    }
    if (!(sys.deadband > 0.0)) throw ContractError("thermostat deadband must be > 0");
    if (sys.has_cooling() && !(sys.heat_setpoint + sys.deadband / 2 < sys.cool_setpoint - sys.deadband / 2)) {
        throw ContractError("heating and cooling bands overlap");
    }
    if (sys.heat_type == HeatType::HeatPump && sys.cop_rated < 1.0) throw ContractError("heat-pump COP must be >= 1");
    if (sys.heat_type != HeatType::HeatPump && sys.aux_capacity > 0.0) {
        throw ContractError("auxiliary heat is only valid for heat pumps");
    }
    if (sys.has_cooling() && !(sys.cop_cool > 0.0)) throw ContractError("cooling COP must be > 0");
}

double compute_ua(const ThermalEnvelope& env) {
    if (env.area_windows < 0.0 || env.u_windows < 0.0) throw ContractError("negative window area or U-value");
    return env.area_windows * env.u_windows + conduction(env.area_doors, env.r_doors, "doors") +
           conduction(env.area_walls, env.r_walls, "walls") +
           conduction(env.area_ceilings, env.r_ceilings, "ceilings") +
           conduction(env.area_floors, env.r_floors, "floors") +
           kAirVolumetricHeatCapacity * env.volume * env.ach;
}

double compute_qa(const HvacOutput& hvac, const InternalGains& gains, const ThermalEnvelope& env) {
    return total_heat(hvac) + (1.0 - env.internal_mass_fraction) * gains.q_internal +
           (1.0 - env.solar_mass_fraction) * gains.q_solar;
}

ThermalPropagator::ThermalPropagator(const ThermalEnvelope& env, double dt_seconds)
    : ua_(compute_ua(env)),
      c_air_(env.air_heat_capacity),
      c_mass_(env.mass_heat_capacity),
      h_mass_(env.mass_conductance),
      f_i_(env.internal_mass_fraction),
      f_s_(env.solar_mass_fraction) {
    if (!(dt_seconds > 0.0)) throw ContractError("thermal step: dt must be > 0");
    if (!(c_air_ > 0.0) || !(c_mass_ > 0.0)) throw ContractError("thermal step: C_A and C_M must be > 0");

    const double tau = dt_seconds / kSecondsPerHour;
    const double a11 = -(ua_ + h_mass_) / c_air_;
    const double a12 = h_mass_ / c_air_;
    const double a21 = h_mass_ / c_mass_;
    const double a22 = -h_mass_ / c_mass_;

    // A is similar to a symmetric matrix, so both eigenvalues are real and <= 0.
    const double half_tr = 0.5 * (a11 + a22);
    const double disc = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + a12 * a21);
    const double det = a11 * a22 - a12 * a21;
    const double l1 = half_tr - disc;
    const double l2 = l1 != 0.0 ? det / l1 : 0.0;

    const double gap = l1 - l2;
    const double scale = std::max({std::abs(l1), std::abs(l2), 1e-300});
    if (std::abs(gap) > 1e-9 * scale) {
        // Sylvester's formula for f(A) with distinct eigenvalues.
        const double e1 = std::exp(l1 * tau), e2 = std::exp(l2 * tau);
        const double g1 = tau * phi1(l1 * tau), g2 = tau * phi1(l2 * tau);
        const std::array<double, 4> m2 = {a11 - l2, a12, a21, a22 - l2};  // A - l2 I
        const std::array<double, 4> m1 = {a11 - l1, a12, a21, a22 - l1};  // A - l1 I
        for (int k = 0; k < 4; ++k) {
            phi_[k] = (e1 * m2[k] - e2 * m1[k]) / gap;
            gamma_[k] = (g1 * m2[k] - g2 * m1[k]) / gap;
        }
    } else {
        const double l = half_tr;
        const double z = l * tau;
        const double e = std::exp(z);
        const double g = tau * phi1(z);
        const double h = tau * tau * phi2(z);
        const std::array<double, 4> n = {a11 - l, a12, a21, a22 - l};
        const std::array<double, 4> eye = {1.0, 0.0, 0.0, 1.0};
        for (int k = 0; k < 4; ++k) {
            phi_[k] = e * (eye[k] + tau * n[k]);
            gamma_[k] = g * eye[k] + h * n[k];
        }
    }
}

HouseState ThermalPropagator::step(const HouseState& state, double t_out, const HvacOutput& hvac,
                                   const InternalGains& gains) const {
    const double q_air = total_heat(hvac) + (1.0 - f_i_) * gains.q_internal + (1.0 - f_s_) * gains.q_solar;
    const double q_mass = f_i_ * gains.q_internal + f_s_ * gains.q_solar;
    const double b1 = (q_air + ua_ * t_out) / c_air_;
    const double b2 = q_mass / c_mass_;

    HouseState next = state;
    next.air_temp = phi_[0] * state.air_temp + phi_[1] * state.mass_temp + gamma_[0] * b1 + gamma_[1] * b2;
    next.mass_temp = phi_[2] * state.air_temp + phi_[3] * state.mass_temp + gamma_[2] * b1 + gamma_[3] * b2;
    require_finite(next.air_temp, "air temperature");
    require_finite(next.mass_temp, "mass temperature");
    return next;
}

HouseState step_thermal(const HouseState& state, const ThermalEnvelope& env, double t_out, const HvacOutput& hvac,
                        const InternalGains& gains, double dt_seconds) {
    return ThermalPropagator(env, dt_seconds).step(state, t_out, hvac, gains);
}

HvacMode thermostat_decide(const HouseState& state, const HvacSystem& sys, double t_out) {
    const double t = state.air_temp;
    const double half = sys.deadband / 2.0;

    bool heating = state.hvac_mode == HvacMode::Heat || state.hvac_mode == HvacMode::HeatAux;
    if (t < sys.heat_setpoint - half) {
        heating = true;
    } else if (t > sys.heat_setpoint + half) {
        heating = false;
    }

    bool cooling = sys.has_cooling() && state.hvac_mode == HvacMode::Cool;
    if (sys.has_cooling()) {
        if (t > sys.cool_setpoint + half) {
            cooling = true;
        } else if (t < sys.cool_setpoint - half) {
            cooling = false;
        }
    }

    if (heating) {
        if (sys.heat_type == HeatType::HeatPump &&
            (t_out < 20.0 || t < sys.heat_setpoint - 2.0 * sys.deadband)) {
            return HvacMode::HeatAux;
        }
        return HvacMode::Heat;
    }
    return cooling ? HvacMode::Cool : HvacMode::Off;
}

double cap_derate(double t_out) noexcept {
    // 1.0 at 47 F falling linearly to 0.65 at 0 F.
    const double v = 1.0 - 0.35 * (47.0 - t_out) / 47.0;
    return std::clamp(v, 0.4, 1.0);
}

double cop(const HvacSystem& sys, double t_out) {
    if (sys.heat_type != HeatType::HeatPump) throw ContractError("cop() is defined for heat pumps only");
    // Line through (47, c) and (17, 0.6 c), floored at 1.
    const double slope = 0.4 * sys.cop_rated / 30.0;
    return std::max(1.0, sys.cop_rated + slope * (t_out - 47.0));
}

HvacOutput hvac_output(const HvacSystem& sys, HvacMode mode, double t_out) {
    HvacOutput out;
    switch (mode) {
        case HvacMode::Off:
            return out;
        case HvacMode::Heat:
        case HvacMode::HeatAux:
            if (mode == HvacMode::HeatAux && sys.heat_type != HeatType::HeatPump) {
                throw ContractError("HeatAux requested for a " + std::string(to_string(sys.heat_type)) + " system");
            }
            switch (sys.heat_type) {
                case HeatType::Gas:
                    out.gas_heat = sys.rated_heat_capacity;
                    out.electric_power = sys.fan_power;
                    out.motor_power = sys.fan_power;
                    break;
                case HeatType::Resistance:
                    out.heat_to_air = sys.rated_heat_capacity;
                    out.electric_power = sys.rated_heat_capacity / kBtuhPerWatt + sys.fan_power;
                    out.motor_power = sys.fan_power;
                    break;
                case HeatType::HeatPump: {
                    const double q = sys.rated_heat_capacity * cap_derate(t_out);
                    const double compressor = q / (kBtuhPerWatt * cop(sys, t_out));
                    out.heat_to_air = q;
                    out.electric_power = compressor + sys.fan_power;
                    out.motor_power = out.electric_power;
                    if (mode == HvacMode::HeatAux) {
                        out.heat_to_air += sys.aux_capacity;
                        out.electric_power += sys.aux_capacity / kBtuhPerWatt;
                    }
                    break;
                }
            }
            return out;
        case HvacMode::Cool:
            if (!sys.has_cooling()) throw ContractError("Cool requested for a system without cooling");
            out.heat_to_air = -sys.rated_cool_capacity;
            out.electric_power = sys.rated_cool_capacity / (kBtuhPerWatt * sys.cop_cool) + sys.fan_power;
            out.motor_power = out.electric_power;
            return out;
    }
    return out;
}

WaterHeaterStep step_waterheater(const HouseState& state, const WaterHeater& wh, double draw_gpm, double inlet_temp,
                                 double ambient, double dt_seconds) {
    if (!(dt_seconds > 0.0)) throw ContractError("water heater step: dt must be > 0");
    if (draw_gpm < 0.0) throw ContractError("water heater step: draw must be >= 0");

    WaterHeaterStep out{state, 0.0};
    const double half = wh.deadband / 2.0;
    bool on = state.wh_element_on;
    if (state.wh_temp < wh.setpoint - half) {
        on = true;
    } else if (state.wh_temp > wh.setpoint + half) {
        on = false;
    }

    const double capacity = kWaterBtuPerGallonF * wh.tank_gallons;  // Btu/F
    const double draw_conductance = draw_gpm * 60.0 * kWaterBtuPerGallonF;  // Btu/(h F)
    const double q_element = on ? wh.element_power * kBtuhPerWatt : 0.0;
    const double k = wh.tank_ua + draw_conductance;
    const double forcing = q_element + wh.tank_ua * ambient + draw_conductance * inlet_temp;
    const double tau = dt_seconds / kSecondsPerHour;
    const double t0 = state.wh_temp;

    out.state.wh_temp = t0 + (forcing - k * t0) / capacity * tau * phi1(-k * tau / capacity);
    out.state.wh_element_on = on;
    out.electric_power = on ? wh.element_power : 0.0;
    require_finite(out.state.wh_temp, "water heater temperature");
    return out;
}

}  // namespace gridstorm
