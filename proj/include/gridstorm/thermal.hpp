#pragma once

#include <array>
#include <string_view>

// Two-node (air + mass) equivalent-thermal-parameter house model, its
// thermostat, HVAC electrical model, and a single-node water heater.
// Thermal units are imperial: F, Btu, Btu/h, hours; electrical power in W.

namespace gridstorm {

inline constexpr double kBtuhPerWatt = 3.412;
inline constexpr double kAirVolumetricHeatCapacity = 0.018;  // Btu/(ft^3 F)

struct ThermalEnvelope {
    // Areas, ft^2
    double area_walls = 0.0;
    double area_ceilings = 0.0;
    double area_floors = 0.0;
    double area_doors = 0.0;
    double area_windows = 0.0;
    // R-values, F ft^2 h/Btu
    double r_walls = 0.0;
    double r_ceilings = 0.0;
    double r_floors = 0.0;
    double r_doors = 0.0;
    double u_windows = 0.0;  // Btu/(h ft^2 F)
    double ach = 0.0;        // air changes per hour
    double volume = 0.0;     // conditioned volume, ft^3
    double air_heat_capacity = 0.0;   // C_A, Btu/F
    double mass_heat_capacity = 0.0;  // C_M, Btu/F
    double mass_conductance = 0.0;    // H_M, Btu/(h F)
    double solar_mass_fraction = 0.5;
    double internal_mass_fraction = 0.5;

    bool operator==(const ThermalEnvelope&) const = default;
};

/// Throws ContractError when an invariant does not hold.
void validate(const ThermalEnvelope& env);

enum class HvacMode { Off, Heat, HeatAux, Cool };
enum class HeatType { Gas, Resistance, HeatPump };

[[nodiscard]] std::string_view to_string(HvacMode m) noexcept;
[[nodiscard]] std::string_view to_string(HeatType t) noexcept;
/// Throws ParseError for unknown names.
[[nodiscard]] HeatType parse_heat_type(std::string_view name);

struct HouseState {
    double air_temp = 70.0;   // T_A
    double mass_temp = 70.0;  // T_M
    HvacMode hvac_mode = HvacMode::Off;
    double wh_temp = 120.0;
    bool wh_element_on = false;

    bool operator==(const HouseState&) const = default;
};

struct HvacSystem {
    HeatType heat_type = HeatType::Gas;
    double rated_heat_capacity = 0.0;  // Btu/h
    double rated_cool_capacity = 0.0;  // Btu/h, 0 when no cooling
    double cop_rated = 1.0;            // heat pumps: heating COP at 47 F
    double cop_cool = 3.5;
    double aux_capacity = 0.0;         // Btu/h, heat pumps only
    double fan_power = 0.0;            // W
    double heat_setpoint = 70.0;
    double cool_setpoint = 76.0;
    double deadband = 2.0;

    [[nodiscard]] bool has_cooling() const noexcept { return rated_cool_capacity > 0.0; }
    bool operator==(const HvacSystem&) const = default;
};

void validate(const HvacSystem& sys);

struct HvacOutput {
    double heat_to_air = 0.0;     // Q_H from electric equipment, Btu/h (negative when cooling)
    double electric_power = 0.0;  // W
    double motor_power = 0.0;     // W of electric_power drawn by motors (fan, compressor)
    double gas_heat = 0.0;        // Btu/h delivered by combustion

    bool operator==(const HvacOutput&) const = default;
};

/// Heat delivered to the air node by the HVAC system, all fuels.
[[nodiscard]] inline double total_heat(const HvacOutput& h) noexcept { return h.heat_to_air + h.gas_heat; }

struct InternalGains {
    double q_internal = 0.0;  // Q_I, Btu/h
    double q_solar = 0.0;     // Q_S, Btu/h
};

/// Envelope conductance U_A, Btu/(h F), infiltration included.
[[nodiscard]] double compute_ua(const ThermalEnvelope& env);

/// Heat gain to the air node, Q_A, Btu/h.
[[nodiscard]] double compute_qa(const HvacOutput& hvac, const InternalGains& gains, const ThermalEnvelope& env);

/// Exact constant-input propagator of the two-node system for a fixed dt.
/// Precomputing it per house keeps the inner simulation loop cheap; results
/// are bit-identical to step_thermal.
class ThermalPropagator {
public:
    ThermalPropagator(const ThermalEnvelope& env, double dt_seconds);

    [[nodiscard]] HouseState step(const HouseState& state, double t_out, const HvacOutput& hvac,
                                  const InternalGains& gains) const;
    [[nodiscard]] double ua() const noexcept { return ua_; }

private:
    double ua_;
    double c_air_, c_mass_, h_mass_, f_i_, f_s_;
    // x(t+dt) = Phi x(t) + Gamma b, with b the constant forcing (F/h).
    std::array<double, 4> phi_{};
    std::array<double, 4> gamma_{};
};

/// Advances (T_A, T_M) by dt seconds holding inputs constant.
[[nodiscard]] HouseState step_thermal(const HouseState& state, const ThermalEnvelope& env, double t_out,
                                      const HvacOutput& hvac, const InternalGains& gains, double dt_seconds);

/// Hysteresis thermostat with heat-pump auxiliary staging.
[[nodiscard]] HvacMode thermostat_decide(const HouseState& state, const HvacSystem& sys, double t_out);

/// Heat-pump heating COP vs outdoor temperature.
[[nodiscard]] double cop(const HvacSystem& sys, double t_out);

/// Heat-pump heating capacity multiplier vs outdoor temperature.
[[nodiscard]] double cap_derate(double t_out) noexcept;

[[nodiscard]] HvacOutput hvac_output(const HvacSystem& sys, HvacMode mode, double t_out);

struct WaterHeater {
    double tank_gallons = 50.0;
    double element_power = 4500.0;  // W
    double setpoint = 120.0;
    double deadband = 4.0;
    double tank_ua = 3.0;  // standby loss, Btu/(h F)

    bool operator==(const WaterHeater&) const = default;
};

struct WaterHeaterStep {
    HouseState state;
    double electric_power = 0.0;  // W, averaged over the step
};

/// Single-node tank: thermostat on wh_temp at the start of the step decides
/// the element; the temperature then follows the exact exponential update.
[[nodiscard]] WaterHeaterStep step_waterheater(const HouseState& state, const WaterHeater& wh, double draw_gpm,
                                               double inlet_temp, double ambient, double dt_seconds);

}  // namespace gridstorm
