#pragma once

// Independent reference solutions used by unit and acceptance tests. Nothing
// here calls the solver under test.

#include "gridstorm/feeder.hpp"
#include "gridstorm/rng.hpp"
#include "gridstorm/thermal.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <string>
#include <utility>
#include <vector>

namespace oracle {

using gridstorm::Complex;

// Two-node house: exponential of the affine system augmented with a constant
// state, time in hours.
inline std::pair<double, double> thermal_step(const gridstorm::ThermalEnvelope& e, double ta, double tm, double t_out,
                                              double q_h, const gridstorm::InternalGains& g, double dt_seconds) {
    const double ua = gridstorm::compute_ua(e);
    const double ca = e.air_heat_capacity, cm = e.mass_heat_capacity, hm = e.mass_conductance;
    const double q_air = q_h + (1 - e.internal_mass_fraction) * g.q_internal + (1 - e.solar_mass_fraction) * g.q_solar;
    const double q_mass = e.internal_mass_fraction * g.q_internal + e.solar_mass_fraction * g.q_solar;
    Eigen::Matrix3d a;
    a << -(ua + hm) / ca, hm / ca, (q_air + ua * t_out) / ca,
         hm / cm, -hm / cm, q_mass / cm,
         0, 0, 0;
    const Eigen::Matrix3d m = (a * (dt_seconds / 3600.0)).exp();
    const Eigen::Vector3d x = m * Eigen::Vector3d(ta, tm, 1.0);
    return {x(0), x(1)};
}

// A mid-size house used by the thermal checks; U_A = 304.596... Btu/(h F).
inline gridstorm::ThermalEnvelope reference_envelope() {
    gridstorm::ThermalEnvelope e;
    e.area_walls = 1000;
    e.r_walls = 19;
    e.area_ceilings = 1000;
    e.r_ceilings = 30;
    e.area_floors = 1000;
    e.r_floors = 19;
    e.area_doors = 40;
    e.r_doors = 5;
    e.area_windows = 100;
    e.u_windows = 0.5;
    e.volume = 12000;
    e.ach = 0.5;
    e.air_heat_capacity = 3.0 * 0.018 * e.volume;
    e.mass_heat_capacity = 5.0 * e.air_heat_capacity;
    e.mass_conductance = 6000.0;
    e.solar_mass_fraction = 0.3;
    e.internal_mass_fraction = 0.6;
    return e;
}

// Two-bus feeder: 1000 V, 1000 kVA base (1 ohm base), z = 0.01 + j0.01.
inline gridstorm::FeederModel two_bus() {
    gridstorm::FeederModel f;
    f.base_kva = 1000.0;
    f.source = "s";
    f.nodes = {{"s", 1000.0}, {"r", 1000.0}};
    f.lines = {{"s", "r", 0.01, 0.01, 0.0}};
    return f;
}

// Receiving-end |V| for S = 1 + j0.5 pu: the larger root of
// a^2 - (1 - 2(PR + QX)) a + |z|^2 |S|^2 = 0 with a = |V|^2.
inline constexpr double kTwoBusVoltage = 0.9847548931204426;
inline constexpr double kTwoBusLossesKw = 12.890023767272543;

inline gridstorm::FeederModel random_radial(std::uint64_t seed, int n) {
    using namespace gridstorm;
    Rng rng = make_rng(seed, "test-radial");
    FeederModel f;
    f.source = "b0";
    f.source_voltage_pu = uniform(rng, 0.98, 1.04);
    for (int i = 0; i < n; ++i) f.nodes.push_back({"b" + std::to_string(i), 12470.0});
    for (int i = 1; i < n; ++i) {
        const auto p = uniform_int(rng, 0, i - 1);
        f.lines.push_back({"b" + std::to_string(p), "b" + std::to_string(i), uniform(rng, 0.3, 2.5),
                           uniform(rng, 0.3, 2.5), 0.0});
    }
    return f;
}

inline std::vector<Complex> random_loads(std::uint64_t seed, int n) {
    gridstorm::Rng rng = gridstorm::make_rng(seed, "test-loads");
    std::vector<Complex> loads(n);
    for (int i = 1; i < n; ++i) {
        loads[i] = Complex(gridstorm::uniform(rng, -50.0, 400.0), gridstorm::uniform(rng, -20.0, 150.0));
    }
    return loads;
}

// Full Newton-Raphson on the bus admittance matrix in rectangular
// coordinates with a central-difference Jacobian. Node 0 is the slack.
inline std::vector<Complex> newton_voltages(const gridstorm::FeederModel& f, const std::vector<Complex>& loads_kva) {
    const int n = static_cast<int>(f.nodes.size());
    const int slack = static_cast<int>(f.node_index(f.source));
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& l : f.lines) {
        const int a = static_cast<int>(f.node_index(l.from)), b = static_cast<int>(f.node_index(l.to));
        const double zb = f.nodes[a].nominal_voltage * f.nodes[a].nominal_voltage / (f.base_kva * 1000.0);
        const Complex yl = 1.0 / (Complex(l.resistance, l.reactance) / zb);
        y(a, a) += yl;
        y(b, b) += yl;
        y(a, b) -= yl;
        y(b, a) -= yl;
    }
    std::vector<int> pq;
    for (int i = 0; i < n; ++i) {
        if (i != slack) pq.push_back(i);
    }
    const int m = 2 * static_cast<int>(pq.size());
    auto voltages = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXcd v(n);
        v(slack) = f.source_voltage_pu;
        for (std::size_t k = 0; k < pq.size(); ++k) v(pq[k]) = Complex(x(2 * k), x(2 * k + 1));
        return v;
    };
    auto mismatch = [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXcd v = voltages(x);
        const Eigen::VectorXcd inj = v.cwiseProduct((y * v).conjugate());
        Eigen::VectorXd r(m);
        for (std::size_t k = 0; k < pq.size(); ++k) {
            const Complex d = inj(pq[k]) + loads_kva[pq[k]] / f.base_kva;
            r(2 * k) = d.real();
            r(2 * k + 1) = d.imag();
        }
        return r;
    };
    Eigen::VectorXd x(m);
    for (std::size_t k = 0; k < pq.size(); ++k) {
        x(2 * k) = f.source_voltage_pu;
        x(2 * k + 1) = 0.0;
    }
    for (int it = 0; it < 50; ++it) {
        const Eigen::VectorXd r = mismatch(x);
        if (r.cwiseAbs().maxCoeff() < 1e-13) break;
        Eigen::MatrixXd jac(m, m);
        for (int k = 0; k < m; ++k) {
            Eigen::VectorXd xp = x, xm = x;
            xp(k) += 1e-7;
            xm(k) -= 1e-7;
            jac.col(k) = (mismatch(xp) - mismatch(xm)) / 2e-7;
        }
        x -= jac.fullPivLu().solve(r);
    }
    const Eigen::VectorXcd v = voltages(x);
    return {v.data(), v.data() + n};
}

}  // namespace oracle
