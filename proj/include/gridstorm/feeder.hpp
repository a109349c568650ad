#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace gridstorm {

using Complex = std::complex<double>;

struct FeederNode {
    std::string id;
    double nominal_voltage = 12470.0;  // V, line-to-line
    bool operator==(const FeederNode&) const = default;
};

struct FeederLine {
    std::string from;
    std::string to;
    double resistance = 0.0;  // ohm
    double reactance = 0.0;   // ohm
    double ampacity = 0.0;    // A
    bool operator==(const FeederLine&) const = default;
};

struct Transformer {
    std::string node;
    double rating_kva = 0.0;
    bool operator==(const Transformer&) const = default;
};

/// Single-phase-equivalent radial feeder. Loads are three-phase kVA;
/// per-unit values use base_kva and each node's nominal voltage.
struct FeederModel {
    std::string name = "feeder";
    double base_kva = 1000.0;
    std::string source;
    double source_voltage_pu = 1.0;
    std::vector<FeederNode> nodes;
    std::vector<FeederLine> lines;
    std::vector<Transformer> transformers;
    // node id -> house indices; keys are the nodes houses may attach to
    std::map<std::string, std::vector<std::size_t>> attachments;

    [[nodiscard]] std::size_t node_index(const std::string& id) const;
    bool operator==(const FeederModel&) const = default;
};

struct PowerFlowOptions {
    double tolerance = 1e-10;  // max |dV| between sweeps, pu
    int max_iterations = 100;
};

struct PowerFlowResult {
    std::vector<Complex> voltages;       // pu, per node (model order)
    std::vector<Complex> line_flows;     // kVA at the sending end, per line
    std::vector<double> line_currents;   // A, per line
    std::vector<Complex> node_loads;     // kVA actually served, per node
    double losses_kw = 0.0;              // sum of I^2 R
    double losses_kvar = 0.0;
    Complex source_injection;            // kVA
    int iterations = 0;

    [[nodiscard]] std::vector<double> voltage_magnitudes() const;
};

/// Compiled, validated radial topology. Construction rejects meshed,
/// disconnected, or otherwise malformed feeders with ContractError.
class RadialNetwork {
public:
    explicit RadialNetwork(const FeederModel& feeder);

    /// node_loads_kva is indexed like feeder.nodes. warm_start, when given,
    /// seeds the iteration with previous voltages.
    [[nodiscard]] PowerFlowResult solve(std::span<const Complex> node_loads_kva, const PowerFlowOptions& opts = {},
                                        std::span<const Complex> warm_start = {}) const;

    [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }
    [[nodiscard]] std::size_t source_index() const noexcept { return source_; }
    /// Line index feeding each node (npos for the source).
    [[nodiscard]] const std::vector<std::size_t>& parent_line() const noexcept { return parent_line_; }
    [[nodiscard]] const std::vector<std::size_t>& parent() const noexcept { return parent_; }
    /// Nodes ordered root first; every parent precedes its children.
    [[nodiscard]] const std::vector<std::size_t>& order() const noexcept { return order_; }

    /// Lines above ampacity plus transformers above rating.
    [[nodiscard]] int count_overloads(const PowerFlowResult& result) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    double base_kva_;
    Complex source_voltage_;
    std::size_t source_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> parent_line_;
    std::vector<Complex> z_pu_;        // per node: impedance of the line from its parent
    std::vector<double> current_base_;  // A per pu current, per line
    std::vector<std::pair<std::size_t, double>> transformers_;
    std::vector<double> ampacity_;
};

[[nodiscard]] PowerFlowResult solve_power_flow(const FeederModel& feeder,
                                               const std::map<std::string, Complex>& node_loads_kva,
                                               const PowerFlowOptions& opts = {});

struct ViolationBands {
    double band_a_low = 0.95;
    double band_a_high = 1.05;
    double band_b_low = 0.917;
    double band_b_high = 1.058;
};

void validate(const ViolationBands& bands);

struct ViolationCounts {
    std::int64_t a_low = 0;
    std::int64_t a_high = 0;
    std::int64_t b_low = 0;
    std::int64_t b_high = 0;

    [[nodiscard]] std::int64_t total() const noexcept { return a_low + a_high + b_low + b_high; }
    ViolationCounts& operator+=(const ViolationCounts& o) noexcept {
        a_low += o.a_low;
        a_high += o.a_high;
        b_low += o.b_low;
        b_high += o.b_high;
        return *this;
    }
    bool operator==(const ViolationCounts&) const = default;
};

/// Node voltages outside each band; the source node is excluded.
[[nodiscard]] ViolationCounts count_violations(const PowerFlowResult& result, const ViolationBands& bands = {},
                                               std::optional<std::size_t> source_index = std::nullopt);

struct ZipFractions {
    double z = 0.2;
    double i = 0.2;
    double p = 0.6;
    bool operator==(const ZipFractions&) const = default;
};

/// S(V) = S_nom (z V^2 + i V + p); throws ContractError unless z+i+p = 1.
[[nodiscard]] Complex zip_load(Complex nominal_kva, const ZipFractions& fractions, double voltage_pu);

/// Raises every line ampacity and transformer rating to at least margin
/// times its share of peak_estimate_kva (shares follow attached house counts).
[[nodiscard]] FeederModel oversize_equipment(const FeederModel& feeder, double peak_estimate_kva, double margin);

[[nodiscard]] FeederModel feeder_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const FeederModel& feeder);
[[nodiscard]] FeederModel load_feeder(const std::filesystem::path& path);
void save_feeder(const FeederModel& feeder, const std::filesystem::path& path);

struct DeskFeederOptions {
    int nodes = 30;
    int trunk_nodes = 12;
    double nominal_voltage = 4160.0;
    double source_voltage_pu = 1.03;
    double impedance_scale = 1.0;
};

/// Seeded radial test feeder: a trunk with laterals; every non-source node
/// accepts houses.
[[nodiscard]] FeederModel generate_desk_feeder(const std::string& name, std::uint64_t seed,
                                               const DeskFeederOptions& opts = {});

}  // namespace gridstorm
