#include "gridstorm/feeder.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <unordered_map>

namespace gridstorm {

namespace {

constexpr int kSchemaVersion = 1;
const double kSqrt3 = std::sqrt(3.0);

}  // namespace

std::size_t FeederModel::node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    throw ContractError("feeder '" + name + "': unknown node '" + id + "'");
}

std::vector<double> PowerFlowResult::voltage_magnitudes() const {
    std::vector<double> out(voltages.size());
    std::transform(voltages.begin(), voltages.end(), out.begin(), [](Complex v) { return std::abs(v); });
    return out;
}

RadialNetwork::RadialNetwork(const FeederModel& feeder)
    : base_kva_(feeder.base_kva), source_voltage_(feeder.source_voltage_pu, 0.0) {
    const std::size_t n = feeder.nodes.size();
    if (n == 0) throw ContractError("feeder '" + feeder.name + "' has no nodes");
    if (!(feeder.base_kva > 0.0)) throw ContractError("feeder base_kva must be > 0");
    if (!(feeder.source_voltage_pu > 0.0)) throw ContractError("source voltage must be > 0");

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(feeder.nodes[i].nominal_voltage > 0.0)) {
            throw ContractError("node '" + feeder.nodes[i].id + "' needs a positive nominal voltage");
        }
        if (!index.emplace(feeder.nodes[i].id, i).second) {
            throw ContractError("duplicate node id '" + feeder.nodes[i].id + "'");
        }
    }
    const auto lookup = [&](const std::string& id) {
        const auto it = index.find(id);
        if (it == index.end()) throw ContractError("feeder '" + feeder.name + "': unknown node '" + id + "'");
        return it->second;
    };
    source_ = lookup(feeder.source);

    if (feeder.lines.size() != n - 1) {
        throw ContractError("feeder '" + feeder.name + "' is not radial: " + std::to_string(feeder.lines.size()) +
                            " lines for " + std::to_string(n) + " nodes");
    }
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);
    for (std::size_t k = 0; k < feeder.lines.size(); ++k) {
        const auto& l = feeder.lines[k];
        const auto a = lookup(l.from), b = lookup(l.to);
        if (a == b) throw ContractError("line " + std::to_string(k) + " is a self-loop");
        if (l.resistance < 0.0) throw ContractError("line " + std::to_string(k) + " has negative resistance");
        adj[a].emplace_back(b, k);
        adj[b].emplace_back(a, k);
    }

    parent_.assign(n, npos);
    parent_line_.assign(n, npos);
    z_pu_.assign(n, Complex{});
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(source_);
    seen[source_] = true;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop();
        order_.push_back(u);
        for (const auto& [v, k] : adj[u]) {
            if (seen[v]) {
                if (k != parent_line_[u]) throw ContractError("feeder '" + feeder.name + "' contains a loop");
                continue;
            }
            seen[v] = true;
            parent_[v] = u;
            parent_line_[v] = k;
            const double vbase = feeder.nodes[u].nominal_voltage;
            const double zbase = vbase * vbase / (base_kva_ * 1000.0);
            z_pu_[v] = Complex(feeder.lines[k].resistance, feeder.lines[k].reactance) / zbase;
            q.push(v);
        }
    }
    if (order_.size() != n) throw ContractError("feeder '" + feeder.name + "' is disconnected");

    current_base_.assign(feeder.lines.size(), 0.0);
    ampacity_.assign(feeder.lines.size(), 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const auto k = parent_line_[v];
        if (k == npos) continue;
        const double vbase = feeder.nodes[parent_[v]].nominal_voltage;
        current_base_[k] = base_kva_ * 1000.0 / (kSqrt3 * vbase);
        ampacity_[k] = feeder.lines[k].ampacity;
    }
    for (const auto& t : feeder.transformers) transformers_.emplace_back(lookup(t.node), t.rating_kva);
}

PowerFlowResult RadialNetwork::solve(std::span<const Complex> loads_kva, const PowerFlowOptions& opts,
                                     std::span<const Complex> warm_start) const {
    const std::size_t n = order_.size();
    if (loads_kva.size() != n) throw ContractError("power flow: load vector size mismatch");
    std::vector<Complex> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(loads_kva[i].real()) || !std::isfinite(loads_kva[i].imag())) {
            throw ContractError("power flow: non-finite load at node " + std::to_string(i));
        }
        s[i] = loads_kva[i] / base_kva_;
    }

    std::vector<Complex> v(n, source_voltage_);
    if (warm_start.size() == n) std::copy(warm_start.begin(), warm_start.end(), v.begin());
    v[source_] = source_voltage_;
    std::vector<Complex> branch(n);

    const auto backward = [&](const std::vector<Complex>& volts) {
        for (std::size_t i = 0; i < n; ++i) branch[i] = std::conj(s[i] / volts[i]);
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            const auto u = *it;
            if (parent_[u] != npos) branch[parent_[u]] += branch[u];
        }
    };

    PowerFlowResult r;
    double mismatch = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (iter < opts.max_iterations) {
        ++iter;
        backward(v);
        mismatch = 0.0;
        for (const auto u : order_) {
            if (parent_[u] == npos) continue;
            const Complex next = v[parent_[u]] - z_pu_[u] * branch[u];
            mismatch = std::max(mismatch, std::abs(next - v[u]));
            v[u] = next;
        }
        if (!std::isfinite(mismatch)) break;
        if (mismatch < opts.tolerance) break;
    }
    if (!(mismatch < opts.tolerance)) {
        throw SolverError("power flow did not converge after " + std::to_string(iter) +
                              " sweeps (worst voltage update " + std::to_string(mismatch) + " pu)",
                          mismatch);
    }

    // Final accounting uses currents consistent with the converged voltages.
    backward(v);
    r.iterations = iter;
    r.voltages = v;
    r.node_loads.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.node_loads[i] = s[i] * base_kva_;
    r.line_flows.assign(current_base_.size(), Complex{});
    r.line_currents.assign(current_base_.size(), 0.0);
    Complex losses{};
    Complex source_current = std::conj(s[source_] / v[source_]);
    for (std::size_t u = 0; u < n; ++u) {
        const auto k = parent_line_[u];
        if (k == npos) continue;
        losses += z_pu_[u] * std::norm(branch[u]);
        r.line_flows[k] = v[parent_[u]] * std::conj(branch[u]) * base_kva_;
        r.line_currents[k] = std::abs(branch[u]) * current_base_[k];
        if (parent_[u] == source_) source_current += branch[u];
    }
    r.losses_kw = losses.real() * base_kva_;
    r.losses_kvar = losses.imag() * base_kva_;
    r.source_injection = v[source_] * std::conj(source_current) * base_kva_;
    return r;
}

int RadialNetwork::count_overloads(const PowerFlowResult& result) const {
    int count = 0;
    for (std::size_t k = 0; k < ampacity_.size(); ++k) {
        if (ampacity_[k] > 0.0 && result.line_currents[k] > ampacity_[k]) ++count;
    }
    for (const auto& [node, rating] : transformers_) {
        if (rating > 0.0 && std::abs(result.node_loads[node]) > rating) ++count;
    }
    return count;
}

PowerFlowResult solve_power_flow(const FeederModel& feeder, const std::map<std::string, Complex>& node_loads_kva,
                                 const PowerFlowOptions& opts) {
    const RadialNetwork net(feeder);
    std::vector<Complex> loads(feeder.nodes.size());
    for (const auto& [id, s] : node_loads_kva) loads[feeder.node_index(id)] = s;
    return net.solve(loads, opts);
}

void validate(const ViolationBands& b) {
    if (!(b.band_b_low < b.band_a_low && b.band_a_low < 1.0 && 1.0 < b.band_a_high && b.band_a_high <= b.band_b_high)) {
        throw ContractError("violation bands must satisfy b_low < a_low < 1 < a_high <= b_high");
    }
}

ViolationCounts count_violations(const PowerFlowResult& result, const ViolationBands& bands,
                                 std::optional<std::size_t> source_index) {
    ViolationCounts c;
    for (std::size_t i = 0; i < result.voltages.size(); ++i) {
        if (source_index && *source_index == i) continue;
        const double v = std::abs(result.voltages[i]);
        if (v < bands.band_a_low) ++c.a_low;
        if (v > bands.band_a_high) ++c.a_high;
        if (v < bands.band_b_low) ++c.b_low;
        if (v > bands.band_b_high) ++c.b_high;
    }
    return c;
}

Complex zip_load(Complex nominal_kva, const ZipFractions& f, double voltage_pu) {
    if (std::abs(f.z + f.i + f.p - 1.0) > 1e-9) throw ContractError("ZIP fractions must sum to 1");
    return nominal_kva * (f.z * voltage_pu * voltage_pu + f.i * voltage_pu + f.p);
}

FeederModel oversize_equipment(const FeederModel& feeder, double peak_estimate_kva, double margin) {
    if (!(margin >= 1.0)) throw ContractError("oversize margin must be >= 1");
    const RadialNetwork net(feeder);
    const std::size_t n = feeder.nodes.size();

    std::vector<double> houses(n, 0.0);
    double total = 0.0;
    for (const auto& [id, list] : feeder.attachments) {
        houses[feeder.node_index(id)] += static_cast<double>(list.size());
        total += static_cast<double>(list.size());
    }
    FeederModel out = feeder;
    if (total == 0.0 || peak_estimate_kva <= 0.0) return out;

    std::vector<double> downstream = houses;
    const auto& order = net.order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto u = *it;
        if (net.parent()[u] != RadialNetwork::npos) downstream[net.parent()[u]] += downstream[u];
    }
    for (std::size_t u = 0; u < n; ++u) {
        const auto k = net.parent_line()[u];
        if (k == RadialNetwork::npos) continue;
        const double share_kva = peak_estimate_kva * downstream[u] / total;
        const double kv = feeder.nodes[net.parent()[u]].nominal_voltage / 1000.0;
        const double needed_a = margin * share_kva / (kSqrt3 * kv);
        out.lines[k].ampacity = std::max(out.lines[k].ampacity, needed_a);
    }
    for (auto& t : out.transformers) {
        const double share_kva = peak_estimate_kva * houses[feeder.node_index(t.node)] / total;
        t.rating_kva = std::max(t.rating_kva, margin * share_kva);
    }
    return out;
}

FeederModel feeder_from_json(const nlohmann::json& j) {
    try {
        const int version = j.value("schema_version", kSchemaVersion);
        if (version != kSchemaVersion) {
            throw IoError("feeder schema_version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kSchemaVersion) + ")");
        }
        FeederModel f;
        f.name = j.value("name", "feeder");
        f.base_kva = j.value("base_kva", 1000.0);
        f.source = j.at("source").at("node").get<std::string>();
        f.source_voltage_pu = j.at("source").value("voltage_pu", 1.0);
        for (const auto& n : j.at("nodes")) {
            f.nodes.push_back({n.at("id").get<std::string>(), n.at("nominal_voltage").get<double>()});
        }
        for (const auto& l : j.at("lines")) {
            f.lines.push_back({l.at("from").get<std::string>(), l.at("to").get<std::string>(),
                               l.at("r_ohm").get<double>(), l.at("x_ohm").get<double>(), l.value("ampacity_a", 0.0)});
        }
        if (j.contains("transformers")) {
            for (const auto& t : j.at("transformers")) {
                f.transformers.push_back({t.at("node").get<std::string>(), t.at("rating_kva").get<double>()});
            }
        }
        if (j.contains("attachments")) {
            for (const auto& [node, list] : j.at("attachments").items()) {
                f.attachments[node] = list.get<std::vector<std::size_t>>();
            }
        }
        (void)RadialNetwork(f);
        return f;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("feeder JSON: ") + e.what());
    }
}

nlohmann::json to_json(const FeederModel& f) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["name"] = f.name;
    j["base_kva"] = f.base_kva;
    j["source"] = {{"node", f.source}, {"voltage_pu", f.source_voltage_pu}};
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : f.nodes) j["nodes"].push_back({{"id", n.id}, {"nominal_voltage", n.nominal_voltage}});
    j["lines"] = nlohmann::json::array();
    for (const auto& l : f.lines) {
        j["lines"].push_back(
            {{"from", l.from}, {"to", l.to}, {"r_ohm", l.resistance}, {"x_ohm", l.reactance}, {"ampacity_a", l.ampacity}});
    }
    j["transformers"] = nlohmann::json::array();
    for (const auto& t : f.transformers) j["transformers"].push_back({{"node", t.node}, {"rating_kva", t.rating_kva}});
    j["attachments"] = nlohmann::json::object();
    for (const auto& [node, list] : f.attachments) j["attachments"][node] = list;
    return j;
}

FeederModel load_feeder(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feeder file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return feeder_from_json(j);
}

void save_feeder(const FeederModel& feeder, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write feeder file '" + path.string() + "'");
    out << to_json(feeder).dump(2) << '\n';
}

FeederModel generate_desk_feeder(const std::string& name, std::uint64_t seed, const DeskFeederOptions& opts) {
    if (opts.nodes < 2 || opts.trunk_nodes < 1 || opts.trunk_nodes >= opts.nodes) {
        throw ContractError("desk feeder needs nodes >= 2 and 1 <= trunk_nodes < nodes");
    }
    Rng rng = make_rng(seed, "desk-feeder");
    FeederModel f;
    f.name = name;
    f.base_kva = 1000.0;
    f.source = "n0";
    f.source_voltage_pu = opts.source_voltage_pu;
    for (int i = 0; i < opts.nodes; ++i) f.nodes.push_back({"n" + std::to_string(i), opts.nominal_voltage});

    // Trunk: 336 ACSR-like, laterals: 1/0-like (ohm per mile).
    const Complex trunk_z{0.306, 0.627};
    const Complex lateral_z{0.592, 0.714};
    for (int i = 1; i <= opts.trunk_nodes; ++i) {
        const double miles = uniform(rng, 0.2, 0.5) * opts.impedance_scale;
        f.lines.push_back({"n" + std::to_string(i - 1), "n" + std::to_string(i), trunk_z.real() * miles,
                           trunk_z.imag() * miles, 400.0});
    }
    for (int i = opts.trunk_nodes + 1; i < opts.nodes; ++i) {
        const auto parent = uniform_int(rng, 1, i - 1);
        const double miles = uniform(rng, 0.1, 0.3) * opts.impedance_scale;
        f.lines.push_back({"n" + std::to_string(parent), "n" + std::to_string(i), lateral_z.real() * miles,
                           lateral_z.imag() * miles, 200.0});
    }
    for (int i = 1; i < opts.nodes; ++i) {
        const std::string id = "n" + std::to_string(i);
        f.attachments[id] = {};
        f.transformers.push_back({id, 75.0});
    }
    return f;
}

}  // namespace gridstorm
