#include "gridstorm/engine.hpp"

#include "gridstorm/error.hpp"
#include "gridstorm/rng.hpp"
#include "text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace gridstorm {

namespace {

const double kTan95 = std::tan(std::acos(0.95));

double reactive_ratio(double pf) { return pf >= 1.0 ? 0.0 : std::tan(std::acos(pf)); }

struct HouseRuntime {
    const House* house;
    std::size_t node;
    ThermalPropagator propagator;
    HouseState state;
    std::optional<Battery> battery;
    double zip_q_ratio;
};

}  // namespace

Series::Series(std::size_t n)
    : total_mw(n), hvac_mw(n), water_heater_mw(n), zip_mw(n), pv_mw(n), battery_mw(n), industrial_mw(n),
      losses_mw(n), viol_a_low(n), viol_a_high(n), viol_b_low(n), viol_b_high(n), overloads(n) {}

ViolationCounts Series::violations_at(std::size_t k) const {
    return {viol_a_low.at(k), viol_a_high.at(k), viol_b_low.at(k), viol_b_high.at(k)};
}

std::array<const std::vector<double>*, 8> load_columns(const Series& s) {
    return {&s.total_mw, &s.hvac_mw, &s.water_heater_mw, &s.zip_mw,
            &s.pv_mw,    &s.battery_mw, &s.industrial_mw, &s.losses_mw};
}

std::array<std::vector<double>*, 8> load_columns(Series& s) {
    return {&s.total_mw, &s.hvac_mw, &s.water_heater_mw, &s.zip_mw,
            &s.pv_mw,    &s.battery_mw, &s.industrial_mw, &s.losses_mw};
}

std::array<const std::vector<std::int64_t>*, 5> count_columns(const Series& s) {
    return {&s.viol_a_low, &s.viol_a_high, &s.viol_b_low, &s.viol_b_high, &s.overloads};
}

std::array<std::vector<std::int64_t>*, 5> count_columns(Series& s) {
    return {&s.viol_a_low, &s.viol_a_high, &s.viol_b_low, &s.viol_b_high, &s.overloads};
}

void validate(const SimConfig& c) {
    if (c.end <= c.start) throw ValidationError("end must be after start");
    if (c.dt <= 0) throw ValidationError("dt must be > 0");
    if ((c.end - c.start) % c.dt != 0) throw ValidationError("dt must divide end - start");
    if (c.options.zip_iterations < 1) throw ValidationError("zip_iterations must be >= 1");
    validate(c.options.bands);
    if (const auto diag = validate_spec(c.scenario); !diag.empty()) throw ValidationError("scenario: " + diag.front());
    for (const auto& r : c.regions) {
        validate(r.config.stats);
        (void)r.config.effective_scaling_factor();
        if (r.feeders.empty()) throw ValidationError("region '" + r.config.name + "' has no feeders");
        if (r.weather.empty() || r.weather.start() > c.start || r.weather.end() < c.end) {
            throw ValidationError("region '" + r.config.name + "': weather does not cover the simulation window");
        }
    }
}

std::vector<House> build_houses(const RegionInput& region, std::size_t feeder_index, const ScenarioSpec& scenario,
                                std::uint64_t seed) {
    const auto& feeder = region.feeders.at(feeder_index);
    PopulationStats stats = region.config.stats;
    stats.seed = derive_seed(seed, "population:" + region.config.name, region.config.stats.seed);
    const auto base = populate(stats, feeder);
    if (scenario.case_id == CaseId::BAU) return base;
    const ScenarioContext ctx{stats.hvac_sizing, stats.latitude, region.config.name + "/" + feeder.name};
    return apply_scenario(base, scenario, scenario.seed, ctx);
}

Series simulate_feeder(const FeederModel& feeder, const std::vector<House>& houses, const WeatherSeries& weather,
                       Seconds start, Seconds end, Seconds dt, const EngineOptions& options) {
    if (end <= start || dt <= 0 || (end - start) % dt != 0) {
        throw ContractError("simulate_feeder: window must be a positive multiple of dt");
    }
    if (weather.empty() || weather.start() > start || weather.end() < end) {
        throw ValidationError("weather exhausted: series covers [" + std::to_string(weather.empty() ? 0 : weather.start()) +
                              ", " + std::to_string(weather.empty() ? 0 : weather.end()) + "]");
    }
    const auto steps = static_cast<std::size_t>((end - start) / dt);
    const double dts = static_cast<double>(dt);
    Series out(steps);

    const RadialNetwork net(feeder);
    const std::size_t n_nodes = net.size();

    std::vector<HouseRuntime> rt;
    rt.reserve(houses.size());
    for (const auto& h : houses) {
        validate(h.envelope);
        validate(h.hvac);
        if (h.pv) validate(*h.pv);
        if (h.battery) validate(*h.battery);
        rt.push_back({&h, feeder.node_index(h.node), ThermalPropagator(h.envelope, dts), h.initial, h.battery,
                      reactive_ratio(h.zip.power_factor)});
    }

    std::vector<Complex> fixed(n_nodes), zip_z(n_nodes), zip_i(n_nodes), zip_p(n_nodes), loads(n_nodes);
    std::vector<Complex> voltages;

    for (std::size_t k = 0; k < steps; ++k) {
        const Seconds t = start + static_cast<Seconds>(k) * dt;
        const WeatherSample w = weather.at(t);
        const double hour = solar::solar_hour(t);
        std::fill(fixed.begin(), fixed.end(), Complex{});
        std::fill(zip_z.begin(), zip_z.end(), Complex{});
        std::fill(zip_i.begin(), zip_i.end(), Complex{});
        std::fill(zip_p.begin(), zip_p.end(), Complex{});

        double hvac_kw = 0.0, wh_kw = 0.0, pv_kw = 0.0, batt_kw = 0.0;
        for (auto& r : rt) {
            const House& h = *r.house;
            const HouseState before = r.state;

            HouseState s = before;
            s.hvac_mode = thermostat_decide(before, h.hvac, w.temperature_f);
            const HvacOutput hv = hvac_output(h.hvac, s.hvac_mode, w.temperature_f);
            const double zip_kw = h.zip.nominal_kw * zip_shape(hour + h.zip.shape_shift_hours);
            const InternalGains gains{zip_kw * 1000.0 * kBtuhPerWatt, h.solar_gain_factor * w.ghi_wm2};
            s = r.propagator.step(s, w.temperature_f, hv, gains);

            double house_wh = 0.0;
            if (h.water_heater) {
                const auto& use = *h.water_heater;
                const double gpm = use.daily_gallons * hot_water_shape(hour + use.shape_shift_hours) / 60.0;
                const auto ws = step_waterheater(s, use.tank, gpm, use.inlet_temp, before.air_temp, dts);
                s = ws.state;
                house_wh = ws.electric_power / 1000.0;
            }
            double house_pv = 0.0;
            if (h.pv) house_pv = -pv_power(*h.pv, w, t);
            double house_batt = 0.0;
            if (r.battery) {
                const auto bs = battery_step(*r.battery, t, dts);
                r.battery = bs.battery;
                house_batt = bs.meter_power;
            }
            r.state = s;

            const double hvac = hv.electric_power / 1000.0;
            hvac_kw += hvac;
            wh_kw += house_wh;
            pv_kw += house_pv;
            batt_kw += house_batt;
            fixed[r.node] += Complex{hvac + house_wh + house_pv + house_batt, hv.motor_power / 1000.0 * kTan95};
            const Complex zs{zip_kw, zip_kw * r.zip_q_ratio};
            zip_z[r.node] += zs * h.zip.fractions.z;
            zip_i[r.node] += zs * h.zip.fractions.i;
            zip_p[r.node] += zs * h.zip.fractions.p;
        }

        // Voltage-dependent plug loads: iterate to a fixed point in |V|.
        std::vector<double> mags(n_nodes, feeder.source_voltage_pu);
        if (!voltages.empty()) {
            for (std::size_t i = 0; i < n_nodes; ++i) mags[i] = std::abs(voltages[i]);
        }
        PowerFlowResult res;
        for (int it = 0; it < options.zip_iterations; ++it) {
            for (std::size_t i = 0; i < n_nodes; ++i) {
                loads[i] = fixed[i] + zip_z[i] * (mags[i] * mags[i]) + zip_i[i] * mags[i] + zip_p[i];
            }
            try {
                res = net.solve(loads, options.flow, voltages);
            } catch (const SolverError& e) {
                throw SolverError("step " + std::to_string(k) + " (t=" + std::to_string(t) + "): " + e.what(),
                                  e.worst_mismatch());
            }
            double change = 0.0;
            for (std::size_t i = 0; i < n_nodes; ++i) {
                const double m = std::abs(res.voltages[i]);
                change = std::max(change, std::abs(m - mags[i]));
                mags[i] = m;
            }
            voltages = res.voltages;
            if (change < options.zip_tolerance) break;
        }

        double zip_kw = 0.0, served_kw = 0.0;
        for (std::size_t i = 0; i < n_nodes; ++i) served_kw += loads[i].real();
        zip_kw = served_kw - (hvac_kw + wh_kw + pv_kw + batt_kw);
        // Served load is what the final solve saw; losses close the balance.
        const double source_kw = res.source_injection.real();

        out.total_mw[k] = source_kw / 1000.0;
        out.hvac_mw[k] = hvac_kw / 1000.0;
        out.water_heater_mw[k] = wh_kw / 1000.0;
        out.zip_mw[k] = zip_kw / 1000.0;
        out.pv_mw[k] = pv_kw / 1000.0;
        out.battery_mw[k] = batt_kw / 1000.0;
        out.industrial_mw[k] = 0.0;
        out.losses_mw[k] = (source_kw - served_kw) / 1000.0;
        const auto v = count_violations(res, options.bands, net.source_index());
        out.viol_a_low[k] = v.a_low;
        out.viol_a_high[k] = v.a_high;
        out.viol_b_low[k] = v.b_low;
        out.viol_b_high[k] = v.b_high;
        out.overloads[k] = net.count_overloads(res);
    }
    return out;
}

Series sum_series(const std::vector<Series>& parts) {
    if (parts.empty()) return Series{};
    const std::size_t n = parts.front().size();
    Series out(n);
    auto dst = load_columns(out);
    auto dstc = count_columns(out);
    for (const auto& p : parts) {
        if (p.size() != n) throw ValidationError("series grids differ in length");
        const auto src = load_columns(p);
        const auto srcc = count_columns(p);
        for (std::size_t c = 0; c < dst.size(); ++c) {
            for (std::size_t k = 0; k < n; ++k) (*dst[c])[k] += (*src[c])[k];
        }
        for (std::size_t c = 0; c < dstc.size(); ++c) {
            for (std::size_t k = 0; k < n; ++k) (*dstc[c])[k] += (*srcc[c])[k];
        }
    }
    return out;
}

Series aggregate_region(const std::vector<Series>& feeders, const RegionConfig& config) {
    if (feeders.empty()) throw ValidationError("region '" + config.name + "': no feeder outputs");
    const double scale = config.effective_scaling_factor();
    Series out = sum_series(feeders);
    for (auto* col : load_columns(out)) {
        for (auto& x : *col) x *= scale;
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.industrial_mw[k] = config.industrial_mw;
        out.total_mw[k] += config.industrial_mw;
    }
    return out;
}

SimOutput aggregate_system(const std::vector<SimOutput>& outputs) {
    if (outputs.empty()) throw ValidationError("aggregate_system: no outputs");
    SimOutput out;
    out.start = outputs.front().start;
    out.dt = outputs.front().dt;
    out.steps = outputs.front().steps;
    out.metadata = outputs.front().metadata;
    std::vector<Series> systems;
    for (const auto& o : outputs) {
        if (o.start != out.start || o.dt != out.dt || o.steps != out.steps) {
            throw ValidationError("aggregate_system: timestep grids differ");
        }
        out.region_names.insert(out.region_names.end(), o.region_names.begin(), o.region_names.end());
        out.regions.insert(out.regions.end(), o.regions.begin(), o.regions.end());
        systems.push_back(o.system);
    }
    out.system = sum_series(systems);
    return out;
}

SimOutput run(const SimConfig& config) {
    validate(config);

    struct Task {
        std::size_t region;
        std::size_t feeder;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<Series>> feeder_out(config.regions.size());
    for (std::size_t r = 0; r < config.regions.size(); ++r) {
        feeder_out[r].resize(config.regions[r].feeders.size());
        for (std::size_t f = 0; f < config.regions[r].feeders.size(); ++f) tasks.push_back({r, f});
    }

    const auto work = [&](const Task& task) {
        const auto& region = config.regions[task.region];
        const auto houses = build_houses(region, task.feeder, config.scenario, config.seed);
        FeederModel feeder = attach(region.feeders[task.feeder], houses);
        double peak = 0.0;
        for (const auto& h : houses) peak += house_peak_kva(h);
        feeder = oversize_equipment(feeder, peak, config.options.oversize_margin);
        feeder_out[task.region][task.feeder] =
            simulate_feeder(feeder, houses, region.weather, config.start, config.end, config.dt, config.options);
    };

    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(tasks.size()));
    if (workers <= 1) {
        for (const auto& t : tasks) work(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++) {
                    try {
                        work(tasks[i]);
                    } catch (...) {
                        const std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = tasks.size();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    SimOutput out;
    out.start = config.start;
    out.dt = config.dt;
    out.steps = static_cast<std::size_t>((config.end - config.start) / config.dt);
    for (std::size_t r = 0; r < config.regions.size(); ++r) {
        out.region_names.push_back(config.regions[r].config.name);
        out.regions.push_back(aggregate_region(feeder_out[r], config.regions[r].config));
    }
    out.system = out.regions.empty() ? Series(out.steps) : sum_series(out.regions);
    out.metadata["case"] = std::string(to_string(config.scenario.case_id));
    out.metadata["seed"] = std::to_string(config.seed);
    out.metadata["scenario_seed"] = std::to_string(config.scenario.seed);
    return out;
}

// ---- files ----------------------------------------------------------------

namespace {

void write_series(const Series& s, const SimOutput& o, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "timestamp";
    for (const char* c : kLoadColumns) out << ',' << c;
    for (const char* c : kCountColumns) out << ',' << c;
    out << '\n';
    const auto loads = load_columns(s);
    const auto counts = count_columns(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << o.time(k);
        for (const auto* col : loads) out << ',' << text::format_double((*col)[k]);
        for (const auto* col : counts) out << ',' << (*col)[k];
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Series read_series(const std::filesystem::path& path, const SimOutput& o) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
    text::strip_cr(line);
    const auto header = text::split(line, ',');
    const std::size_t ncols = 1 + kLoadColumns.size() + kCountColumns.size();
    bool ok = header.size() == ncols && header[0] == "timestamp";
    for (std::size_t c = 0; ok && c < kLoadColumns.size(); ++c) ok = header[1 + c] == kLoadColumns[c];
    for (std::size_t c = 0; ok && c < kCountColumns.size(); ++c) ok = header[1 + kLoadColumns.size() + c] == kCountColumns[c];
    if (!ok) throw ParseError(path.string() + ": unexpected header", 1);

    Series s(o.steps);
    auto loads = load_columns(s);
    auto counts = count_columns(s);
    std::size_t k = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        text::strip_cr(line);
        const auto f = text::split(line, ',');
        if (f.size() != ncols) throw ParseError("expected " + std::to_string(ncols) + " fields", line_no);
        if (k >= o.steps) throw ParseError(path.string() + ": more rows than steps", line_no);
        if (text::parse_int(f[0], "timestamp", line_no) != o.time(k)) throw ParseError("timestamp off the grid", line_no);
        for (std::size_t c = 0; c < loads.size(); ++c) (*loads[c])[k] = text::parse_double(f[1 + c], kLoadColumns[c], line_no);
        for (std::size_t c = 0; c < counts.size(); ++c) {
            (*counts[c])[k] = text::parse_int(f[1 + loads.size() + c], kCountColumns[c], line_no);
        }
        ++k;
    }
    if (k != o.steps) throw ParseError(path.string() + ": " + std::to_string(k) + " rows, expected " + std::to_string(o.steps));
    return s;
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::filesystem::path& p) {
    return p.is_absolute() ? p : base_dir / p;
}

}  // namespace

void write_output(const SimOutput& output, const std::filesystem::path& dir, const std::string& generated_at) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    for (std::size_t r = 0; r < output.regions.size(); ++r) {
        write_series(output.regions[r], output, dir / ("region_" + output.region_names.at(r) + ".csv"));
    }
    write_series(output.system, output, dir / "system.csv");

    nlohmann::json meta;
    meta["schema_version"] = kOutputSchemaVersion;
    meta["start"] = output.start;
    meta["dt"] = output.dt;
    meta["steps"] = output.steps;
    meta["regions"] = output.region_names;
    meta["metadata"] = output.metadata;
    meta["generated_at"] = generated_at;
    std::ofstream out(dir / "meta.json");
    if (!out) throw IoError("cannot write '" + (dir / "meta.json").string() + "'");
    out << meta.dump(2) << '\n';
}

SimOutput read_output(const std::filesystem::path& dir) {
    const auto meta = read_json(dir / "meta.json");
    try {
        const int version = meta.at("schema_version").get<int>();
        if (version != kOutputSchemaVersion) {
            throw IoError("output schema_version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kOutputSchemaVersion) + ")");
        }
        SimOutput o;
        o.start = meta.at("start").get<Seconds>();
        o.dt = meta.at("dt").get<Seconds>();
        o.steps = meta.at("steps").get<std::size_t>();
        o.region_names = meta.at("regions").get<std::vector<std::string>>();
        o.metadata = meta.value("metadata", std::map<std::string, std::string>{});
        for (const auto& name : o.region_names) o.regions.push_back(read_series(dir / ("region_" + name + ".csv"), o));
        o.system = read_series(dir / "system.csv", o);
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError((dir / "meta.json").string() + ": " + e.what());
    }
}

RegionInput load_region_input(const std::filesystem::path& region_file) {
    RegionInput in;
    in.config = load_region(region_file);
    const auto dir = region_file.parent_path();
    in.config.weather_file = resolve(dir, in.config.weather_file);
    for (auto& f : in.config.feeders) {
        f = resolve(dir, f);
        in.feeders.push_back(load_feeder(f));
    }
    in.weather = load_weather(in.config.weather_file);
    return in;
}

RunFile load_run_file(const std::filesystem::path& path) {
    const auto j = read_json(path);
    const auto dir = path.parent_path();
    try {
        const int version = j.value("schema_version", 1);
        if (version != 1) throw IoError("run config schema_version " + std::to_string(version) + " is not supported");
        RunFile rf;
        auto& c = rf.base;
        c.start = j.at("start").get<Seconds>();
        c.end = j.at("end").get<Seconds>();
        c.dt = j.value("dt", Seconds{30});
        c.seed = j.value("seed", std::uint64_t{1});
        c.threads = j.value("threads", 0u);
        c.output_path = resolve(dir, j.value("output_path", std::string("out")));
        if (j.contains("bands")) {
            const auto& b = j.at("bands");
            auto& bands = c.options.bands;
            bands = {b.value("a_low", bands.band_a_low), b.value("a_high", bands.band_a_high),
                     b.value("b_low", bands.band_b_low), b.value("b_high", bands.band_b_high)};
        }
        c.options.oversize_margin = j.value("oversize_margin", c.options.oversize_margin);
        for (const auto& r : j.at("regions")) c.regions.push_back(load_region_input(resolve(dir, r.get<std::string>())));
        for (const auto& s : j.at("scenarios")) rf.scenario_files.push_back(resolve(dir, s.get<std::string>()));
        return rf;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace gridstorm
