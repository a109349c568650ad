#include "gridstorm/metrics.hpp"

#include "gridstorm/error.hpp"
#include "text.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace gridstorm {

namespace {

double hours(const SimOutput& o) { return static_cast<double>(o.dt) / 3600.0; }

void require_same_grid(const SimOutput& a, const SimOutput& b) {
    if (a.start != b.start || a.dt != b.dt || a.steps != b.steps) {
        throw ValidationError("timestep grids differ (start/dt/steps " + std::to_string(a.start) + "/" +
                              std::to_string(a.dt) + "/" + std::to_string(a.steps) + " vs " + std::to_string(b.start) +
                              "/" + std::to_string(b.dt) + "/" + std::to_string(b.steps) + ")");
    }
}

std::int64_t window_sum(const std::vector<std::int64_t>& v, std::pair<std::size_t, std::size_t> w) {
    std::int64_t s = 0;
    for (std::size_t k = w.first; k < w.second; ++k) s += v[k];
    return s;
}

BandChange band(std::int64_t base, std::int64_t count) {
    BandChange b{base, count, std::nullopt};
    if (base != 0) b.pct = 100.0 * static_cast<double>(count - base) / static_cast<double>(base);
    return b;
}

nlohmann::json band_json(const BandChange& b) {
    return {{"base", b.base}, {"count", b.count}, {"pct_change", b.pct ? nlohmann::json(*b.pct) : nlohmann::json("undefined")}};
}

std::string pct_text(const std::optional<double>& p) { return p ? fmt::format("{:+.1f}%", *p) : "undef"; }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

std::pair<std::optional<Seconds>, std::optional<Seconds>> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ValidationError("window must look like start:end (seconds)");
    const auto side = [&](std::string_view s) -> std::optional<Seconds> {
        if (s.empty()) return std::nullopt;
        return text::parse_int(s, "window", 0);
    };
    const std::string_view v(text);
    return {side(v.substr(0, colon)), side(v.substr(colon + 1))};
}

std::pair<std::size_t, std::size_t> window_steps(const SimOutput& grid, const std::optional<TimeWindow>& window) {
    if (!window) {
        if (grid.steps == 0) throw ValidationError("empty window");
        return {0, grid.steps};
    }
    if (window->end <= window->start) throw ValidationError("empty window");
    const Seconds grid_end = grid.time(grid.steps);
    if (window->start < grid.start || window->end > grid_end) {
        throw ValidationError("window [" + std::to_string(window->start) + ", " + std::to_string(window->end) +
                              ") outside the grid [" + std::to_string(grid.start) + ", " + std::to_string(grid_end) + ")");
    }
    // Steps whose start time falls inside the window.
    const auto first = static_cast<std::size_t>((window->start - grid.start + grid.dt - 1) / grid.dt);
    const auto last = static_cast<std::size_t>((window->end - grid.start + grid.dt - 1) / grid.dt);
    if (first >= last) throw ValidationError("empty window");
    return {first, last};
}

Peak peak(const SimOutput& output, const std::optional<TimeWindow>& window) {
    const auto [first, last] = window_steps(output, window);
    const auto& v = output.system.total_mw;
    std::size_t best = first;
    for (std::size_t k = first + 1; k < last; ++k) {
        if (v[k] > v[best]) best = k;
    }
    return {v[best], output.time(best)};
}

double energy_mwh(const SimOutput& output, const std::optional<TimeWindow>& window) {
    const auto [first, last] = window_steps(output, window);
    double e = 0.0;
    for (std::size_t k = first; k < last; ++k) e += output.system.total_mw[k];
    return e * hours(output);
}

double losses_mwh(const SimOutput& output, const std::optional<TimeWindow>& window) {
    const auto [first, last] = window_steps(output, window);
    double e = 0.0;
    for (std::size_t k = first; k < last; ++k) e += output.system.losses_mw[k];
    return e * hours(output);
}

std::vector<double> energy_delta(const SimOutput& case_output, const SimOutput& base,
                                 const std::optional<TimeWindow>& window) {
    require_same_grid(case_output, base);
    const auto [first, last] = window_steps(base, window);
    std::vector<double> out;
    out.reserve(last - first);
    double acc = 0.0;
    for (std::size_t k = first; k < last; ++k) {
        acc += (case_output.system.total_mw[k] - base.system.total_mw[k]) * hours(base);
        out.push_back(acc);
    }
    return out;
}

ReferenceSeries load_reference(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open reference '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
    text::strip_cr(line);
    if (line != "timestamp,supplied_mw") throw ParseError("expected header 'timestamp,supplied_mw'", 1);
    std::vector<Seconds> times;
    ReferenceSeries ref;
    ref.label = path.stem().string();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        text::strip_cr(line);
        if (line.empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 2) throw ParseError("expected 2 fields", line_no);
        times.push_back(text::parse_int(f[0], "timestamp", line_no));
        ref.supplied_mw.push_back(text::parse_double(f[1], "supplied_mw", line_no));
    }
    if (times.size() < 2) throw ParseError(path.string() + ": need at least two rows");
    ref.start = times.front();
    ref.dt = times[1] - times[0];
    if (ref.dt <= 0) throw ParseError("timestamps must increase", 3);
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (times[k] - times[k - 1] != ref.dt) throw ParseError("timestamps are not uniformly spaced", k + 2);
    }
    return ref;
}

void write_reference(const ReferenceSeries& ref, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "timestamp,supplied_mw\n";
    for (std::size_t k = 0; k < ref.supplied_mw.size(); ++k) {
        out << ref.time(k) << ',' << text::format_double(ref.supplied_mw[k]) << '\n';
    }
}

std::vector<double> align_reference(const ReferenceSeries& ref, const SimOutput& grid) {
    if (ref.dt <= 0 || ref.supplied_mw.empty()) throw ValidationError("reference series is empty");
    const Seconds ref_end = ref.time(ref.supplied_mw.size());
    if (grid.start < ref.start || grid.time(grid.steps) > ref_end) {
        throw ValidationError("reference '" + ref.label + "' does not cover the output grid");
    }
    std::vector<double> out(grid.steps);
    for (std::size_t k = 0; k < grid.steps; ++k) {
        out[k] = ref.supplied_mw[static_cast<std::size_t>((grid.time(k) - ref.start) / ref.dt)];
    }
    return out;
}

ReferenceSeries synthetic_reference(const SimOutput& base, const TimeWindow& notch, double notch_mw) {
    ReferenceSeries ref{base.start, base.dt, base.system.total_mw, "synthetic"};
    for (std::size_t k = 0; k < base.steps; ++k) {
        const Seconds t = base.time(k);
        if (t >= notch.start && t < notch.end) ref.supplied_mw[k] -= notch_mw;
    }
    return ref;
}

double unmet_energy(const SimOutput& case_output, const ReferenceSeries& ref, const std::optional<TimeWindow>& window) {
    const auto supplied = align_reference(ref, case_output);
    const auto [first, last] = window_steps(case_output, window);
    double e = 0.0;
    for (std::size_t k = first; k < last; ++k) e += std::max(0.0, case_output.system.total_mw[k] - supplied[k]);
    return e * hours(case_output);
}

ViolationSummary violation_summary(const SimOutput& case_output, const SimOutput& base,
                                   const std::optional<TimeWindow>& window) {
    require_same_grid(case_output, base);
    const auto w = window_steps(base, window);
    const auto& c = case_output.system;
    const auto& b = base.system;
    return {band(window_sum(b.viol_a_low, w), window_sum(c.viol_a_low, w)),
            band(window_sum(b.viol_a_high, w), window_sum(c.viol_a_high, w)),
            band(window_sum(b.viol_b_low, w), window_sum(c.viol_b_low, w)),
            band(window_sum(b.viol_b_high, w), window_sum(c.viol_b_high, w))};
}

MetricsReport compare(const std::vector<LabeledOutput>& outputs, const std::optional<ReferenceSeries>& reference,
                      const std::optional<TimeWindow>& window) {
    if (outputs.size() < 2) throw ValidationError("compare needs at least two outputs");
    const auto& base = outputs.front().output;
    for (const auto& o : outputs) require_same_grid(o.output, base);
    const auto [first, last] = window_steps(base, window);

    MetricsReport report;
    report.baseline = outputs.front().label;
    if (reference) report.reference = reference->label;
    report.window_start = base.time(first);
    report.window_end = base.time(last);

    const Peak base_peak = peak(base, window);
    const double base_losses = losses_mwh(base, window);
    for (const auto& [label, out] : outputs) {
        CaseMetrics m;
        m.label = label;
        m.peak = peak(out, window);
        m.peak_delta_mw = m.peak.mw - base_peak.mw;
        m.energy_mwh = energy_mwh(out, window);
        const auto delta = energy_delta(out, base, window);
        m.energy_delta_mwh = delta.back();
        m.losses_mwh = losses_mwh(out, window);
        if (base_losses != 0.0) m.losses_pct = 100.0 * (m.losses_mwh - base_losses) / base_losses;
        m.violations = violation_summary(out, base, window);
        if (reference) m.unmet_mwh = unmet_energy(out, *reference, window);
        report.cases.push_back(std::move(m));
    }
    return report;
}

nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["baseline"] = r.baseline;
    j["reference"] = r.reference ? nlohmann::json(*r.reference) : nlohmann::json(nullptr);
    j["window"] = {{"start", r.window_start}, {"end", r.window_end}};
    j["cases"] = nlohmann::json::array();
    for (const auto& c : r.cases) {
        nlohmann::json cj;
        cj["label"] = c.label;
        cj["peak_mw"] = c.peak.mw;
        cj["peak_time"] = c.peak.time;
        cj["peak_delta_mw"] = c.peak_delta_mw;
        cj["energy_mwh"] = c.energy_mwh;
        cj["energy_delta_mwh"] = c.energy_delta_mwh;
        cj["losses_mwh"] = c.losses_mwh;
        cj["losses_pct_change"] = c.losses_pct ? nlohmann::json(*c.losses_pct) : nlohmann::json("undefined");
        cj["violations"] = {{"a_low", band_json(c.violations.a_low)},
                            {"a_high", band_json(c.violations.a_high)},
                            {"b_low", band_json(c.violations.b_low)},
                            {"b_high", band_json(c.violations.b_high)}};
        if (c.unmet_mwh) cj["unmet_mwh"] = *c.unmet_mwh;
        j["cases"].push_back(cj);
    }
    return j;
}

std::string format_table(const MetricsReport& r) {
    std::string s = fmt::format("baseline: {}   window: [{}, {})\n", r.baseline, r.window_start, r.window_end);
    s += fmt::format("{:<10} {:>10} {:>10} {:>12} {:>12} {:>10} {:>9} {:>16} {:>16}", "case", "peak_mw", "d_peak",
                     "energy_mwh", "d_energy", "loss_mwh", "d_loss", "A-low", "A-high");
    if (r.reference) s += fmt::format(" {:>11}", "unmet_mwh");
    s += '\n';
    for (const auto& c : r.cases) {
        s += fmt::format("{:<10} {:>10.4f} {:>+10.4f} {:>12.3f} {:>+12.3f} {:>10.4f} {:>9} {:>8} {:>7} {:>8} {:>7}",
                         c.label, c.peak.mw, c.peak_delta_mw, c.energy_mwh, c.energy_delta_mwh, c.losses_mwh,
                         pct_text(c.losses_pct), c.violations.a_low.count, pct_text(c.violations.a_low.pct),
                         c.violations.a_high.count, pct_text(c.violations.a_high.pct));
        if (c.unmet_mwh) s += fmt::format(" {:>11.3f}", *c.unmet_mwh);
        s += '\n';
    }
    return s;
}

void write_plot_data(const std::vector<LabeledOutput>& outputs, const MetricsReport& report,
                     const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    if (outputs.empty()) return;
    const auto& base = outputs.front().output;
    const std::optional<TimeWindow> window = TimeWindow{report.window_start, report.window_end};
    const auto [first, last] = window_steps(base, window);

    auto diff = open_out(dir / "load_difference.csv");
    auto energy = open_out(dir / "energy_difference.csv");
    auto decomp = open_out(dir / "decomposition.csv");
    for (auto* f : {&diff, &energy, &decomp}) *f << "time,series,value\n";
    for (std::size_t i = 1; i < outputs.size(); ++i) {
        const auto& [label, out] = outputs[i];
        const auto delta = energy_delta(out, base, window);
        for (std::size_t k = first; k < last; ++k) {
            diff << base.time(k) << ',' << label << ','
                 << text::format_double(out.system.total_mw[k] - base.system.total_mw[k]) << '\n';
            energy << base.time(k) << ',' << label << ',' << text::format_double(delta[k - first]) << '\n';
        }
    }
    for (const auto& [label, out] : outputs) {
        const auto cols = load_columns(out.system);
        for (std::size_t k = first; k < last; ++k) {
            for (std::size_t c = 0; c < cols.size(); ++c) {
                decomp << out.time(k) << ',' << label << ':' << kLoadColumns[c] << ','
                       << text::format_double((*cols[c])[k]) << '\n';
            }
        }
    }

    auto bars = open_out(dir / "violations_losses.csv");
    bars << "case,metric,value\n";
    for (const auto& c : report.cases) {
        const auto row = [&](const char* metric, const std::string& v) { bars << c.label << ',' << metric << ',' << v << '\n'; };
        row("viol_a_low", std::to_string(c.violations.a_low.count));
        row("viol_a_high", std::to_string(c.violations.a_high.count));
        row("viol_b_low", std::to_string(c.violations.b_low.count));
        row("viol_b_high", std::to_string(c.violations.b_high.count));
        row("losses_mwh", text::format_double(c.losses_mwh));
        const auto pct = [](const std::optional<double>& p) { return p ? text::format_double(*p) : std::string("undefined"); };
        row("viol_a_low_pct", pct(c.violations.a_low.pct));
        row("viol_a_high_pct", pct(c.violations.a_high.pct));
        row("viol_b_low_pct", pct(c.violations.b_low.pct));
        row("viol_b_high_pct", pct(c.violations.b_high.pct));
        row("losses_pct", pct(c.losses_pct));
    }
}

}  // namespace gridstorm
