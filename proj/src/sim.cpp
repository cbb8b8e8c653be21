#include "twinforge/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace twinforge {

void CycleSpec::validate() const {
    if (!(suction_on_at_s >= 0.0) || !(suction_on_at_s < blow_off_at_s) ||
        !(blow_off_at_s < cycle_period_s)) {
        throw Error(ErrorKind::invalid_parameter,
                    "cycle must satisfy 0 <= suction_on_at < blow_off_at < cycle_period");
    }
    if (move_duration_s < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "move duration must be >= 0");
    }
    if (repetitions < 1) {
        throw Error(ErrorKind::invalid_parameter, "repetitions must be >= 1");
    }
}

SignalInputs cycle_inputs_at(const CycleSpec& cycle, double t_s) {
    if (t_s < 0.0 || t_s >= cycle.cycle_period_s * cycle.repetitions) {
        return {};
    }
    const double local = std::fmod(t_s, cycle.cycle_period_s);
    SignalInputs in;
    in.suction = local >= cycle.suction_on_at_s && local < cycle.blow_off_at_s;
    in.blow_off = local >= cycle.blow_off_at_s;
    return in;
}

namespace {

struct InputEdge {
    double t;
    SignalInputs inputs;
};

std::vector<InputEdge> cycle_edges(const CycleSpec& cycle, double duration_s) {
    // the cycle-end edge is written as (k+1)*period, the exact expression of
    // the next cycle's base, so coincident edges compare equal and keep their
    // generation order under the stable sort
    std::vector<InputEdge> edges;
    for (int k = 0; k < cycle.repetitions; ++k) {
        const double base = static_cast<double>(k) * cycle.cycle_period_s;
        if (base > duration_s) {
            break;
        }
        edges.push_back({base + cycle.suction_on_at_s, {true, false}});
        edges.push_back({base + cycle.blow_off_at_s, {false, true}});
        edges.push_back({static_cast<double>(k + 1) * cycle.cycle_period_s, {false, false}});
    }
    std::erase_if(edges, [&](const InputEdge& e) { return e.t > duration_s; });
    std::stable_sort(edges.begin(), edges.end(),
                     [](const InputEdge& a, const InputEdge& b) { return a.t < b.t; });
    return edges;
}

std::vector<InputEdge> trace_edges(const Trace& reference) {
    std::vector<InputEdge> edges;
    SignalInputs prev;
    for (const SignalFrame& f : reference.frames) {
        const SignalInputs in{f.suction, f.blow_off};
        if (!(in == prev) || edges.empty()) {
            edges.push_back({f.t_s, in});
            prev = in;
        }
    }
    return edges;
}

void append_frame(std::vector<SignalFrame>& frames, const SignalFrame& f) {
    if (!frames.empty() && f.t_s == frames.back().t_s) {
        frames.back() = f;
        return;
    }
    frames.push_back(f);
}

Trace run_engine(BehaviorModel& model, const std::vector<InputEdge>& edges, double duration_s,
                 double dt_s, const SimulateOptions& options) {
    if (!(dt_s > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "dt must be > 0");
    }
    if (!(duration_s > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "duration must be > 0");
    }
    model.reset();

    Trace trace;
    trace.meta.model_id = model.metadata().model_id;
    trace.meta.parameters = model.parameters();
    trace.meta.dt_s = dt_s;
    if (!model.models_vacuum()) {
        trace.meta.unmodeled_channels.push_back("vacuum");
    }
    if (!model.models_power()) {
        trace.meta.unmodeled_channels.push_back("power");
    }

    std::size_t edge_idx = 0;
    SignalInputs inputs;
    auto apply_edges_up_to = [&](double t_limit) {
        while (edge_idx < edges.size() && edges[edge_idx].t <= t_limit) {
            const double te = edges[edge_idx].t;
            if (te > model.time()) {
                model.advance_to(te, inputs);
            }
            while (edge_idx < edges.size() && edges[edge_idx].t == te) {
                inputs = edges[edge_idx].inputs;
                ++edge_idx;
            }
            model.advance_to(te, inputs); // zero-length: fires edge transitions
            for (const SignalFrame& ev : model.take_events()) {
                append_frame(trace.frames, ev);
            }
            append_frame(trace.frames, model.current_frame());
        }
    };

    apply_edges_up_to(0.0);
    model.advance_to(0.0, inputs);
    for (const SignalFrame& ev : model.take_events()) {
        append_frame(trace.frames, ev);
    }
    append_frame(trace.frames, model.current_frame());

    const auto total_steps =
        static_cast<std::int64_t>(std::ceil(duration_s / dt_s - 1e-9));
    for (std::int64_t k = 1; k <= total_steps; ++k) {
        double t_k = static_cast<double>(k) * dt_s;
        if (t_k > duration_s || k == total_steps) {
            t_k = duration_s;
        }
        apply_edges_up_to(t_k);
        if (t_k > model.time()) {
            model.advance_to(t_k, inputs);
        }
        if (model.has_events()) {
            for (const SignalFrame& ev : model.take_events()) {
                append_frame(trace.frames, ev);
            }
        }
        if (!std::isfinite(model.current_vacuum_mbar())) {
            throw Error(ErrorKind::numerical_divergence,
                        "non-finite state at t=" + std::to_string(t_k));
        }
        const bool on_record_grid =
            options.record_every > 0 && (k % options.record_every == 0);
        if (on_record_grid || t_k == duration_s) {
            append_frame(trace.frames, model.current_frame());
        }
    }
    return trace;
}

} // namespace

Trace simulate(BehaviorModel& model, const CycleSpec& cycle, double duration_s, double dt_s,
               const SimulateOptions& options) {
    cycle.validate();
    if (duration_s < cycle.cycle_period_s) {
        throw Error(ErrorKind::invalid_parameter, "duration must cover at least one cycle");
    }
    return run_engine(model, cycle_edges(cycle, duration_s), duration_s, dt_s, options);
}

Trace simulate_replay(BehaviorModel& model, const Trace& reference, double dt_s,
                      const SimulateOptions& options) {
    if (reference.frames.size() < 2) {
        throw Error(ErrorKind::invalid_trace, "reference trace too short to replay");
    }
    const double duration = reference.frames.back().t_s;
    return run_engine(model, trace_edges(reference), duration, dt_s, options);
}

std::optional<double> evacuation_time_s(const Trace& trace) {
    const auto& fs = trace.frames;
    std::size_t edge = fs.size();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].suction && (i == 0 || !fs[i - 1].suction)) {
            edge = i;
            break;
        }
    }
    if (edge == fs.size()) {
        throw Error(ErrorKind::invalid_trace, "trace has no suction rising edge");
    }
    for (std::size_t j = edge; j < fs.size(); ++j) {
        if (fs[j].part_present_h2) {
            return fs[j].t_s - fs[edge].t_s;
        }
    }
    return std::nullopt;
}

std::optional<double> blow_off_time_s(const Trace& trace) {
    const auto& fs = trace.frames;
    std::size_t edge = fs.size();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].blow_off && (i == 0 || !fs[i - 1].blow_off)) {
            edge = i;
            break;
        }
    }
    if (edge == fs.size()) {
        return std::nullopt;
    }
    for (std::size_t j = edge; j < fs.size(); ++j) {
        if (!fs[j].part_present_h2) {
            return fs[j].t_s - fs[edge].t_s;
        }
    }
    return std::nullopt;
}

double energy_per_cycle_j(const Trace& trace, double cycle_period_s) {
    if (!(cycle_period_s > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "cycle period must be > 0");
    }
    const auto& fs = trace.frames;
    if (fs.empty()) {
        throw Error(ErrorKind::invalid_trace, "empty trace");
    }
    const double t_last = fs.back().t_s;
    const auto cycles = static_cast<int>(std::floor(t_last / cycle_period_s + 1e-9));
    if (cycles < 1) {
        throw Error(ErrorKind::invalid_trace, "trace does not cover one full cycle");
    }
    const double t_end = static_cast<double>(cycles) * cycle_period_s;
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < fs.size() && fs[i].t_s < t_end; ++i) {
        const double t0 = fs[i].t_s;
        double t1 = fs[i + 1].t_s;
        double p1 = fs[i + 1].power_w;
        if (t1 > t_end) {
            const double w = (t_end - t0) / (t1 - t0);
            p1 = fs[i].power_w + w * (p1 - fs[i].power_w);
            t1 = t_end;
        }
        integral += 0.5 * (fs[i].power_w + p1) * (t1 - t0);
    }
    return integral / cycles;
}

const char* verdict_name(CycleVerdict v) {
    switch (v) {
    case CycleVerdict::pass: return "pass";
    case CycleVerdict::timeout: return "timeout";
    case CycleVerdict::fault: return "fault";
    }
    return "unknown";
}

ControllerReport analyze_controller(const Trace& trace, const CycleSpec& cycle,
                                    const ControllerPolicy& policy) {
    cycle.validate();
    ControllerReport report;
    const auto& fs = trace.frames;
    std::size_t cursor = 0; // cycles are processed in order; scan forward only
    for (int k = 0; k < cycle.repetitions; ++k) {
        const double t_suction =
            static_cast<double>(k) * cycle.cycle_period_s + cycle.suction_on_at_s;
        const double cycle_end = static_cast<double>(k + 1) * cycle.cycle_period_s;
        if (fs.empty() || t_suction > fs.back().t_s) {
            break;
        }
        const double deadline = t_suction + policy.max_wait_for_h2_s;
        while (cursor < fs.size() && fs[cursor].t_s < t_suction) {
            ++cursor;
        }
        std::optional<double> t_h2;
        std::size_t i = cursor;
        for (; i < fs.size() && fs[i].t_s < cycle_end; ++i) {
            if (fs[i].part_present_h2) {
                t_h2 = fs[i].t_s;
                break;
            }
        }
        if (!t_h2 || *t_h2 > deadline) {
            report.per_cycle.push_back(CycleVerdict::timeout);
            if (!report.first_standstill_s) {
                report.first_standstill_s = t_suction;
            }
            continue;
        }
        const double move_end = *t_h2 + cycle.move_duration_s;
        bool fault = false;
        double fault_t = move_end;
        bool last_in_control = false;
        bool have_prev = false;
        for (std::size_t j = i; j < fs.size() && fs[j].t_s <= move_end; ++j) {
            if (have_prev && last_in_control && !fs[j].in_control_h1) {
                fault = true;
                fault_t = fs[j].t_s;
                break;
            }
            last_in_control = fs[j].in_control_h1;
            have_prev = true;
        }
        if (!fault && !last_in_control) {
            fault = true; // in-control never held through the move
        }
        if (fault) {
            report.per_cycle.push_back(CycleVerdict::fault);
            if (!report.first_fault_s) {
                report.first_fault_s = fault_t;
            }
        } else {
            report.per_cycle.push_back(CycleVerdict::pass);
        }
    }
    bool any_timeout = false;
    bool any_fault = false;
    for (CycleVerdict v : report.per_cycle) {
        any_timeout |= v == CycleVerdict::timeout;
        any_fault |= v == CycleVerdict::fault;
    }
    report.verdict = any_timeout ? CycleVerdict::timeout
                                 : (any_fault ? CycleVerdict::fault : CycleVerdict::pass);
    return report;
}

ControllerReport controller_in_loop(BehaviorModel& model, const CycleSpec& cycle,
                                    const ControllerPolicy& policy, double dt_s) {
    const double duration = cycle.cycle_period_s * cycle.repetitions;
    const Trace trace = simulate(model, cycle, duration, dt_s);
    return analyze_controller(trace, cycle, policy);
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write '" + path + "'");
    }
    out << "# twinforge-trace v1\n";
    out << "# model_id=" << trace.meta.model_id << "\n";
    out << "# dt=" << format_double(trace.meta.dt_s) << "\n";
    out << "# seed=" << trace.meta.seed << "\n";
    if (!trace.meta.unmodeled_channels.empty()) {
        out << "# unmodeled=";
        for (std::size_t i = 0; i < trace.meta.unmodeled_channels.size(); ++i) {
            out << (i ? "," : "") << trace.meta.unmodeled_channels[i];
        }
        out << "\n";
    }
    for (const auto& [name, value] : trace.meta.parameters) {
        out << "# param " << name << "=" << format_double(value) << "\n";
    }
    out << "t_s,suction,blow_off,vacuum_mbar,power_W,h1,h2\n";
    for (const SignalFrame& f : trace.frames) {
        out << format_double(f.t_s) << ',' << (f.suction ? 1 : 0) << ','
            << (f.blow_off ? 1 : 0) << ',' << format_double(f.vacuum_mbar) << ','
            << format_double(f.power_w) << ',' << (f.in_control_h1 ? 1 : 0) << ','
            << (f.part_present_h2 ? 1 : 0) << "\n";
    }
    if (!out) {
        throw Error(ErrorKind::io, "failed writing '" + path + "'");
    }
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read '" + path + "'");
    }
    Trace trace;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (line.rfind("# model_id=", 0) == 0) {
                trace.meta.model_id = line.substr(eq + 1);
            } else if (line.rfind("# dt=", 0) == 0) {
                trace.meta.dt_s = std::stod(line.substr(eq + 1));
            } else if (line.rfind("# seed=", 0) == 0) {
                trace.meta.seed = std::stoull(line.substr(eq + 1));
            } else if (line.rfind("# unmodeled=", 0) == 0) {
                std::stringstream ss(line.substr(eq + 1));
                std::string ch;
                while (std::getline(ss, ch, ',')) {
                    trace.meta.unmodeled_channels.push_back(ch);
                }
            } else if (line.rfind("# param ", 0) == 0) {
                const std::string body = line.substr(8);
                const auto peq = body.find('=');
                if (peq != std::string::npos) {
                    trace.meta.parameters[body.substr(0, peq)] =
                        std::stod(body.substr(peq + 1));
                }
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true; // column header line
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 7) {
            throw Error(ErrorKind::invalid_trace,
                        "bad CSV row in '" + path + "': " + line);
        }
        SignalFrame f;
        f.t_s = std::stod(cells[0]);
        f.suction = cells[1] == "1";
        f.blow_off = cells[2] == "1";
        f.vacuum_mbar = std::stod(cells[3]);
        f.power_w = std::stod(cells[4]);
        f.in_control_h1 = cells[5] == "1";
        f.part_present_h2 = cells[6] == "1";
        trace.frames.push_back(f);
    }
    if (trace.frames.empty()) {
        throw Error(ErrorKind::invalid_trace, "no samples in '" + path + "'");
    }
    return trace;
}

void cycle_from_json_file(const std::string& path, CycleSpec& cycle) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::io, "invalid JSON in '" + path + "': " + e.what());
    }
    cycle.suction_on_at_s = j.at("suction_on_at_s").get<double>();
    cycle.move_duration_s = j.at("move_duration_s").get<double>();
    cycle.blow_off_at_s = j.at("blow_off_at_s").get<double>();
    cycle.cycle_period_s = j.at("cycle_period_s").get<double>();
    cycle.repetitions = j.at("repetitions").get<int>();
    cycle.validate();
}

} // namespace twinforge
