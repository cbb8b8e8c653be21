#pragma once

#include "twinforge/models.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

/// One handling cycle: idle, suction (grip + move), blow-off (release).
struct CycleSpec {
    double suction_on_at_s = 0.0;
    double move_duration_s = 0.3;
    double blow_off_at_s = 0.6;
    double cycle_period_s = 0.8;
    int repetitions = 1;

    void validate() const;
};

struct TraceMeta {
    std::string model_id;
    std::map<std::string, double> parameters;
    double dt_s = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> unmodeled_channels;
};

/// Time series of all signals; grid samples plus exact event timestamps,
/// strictly increasing in time.
struct Trace {
    TraceMeta meta;
    std::vector<SignalFrame> frames;
};

/// Inputs the cycle applies at time t.
SignalInputs cycle_inputs_at(const CycleSpec& cycle, double t_s);

struct SimulateOptions {
    /// Record every n-th grid step; <= 0 keeps only events and endpoints.
    int record_every = 1;
};

/// Deterministic fixed-step execution of a model over repeated cycles.
/// Steps are split exactly at input edges; output transitions are recorded
/// at event-localized timestamps.
Trace simulate(BehaviorModel& model, const CycleSpec& cycle, double duration_s, double dt_s,
               const SimulateOptions& options = {});

/// Replays the input signals of a recorded trace against a model — the
/// comparison path of the adaptation loop.
Trace simulate_replay(BehaviorModel& model, const Trace& reference, double dt_s,
                      const SimulateOptions& options = {});

/// Time from the first suction rising edge to the first part-present sample;
/// nullopt when H2 is never reached.
std::optional<double> evacuation_time_s(const Trace& trace);

/// Time from the first blow-off edge until the part releases (H2 falls).
std::optional<double> blow_off_time_s(const Trace& trace);

/// Trapezoidal integral of power over complete cycles, averaged per cycle.
double energy_per_cycle_j(const Trace& trace, double cycle_period_s);

enum class CycleVerdict { pass, timeout, fault };
const char* verdict_name(CycleVerdict v);

struct ControllerPolicy {
    double max_wait_for_h2_s = 0.8;
};

struct ControllerReport {
    CycleVerdict verdict = CycleVerdict::pass;
    std::vector<CycleVerdict> per_cycle;
    std::optional<double> first_standstill_s; // suction edge of first timed-out cycle
    std::optional<double> first_fault_s;
};

/// Signal-level controller-in-the-loop check on an existing trace.
ControllerReport analyze_controller(const Trace& trace, const CycleSpec& cycle,
                                    const ControllerPolicy& policy);

/// Simulates the model over the full cycle pattern and applies the check.
ControllerReport controller_in_loop(BehaviorModel& model, const CycleSpec& cycle,
                                    const ControllerPolicy& policy, double dt_s);

/// CSV columns: t_s, suction, blow_off, vacuum_mbar, power_W, h1, h2.
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path);

void cycle_from_json_file(const std::string& path, CycleSpec& cycle);

} // namespace twinforge
