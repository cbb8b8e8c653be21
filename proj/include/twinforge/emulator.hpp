#pragma once

#include "twinforge/components.hpp"
#include "twinforge/sim.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

/// Piecewise-linear leak evolution: d_leak(t) = d0 + k * (t - t_start) on the
/// active segment, clamped to be non-negative. Step faults are segments with
/// zero slope.
struct FaultSchedule {
    struct Segment {
        double t_start_s = 0.0;
        double d0_mm = 0.0;
        double slope_mm_per_s = 0.0;
    };
    std::vector<Segment> segments{{0.0, 0.0, 0.0}};
    double clamp_max_mm = 2.0;

    void validate() const;
};

/// Leak diameter at time t under the schedule.
double fault_at(const FaultSchedule& schedule, double t_s);

/// The stand-in for the real asset: a depth-4 plant with hidden
/// instance-specific parameters, measurement noise and fault injection.
struct PlantConfig {
    std::string instance_id = "plant";
    GrippingAssembly assembly;
    ThresholdConfig thresholds;
    /// Hidden truth: overrides applied to the derived parameter map
    /// (e.g. a worn pump's q_max_lpm). Never exposed in emitted traces.
    std::map<std::string, double> true_overrides;
    double noise_sigma_mbar = 1.0;
    std::uint64_t seed = 0;
    std::optional<FaultSchedule> fault;

    void validate() const;
};

/// Runs the plant over the cycle pattern and emits the "measured" trace:
/// seeded Gaussian noise on the vacuum channel, boolean channels noise-free,
/// hidden parameters stripped from the metadata.
Trace emulate(const PlantConfig& plant, const CycleSpec& cycle, double duration_s, double dt_s);

struct EndOfLineOptions {
    double tank_volume_m3 = 1e-4; // rigid test volume replacing the gripper
    double duration_s = 12.0;
    double dt_s = 1e-3;
};

/// Standardized solid-volume evacuation: records the plant curve on the test
/// tank and fits Q_max and dp_max from it. The fitted values become the
/// instance overrides of UC3.
InstanceRecord end_of_line_test(const PlantConfig& plant, const EndOfLineOptions& options = {});

/// The measured end-of-line curve itself (same rig as end_of_line_test);
/// used to validate instance-specific against type-specific twins.
Trace end_of_line_curve(const PlantConfig& plant, const EndOfLineOptions& options = {});

/// Parameter map of the end-of-line rig for a given generator parameter set:
/// generator on the rigid tank, no hose, no cups, thresholds out of reach.
std::map<std::string, double> end_of_line_rig_params(
    const std::map<std::string, double>& generator_params, double tank_volume_m3);

PlantConfig load_plant_config(const std::string& path);

} // namespace twinforge
