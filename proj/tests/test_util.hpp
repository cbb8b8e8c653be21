#pragma once

// Shared fixtures for the test suites: the reference handling task and
// generator catalog rows used throughout, plus small trace helpers.

#include "twinforge/components.hpp"
#include "twinforge/models.hpp"
#include "twinforge/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace tftest {

inline twinforge::ProcessParams reference_process() {
    twinforge::ProcessParams p;
    p.object_mass_kg = 0.15;
    p.acceleration_m_s2 = 5.0;
    p.safety_factor = 3.0;
    p.friction_coeff = 0.5;
    p.gravity_m_s2 = 9.81;
    p.max_cycle_time_s = 0.8;
    p.robot_payload_kg = 0.5;
    return p;
}

inline twinforge::VacuumGenerator ecbpmi() {
    twinforge::VacuumGenerator g;
    g.type_id = "ECBPMi";
    g.max_suction_capacity_lpm = 1.6;
    g.max_vacuum_mbar = 600.0;
    g.power_source = twinforge::PowerSource::electric;
    g.rated_power_w = 3.0;
    g.drop_off = twinforge::DropOffPrinciple::valve;
    g.cost_eur = 995.0;
    g.weight_g = 240.0;
    g.positioning = twinforge::Positioning::on_gripper;
    g.threshold_policy = "plus20";
    return g;
}

inline twinforge::VacuumGenerator ecbpi() {
    twinforge::VacuumGenerator g;
    g.type_id = "ECBPI";
    g.max_suction_capacity_lpm = 12.0;
    g.max_vacuum_mbar = 750.0;
    g.power_source = twinforge::PowerSource::electric;
    g.rated_power_w = 13.0;
    g.drop_off = twinforge::DropOffPrinciple::valve;
    g.cost_eur = 2260.0;
    g.weight_g = 775.0;
    g.positioning = twinforge::Positioning::beside_robot;
    g.threshold_policy = "plus100";
    return g;
}

inline twinforge::VacuumGenerator scpmc03() {
    twinforge::VacuumGenerator g;
    g.type_id = "SCPMc 03";
    g.max_suction_capacity_lpm = 2.2;
    g.max_vacuum_mbar = 870.0;
    g.power_source = twinforge::PowerSource::pneumatic;
    g.air_consumption_lpm = 3.5;
    g.drop_off = twinforge::DropOffPrinciple::blow_off;
    g.cost_eur = 290.0;
    g.weight_g = 65.0;
    g.positioning = twinforge::Positioning::on_gripper;
    g.threshold_policy = "plus100";
    return g;
}

inline twinforge::VacuumGenerator scpmc05() {
    twinforge::VacuumGenerator g;
    g.type_id = "SCPMc 05";
    g.max_suction_capacity_lpm = 7.5;
    g.max_vacuum_mbar = 870.0;
    g.power_source = twinforge::PowerSource::pneumatic;
    g.air_consumption_lpm = 9.0;
    g.drop_off = twinforge::DropOffPrinciple::blow_off;
    g.cost_eur = 295.0;
    g.weight_g = 70.0;
    g.positioning = twinforge::Positioning::on_gripper;
    g.threshold_policy = "plus100";
    return g;
}

inline twinforge::GrippingAssembly reference_assembly() {
    return {ecbpmi(), {750.0, 3.0}, {11.7, 3, 1.0}};
}

inline twinforge::ThresholdConfig reference_thresholds() { return {414.0, 434.0, 10.0}; }

/// One pick-move-release cycle within the 800 ms budget.
inline twinforge::CycleSpec reference_cycle(int repetitions = 1) {
    twinforge::CycleSpec c;
    c.suction_on_at_s = 0.0;
    c.move_duration_s = 0.3;
    c.blow_off_at_s = 0.6;
    c.cycle_period_s = 0.8;
    c.repetitions = repetitions;
    return c;
}

inline std::map<std::string, double> reference_params() {
    return twinforge::gripper_param_map(reference_assembly(), reference_thresholds());
}

/// Linear interpolation of the vacuum channel at time t.
inline double vacuum_at(const twinforge::Trace& trace, double t) {
    const auto& fs = trace.frames;
    auto it = std::lower_bound(fs.begin(), fs.end(), t,
                               [](const twinforge::SignalFrame& f, double v) { return f.t_s < v; });
    if (it == fs.begin()) {
        return it->vacuum_mbar;
    }
    if (it == fs.end()) {
        return fs.back().vacuum_mbar;
    }
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.t_s == lo.t_s) {
        return hi.vacuum_mbar;
    }
    const double w = (t - lo.t_s) / (hi.t_s - lo.t_s);
    return lo.vacuum_mbar + w * (hi.vacuum_mbar - lo.vacuum_mbar);
}

/// Independent reference value: hose-attenuated effective pump capacity.
inline double oracle_q_eff_m3s(double q_max_lpm, double dp_max_mbar, double hose_len_mm,
                               double hose_dia_mm) {
    const double q_max = q_max_lpm / 60000.0;
    const double d = hose_dia_mm * 1e-3;
    const double conductance_per_pa =
        3.14159265358979323846 * d * d * d * d / (128.0 * 1.8e-5 * (hose_len_mm * 1e-3));
    const double conductance_per_mbar = conductance_per_pa * 100.0;
    return q_max / (1.0 + q_max / (conductance_per_mbar * dp_max_mbar));
}

/// Independent reference value: evacuation time constant of the lumped system.
inline double oracle_tau_s(double volume_m3, double dp_max_mbar, double q_eff_m3s) {
    return volume_m3 * dp_max_mbar / (1013.0 * q_eff_m3s);
}

} // namespace tftest
