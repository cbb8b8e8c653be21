#include "twinforge/emulator.hpp"

#include "twinforge/models.hpp"
#include "twinforge/optimize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace twinforge {

void FaultSchedule::validate() const {
    if (segments.empty()) {
        throw Error(ErrorKind::invalid_parameter, "fault schedule needs at least one segment");
    }
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (!(segments[i].t_start_s > segments[i - 1].t_start_s)) {
            throw Error(ErrorKind::invalid_parameter,
                        "fault schedule segments must start at increasing times");
        }
    }
    if (!(clamp_max_mm >= 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "fault clamp must be >= 0");
    }
}

double fault_at(const FaultSchedule& schedule, double t_s) {
    if (t_s < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "fault schedule time must be >= 0");
    }
    const FaultSchedule::Segment* active = &schedule.segments.front();
    for (const auto& seg : schedule.segments) {
        if (seg.t_start_s <= t_s) {
            active = &seg;
        } else {
            break;
        }
    }
    const double d = active->d0_mm + active->slope_mm_per_s * (t_s - active->t_start_s);
    return std::clamp(d, 0.0, schedule.clamp_max_mm);
}

void PlantConfig::validate() const {
    assembly.validate();
    thresholds.validate();
    if (noise_sigma_mbar < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "noise sigma must be >= 0");
    }
    if (fault) {
        fault->validate();
    }
}

namespace {

std::map<std::string, double> plant_params(const PlantConfig& plant) {
    auto params = gripper_param_map(plant.assembly, plant.thresholds);
    params = resolve_gripper_params(ModelingDepth::physical_non_spatial, std::move(params));
    for (const auto& [key, value] : plant.true_overrides) {
        auto it = params.find(key);
        if (it == params.end()) {
            throw Error(ErrorKind::invalid_parameter,
                        "plant override refers to unknown parameter '" + key + "'");
        }
        it->second = value;
    }
    return params;
}

void apply_noise(Trace& trace, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) {
        return;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (SignalFrame& f : trace.frames) {
        f.vacuum_mbar += noise(rng);
    }
}

void hide_plant_internals(Trace& trace, const PlantConfig& plant) {
    trace.meta.model_id = "plant/" + plant.instance_id;
    trace.meta.parameters.clear(); // hidden truth stays in the config
    trace.meta.seed = plant.seed;
}

} // namespace

Trace emulate(const PlantConfig& plant, const CycleSpec& cycle, double duration_s, double dt_s) {
    plant.validate();
    auto params = plant_params(plant);
    LeakSchedule schedule;
    if (plant.fault) {
        const FaultSchedule fault = *plant.fault;
        schedule = [fault](double t) { return fault_at(fault, t); };
    }
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, std::move(params),
                                    "plant/" + plant.instance_id, std::move(schedule));
    Trace trace = simulate(*model, cycle, duration_s, dt_s);
    apply_noise(trace, plant.noise_sigma_mbar, plant.seed);
    hide_plant_internals(trace, plant);
    return trace;
}

std::map<std::string, double> end_of_line_rig_params(
    const std::map<std::string, double>& generator_params, double tank_volume_m3) {
    if (!(tank_volume_m3 > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "tank volume must be > 0");
    }
    std::map<std::string, double> rig = generator_params;
    rig[keys::hose_length_mm] = 0.0;
    rig[keys::hose_inner_diameter_mm] = 0.0;
    rig[keys::cup_count] = 0.0;
    rig[keys::cup_dead_volume_cm3] = 0.0;
    rig[keys::extra_volume_m3] = tank_volume_m3;
    // thresholds far out of reach: the pump evacuates to saturation
    rig[keys::h2_mbar] = 2000.0;
    rig[keys::h1_mbar] = 2100.0;
    rig[keys::h1_hyst_mbar] = 10.0;
    rig[keys::d_leak_mm] = 0.0;
    rig[keys::q_max_scale] = 1.0;
    return rig;
}

Trace end_of_line_curve(const PlantConfig& plant, const EndOfLineOptions& options) {
    plant.validate();
    if (!(options.duration_s > 2.0 * options.dt_s)) {
        throw Error(ErrorKind::invalid_parameter, "end-of-line window too short for its dt");
    }
    auto rig = end_of_line_rig_params(plant_params(plant), options.tank_volume_m3);
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, std::move(rig),
                                    "plant/" + plant.instance_id + "/eol");
    // suction over the whole window; the release tail is one step long and
    // excluded from any fit
    CycleSpec cycle;
    cycle.suction_on_at_s = 0.0;
    cycle.move_duration_s = 0.0;
    cycle.blow_off_at_s = options.duration_s - options.dt_s;
    cycle.cycle_period_s = options.duration_s;
    cycle.repetitions = 1;
    Trace trace = simulate(*model, cycle, options.duration_s, options.dt_s);
    apply_noise(trace, plant.noise_sigma_mbar, plant.seed);
    hide_plant_internals(trace, plant);
    return trace;
}

InstanceRecord end_of_line_test(const PlantConfig& plant, const EndOfLineOptions& options) {
    const Trace measured = end_of_line_curve(plant, options);

    const double catalog_q = plant.assembly.generator.max_suction_capacity_lpm;
    const double catalog_dp = plant.assembly.generator.max_vacuum_mbar;

    // no hose, no leak: the rig follows the closed-form evacuation law, so
    // the fit can use it directly
    auto residual = [&](const std::vector<double>& x) {
        const double q_lpm = x[0];
        const double dp_max = x[1];
        const double tau =
            options.tank_volume_m3 * dp_max /
            (constants::p_atm_mbar * q_lpm * constants::lpm_to_m3s);
        double sum = 0.0;
        std::size_t count = 0;
        for (const SignalFrame& f : measured.frames) {
            if (!f.suction || f.blow_off) {
                continue;
            }
            const double model_dp = d3_vacuum_mbar(f.t_s, tau, dp_max);
            const double dev = f.vacuum_mbar - model_dp;
            sum += dev * dev;
            ++count;
        }
        return std::sqrt(sum / static_cast<double>(count));
    };

    Bounds bounds;
    bounds.box = {{0.5 * catalog_q, 1.5 * catalog_q},
                  {0.7 * catalog_dp, std::min(1.1 * catalog_dp, constants::p_atm_mbar)}};
    FitSearchOptions search;
    search.grid_points_per_dim = 11;
    search.max_evaluations = 600;
    const OptimizeResult fit = grid_then_refine(residual, bounds, search);

    InstanceRecord record;
    record.instance_id = plant.instance_id;
    record.type_id = plant.assembly.generator.type_id;
    record.parameter_overrides[keys::q_max_lpm] = fit.x[0];
    record.parameter_overrides[keys::dp_max_mbar] = fit.x[1];
    // a fit that cannot explain the curve to noise level is unusable
    record.usable = std::isfinite(fit.value) &&
                    fit.value <= 5.0 * plant.noise_sigma_mbar + 1.0;
    return record;
}

PlantConfig load_plant_config(const std::string& path) {
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
    PlantConfig plant;
    plant.instance_id = j.value("instance_id", std::string("plant"));
    plant.assembly.generator = j.at("generator").get<VacuumGenerator>();
    plant.assembly.hose.length_mm = j.at("hose").at("length_mm").get<double>();
    plant.assembly.hose.inner_diameter_mm = j.at("hose").at("inner_diameter_mm").get<double>();
    plant.assembly.cups.diameter_mm = j.at("cups").at("diameter_mm").get<double>();
    plant.assembly.cups.count = j.at("cups").at("count").get<int>();
    plant.assembly.cups.dead_volume_per_cup_cm3 =
        j.at("cups").value("dead_volume_per_cup_cm3", constants::default_cup_dead_volume_cm3);
    plant.thresholds.h2_mbar = j.at("thresholds").at("h2_mbar").get<double>();
    plant.thresholds.h1_mbar = j.at("thresholds").at("h1_mbar").get<double>();
    plant.thresholds.h1_hysteresis_mbar =
        j.at("thresholds").value("h1_hysteresis_mbar", constants::default_h1_hysteresis_mbar);
    if (j.contains("true_overrides")) {
        for (const auto& [key, value] : j.at("true_overrides").items()) {
            plant.true_overrides[key] = value.get<double>();
        }
    }
    plant.noise_sigma_mbar = j.value("noise_sigma_mbar", 1.0);
    plant.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("fault")) {
        FaultSchedule fault;
        fault.segments.clear();
        for (const auto& seg : j.at("fault").at("segments")) {
            fault.segments.push_back({seg.at("t_start_s").get<double>(),
                                      seg.at("d0_mm").get<double>(),
                                      seg.at("slope_mm_per_s").get<double>()});
        }
        fault.clamp_max_mm = j.at("fault").value("clamp_max_mm", 2.0);
        plant.fault = fault;
    }
    plant.validate();
    return plant;
}

} // namespace twinforge
