// Acceptance suite: one check per release criterion, one PASS/FAIL line each.
// Exits non-zero if any criterion fails.

#include "twinforge/adapt.hpp"
#include "twinforge/components.hpp"
#include "twinforge/design.hpp"
#include "twinforge/emulator.hpp"
#include "twinforge/models.hpp"
#include "twinforge/registry.hpp"
#include "twinforge/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

using namespace twinforge;

namespace {

const std::string kData = TWINFORGE_DATA_DIR;

int failures = 0;

void report(int criterion, const std::string& label, bool ok, const std::string& detail) {
    std::printf("%s criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) {
        ++failures;
    }
}

void run(int criterion, const std::string& label,
         const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(criterion, label, ok, detail);
    } catch (const std::exception& e) {
        report(criterion, label, false, std::string("exception: ") + e.what());
    }
}

ProcessParams reference_process() {
    return load_process_params(kData + "/process_reference.json");
}

ComponentCatalog catalog() { return load_catalog(kData + "/catalog.json"); }

CycleSpec reference_cycle(int repetitions) {
    CycleSpec cycle;
    cycle.suction_on_at_s = 0.0;
    cycle.move_duration_s = 0.3;
    cycle.blow_off_at_s = 0.6;
    cycle.cycle_period_s = 0.8;
    cycle.repetitions = repetitions;
    return cycle;
}

CycleSpec diagnostic_cycle(int repetitions) {
    CycleSpec cycle;
    cycle.suction_on_at_s = 0.1;
    cycle.move_duration_s = 1.0;
    cycle.blow_off_at_s = 2.6;
    cycle.cycle_period_s = 3.0;
    cycle.repetitions = repetitions;
    return cycle;
}

GrippingAssembly reference_assembly(const ComponentCatalog& cat, const std::string& id) {
    return {cat.find(id), cat.default_hose, cat.default_cups};
}

std::map<std::string, double> reference_params(const ComponentCatalog& cat) {
    return gripper_param_map(reference_assembly(cat, "ECBPMi"), {414.0, 434.0, 10.0});
}

PlantConfig base_plant(const ComponentCatalog& cat) {
    PlantConfig plant;
    plant.instance_id = "acceptance-plant";
    plant.assembly = reference_assembly(cat, "ECBPMi");
    plant.thresholds = {414.0, 434.0, 10.0};
    plant.noise_sigma_mbar = 0.0;
    plant.seed = 1;
    return plant;
}

bool traces_identical(const Trace& a, const Trace& b) {
    if (a.frames.size() != b.frames.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        const auto& x = a.frames[i];
        const auto& y = b.frames[i];
        if (x.t_s != y.t_s || x.vacuum_mbar != y.vacuum_mbar || x.power_w != y.power_w ||
            x.part_present_h2 != y.part_present_h2 || x.in_control_h1 != y.in_control_h1 ||
            x.suction != y.suction || x.blow_off != y.blow_off) {
            return false;
        }
    }
    return true;
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// criterion 1 -----------------------------------------------------------------

std::pair<bool, std::string> sizing_math() {
    const ComponentCatalog cat = catalog();
    const double dp_req = required_vacuum_mbar(reference_process(), cat.default_cups);
    const ThresholdConfig th =
        thresholds_for(dp_req, cat.find("ECBPMi"), ThresholdPolicy::plus20);
    const bool ok = std::abs(dp_req - 413.25) <= 0.01 && th.h2_mbar == 414.0 &&
                    th.h1_mbar == 434.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "required vacuum %.4f mbar, H2=%g, H1=%g", dp_req,
                  th.h2_mbar, th.h1_mbar);
    return {ok, buf};
}

// criterion 2 -----------------------------------------------------------------

std::pair<bool, std::string> generator_selection() {
    const ComponentCatalog cat = catalog();
    const RankedSelection sel = select_generator(cat.generators, cat.default_hose,
                                                 cat.default_cups, reference_process(),
                                                 reference_cycle(2));
    bool ok = sel.chosen_type_id && *sel.chosen_type_id == "ECBPMi";
    const KpiReport* ecbpmi = nullptr;
    const KpiReport* ecbpi = nullptr;
    for (const KpiReport& r : sel.ranked) {
        if (r.type_id == "ECBPMi") ecbpmi = &r;
        if (r.type_id == "ECBPI") ecbpi = &r;
    }
    ok = ok && ecbpmi != nullptr && ecbpi != nullptr && ecbpi->feasible &&
         ecbpi->acquisition_cost_eur > ecbpmi->acquisition_cost_eur &&
         ecbpi->placement == Placement::beside_robot;
    return {ok, "chosen " + (sel.chosen_type_id ? *sel.chosen_type_id : std::string("none")) +
                    ", ECBPI " + (ecbpi && ecbpi->feasible ? "feasible" : "infeasible") +
                    " beside-robot"};
}

// criterion 3 -----------------------------------------------------------------

std::pair<bool, std::string> energy_direction() {
    const ComponentCatalog cat = catalog();
    double electric_max = 0.0;
    double pneumatic_min = 1e300;
    for (const VacuumGenerator& gen : cat.generators) {
        const KpiReport kpi = evaluate_kpis(reference_assembly(cat, gen.type_id), reference_process(),
                                            reference_cycle(2));
        if (gen.power_source == PowerSource::electric) {
            electric_max = std::max(electric_max, kpi.energy_per_cycle_j);
        } else {
            pneumatic_min = std::min(pneumatic_min, kpi.energy_per_cycle_j);
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "max electric %.3f J < min pneumatic %.3f J", electric_max,
                  pneumatic_min);
    return {electric_max < pneumatic_min, buf};
}

// criterion 4 -----------------------------------------------------------------

std::pair<bool, std::string> depth_accuracy_ordering() {
    const ComponentCatalog cat = catalog();
    const Trace measured = emulate(base_plant(cat), reference_cycle(2), 1.6, 1e-4);
    double rmse[5] = {0, 0, 0, 0, 0};
    for (int level = 2; level <= 4; ++level) {
        auto model = make_gripper_model(depth_from_level(level), reference_params(cat));
        const Trace virtual_trace = simulate_replay(*model, measured, 1e-4);
        rmse[level] = compare_traces(measured, virtual_trace, {true, false}).rmse_mbar;
    }
    const bool ok = rmse[4] <= rmse[3] && rmse[3] <= rmse[2] && rmse[4] < 1.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "RMSE d4=%.3g <= d3=%.3g <= d2=%.3g mbar", rmse[4], rmse[3],
                  rmse[2]);
    return {ok, buf};
}

// criterion 5 -----------------------------------------------------------------

std::pair<bool, std::string> runtime_ordering() {
    const ComponentCatalog cat = catalog();
    const auto params = reference_params(cat);
    const CycleSpec cycle = reference_cycle(12); // covers the 9 s horizon
    SimulateOptions options;
    options.record_every = 0;

    double median[5] = {0, 0, 0, 0, 0};
    for (int level = 1; level <= 4; ++level) {
        auto model = make_gripper_model(depth_from_level(level), params);
        simulate(*model, cycle, 9.0, 1e-4, options); // warm-up
        std::vector<double> times;
        for (int run = 0; run < 10; ++run) {
            const auto t0 = std::chrono::steady_clock::now();
            simulate(*model, cycle, 9.0, 1e-4, options);
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        median[level] = times[times.size() / 2];
    }
    const bool ok = median[1] <= median[2] && median[2] <= median[3] && median[3] < median[4] &&
                    median[4] >= 2.0 * median[3];
    char buf[200];
    std::snprintf(buf, sizeof(buf), "medians d1=%.1f d2=%.1f d3=%.1f d4=%.1f ms", 1e3 * median[1],
                  1e3 * median[2], 1e3 * median[3], 1e3 * median[4]);
    return {ok, buf};
}

// criterion 6 -----------------------------------------------------------------

std::pair<bool, std::string> leakage_adaptation() {
    const ComponentCatalog cat = catalog();
    PlantConfig plant = base_plant(cat);
    plant.noise_sigma_mbar = 1.0;
    plant.seed = 42;
    FaultSchedule fault;
    fault.segments = {{0.0, 0.8, 0.0}};
    plant.fault = fault;
    const Trace measured = emulate(plant, diagnostic_cycle(2), 6.0, 1e-4);

    ModelPool pool;
    for (int level = 1; level <= 4; ++level) {
        auto probe = make_gripper_model(depth_from_level(level), reference_params(cat));
        PoolEntry entry;
        entry.metadata = probe->metadata();
        entry.factory = [level, &cat] {
            return make_gripper_model(depth_from_level(level), reference_params(cat));
        };
        pool.add(std::move(entry));
    }
    ActiveConfigurationStore store;
    ActiveModelConfiguration active;
    active.config.model_id = "gripper/d2";
    active.config.depth = 2;
    active.requirements = Requirements{};
    store.seed(active);

    RunLimits limits;
    limits.dt_s = 1e-4;
    const AdaptationResult result = run_pdca(pool, measured, Requirements{}, limits, store);

    bool ok = result.active && result.active->config.depth == 4 && result.goal_met;
    double fitted = 0.0;
    if (ok) {
        fitted = result.active->config.fitted_parameters.at(keys::d_leak_mm);
        ok = std::abs(fitted - 0.8) <= 0.08;
    }
    for (const ModelConfiguration& c : result.candidates) {
        if (c.depth < 4) {
            ok = ok && c.residual.rmse_mbar > 20.0;
        }
    }
    ok = ok && result.diagnosis.fault_isolated &&
         result.diagnosis.summary.find("leakage") != std::string::npos;

    // exhaustive fine-grid oracle over the leak diameter, pump scale profiled
    double oracle_best_d = -1.0;
    double oracle_best = 1e300;
    for (double d = 0.0; d <= 1.2 + 1e-9; d += 0.005) {
        for (double q : {0.9, 0.95, 1.0, 1.05, 1.1}) {
            auto model = make_gripper_model(ModelingDepth::physical_non_spatial,
                                            reference_params(cat));
            model->set_parameter(keys::d_leak_mm, d);
            model->set_parameter(keys::q_max_scale, q);
            const Trace virtual_trace = simulate_replay(*model, measured, 1e-4);
            const double r = compare_traces(measured, virtual_trace, {true, false}).rmse_mbar;
            if (r < oracle_best) {
                oracle_best = r;
                oracle_best_d = d;
            }
        }
    }
    ok = ok && std::abs(oracle_best_d - 0.8) <= 0.08 && std::abs(fitted - oracle_best_d) <= 0.02;

    char buf[200];
    std::snprintf(buf, sizeof(buf), "fitted d_leak %.4f mm, oracle argmin %.3f mm", fitted,
                  oracle_best_d);
    return {ok, buf};
}

// criterion 7 -----------------------------------------------------------------

std::pair<bool, std::string> fault_ordering() {
    PlantConfig plant = load_plant_config(kData + "/plant_ramp.json");
    const CycleSpec cycle = reference_cycle(1250); // 1000 s horizon
    const Trace trace = emulate(plant, cycle, 1000.0, 1e-3);

    double last_h1 = -1.0;
    double last_h2 = -1.0;
    for (const SignalFrame& f : trace.frames) {
        if (f.in_control_h1) {
            last_h1 = f.t_s;
        }
        if (f.part_present_h2) {
            last_h2 = f.t_s;
        }
    }
    const ControllerReport controller = analyze_controller(trace, cycle, {0.8});

    bool ok = last_h1 > 0.0 && last_h2 > 0.0 && last_h1 < last_h2;
    ok = ok && controller.first_standstill_s.has_value();
    // standstill must start no earlier than the cycle in which H2 was lost
    ok = ok && *controller.first_standstill_s > last_h2 - cycle.cycle_period_s;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "H1 lost %.1f s < H2 lost %.1f s, standstill %.1f s",
                  last_h1, last_h2,
                  controller.first_standstill_s ? *controller.first_standstill_s : -1.0);
    return {ok, buf};
}

// criterion 8 -----------------------------------------------------------------

std::pair<bool, std::string> instance_specific_gain() {
    const ComponentCatalog cat = catalog();
    PlantConfig plant = base_plant(cat);
    plant.noise_sigma_mbar = 1.0;
    plant.seed = 11;
    plant.true_overrides[keys::q_max_lpm] = 1.6 * 0.9;

    const Trace measured = end_of_line_curve(plant);
    const InstanceRecord record = end_of_line_test(plant);
    if (!record.usable) {
        return {false, "end-of-line fit flagged unusable"};
    }

    auto rig_twin = [&](double q_lpm, double dp_max) {
        auto rig = end_of_line_rig_params(reference_params(cat), EndOfLineOptions{}.tank_volume_m3);
        rig[keys::q_max_lpm] = q_lpm;
        rig[keys::dp_max_mbar] = dp_max;
        auto model = make_gripper_model(ModelingDepth::physical_non_spatial, rig);
        return simulate_replay(*model, measured, 1e-3);
    };
    const Trace type_twin = rig_twin(1.6, 600.0);
    const Trace instance_twin = rig_twin(record.parameter_overrides.at(keys::q_max_lpm),
                                         record.parameter_overrides.at(keys::dp_max_mbar));
    const double type_dev = compare_traces(measured, type_twin, {true, false}).max_abs_mbar;
    const double instance_dev =
        compare_traces(measured, instance_twin, {true, false}).max_abs_mbar;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "max deviation: instance %.2f mbar < type %.2f mbar",
                  instance_dev, type_dev);
    return {instance_dev < type_dev, buf};
}

// criterion 9 -----------------------------------------------------------------

std::pair<bool, std::string> boundary_monotonicity() {
    const ComponentCatalog cat = catalog();
    std::vector<double> weights;
    for (int i = 0; i < 10; ++i) {
        weights.push_back(0.03 + 0.022 * i); // 0.03 .. 0.228 kg
    }
    std::vector<double> leaks;
    for (int i = 0; i < 10; ++i) {
        leaks.push_back(0.05 * i); // 0 .. 0.45 mm
    }
    const GrippingAssembly assembly = reference_assembly(cat, "ECBPMi");
    const FeasibilityGrid grid = feasibility_grid(assembly, reference_process(), reference_cycle(1),
                                                  weights, leaks, {1e-4});
    const auto brute = boundary_from_grid(grid);
    const auto fast = leakage_weight_boundary(assembly, reference_process(), reference_cycle(1),
                                              weights, leaks, {1e-4});

    bool ok = brute.size() == fast.size();
    for (std::size_t i = 0; ok && i < brute.size(); ++i) {
        ok = brute[i].any_feasible == fast[i].any_feasible &&
             brute[i].max_leak_mm == fast[i].max_leak_mm;
    }
    bool monotone = true;
    for (std::size_t i = 1; i < fast.size(); ++i) {
        if (fast[i].any_feasible && fast[i - 1].any_feasible &&
            fast[i].max_leak_mm > fast[i - 1].max_leak_mm) {
            monotone = false;
        }
        if (!fast[i - 1].any_feasible && fast[i].any_feasible) {
            monotone = false;
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "%zux%zu grid, boundary %s brute force, %s", weights.size(),
                  leaks.size(), ok ? "matches" : "differs from",
                  monotone ? "non-increasing" : "NOT monotone");
    return {ok && monotone, buf};
}

// criterion 10 ----------------------------------------------------------------

std::pair<bool, std::string> composition_fidelity() {
    const SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    const DataBasis data = load_data_basis(kData + "/data_basis.json");

    ComposedModel composed = parameterize(
        compose(semantify(graph, table), library, ModelingDepth::physical_non_spatial), data,
        "vac.generator.ecbpmi");
    auto from_graph = instantiate(composed, "twin/d4");
    auto hand_built =
        make_gripper_model(ModelingDepth::physical_non_spatial, reference_params(catalog()));

    const CycleSpec cycle = reference_cycle(2);
    const Trace composed_trace = simulate(*from_graph, cycle, 1.6, 1e-4);
    const Trace reference = simulate(*hand_built, cycle, 1.6, 1e-4);
    bool ok = traces_identical(composed_trace, reference);

    const TwinPackage package =
        build_twin_package(composed, {1, 2, 3, 4}, "acceptance-twin", library, data);
    const std::string path = temp_file("twinforge_acceptance_package.json");
    export_package(package, path);
    ModelPool pool;
    const TwinPackage imported = import_package(path, pool);
    std::remove(path.c_str());
    auto restored = instantiate_package_depth(imported, 4);
    const Trace restored_trace = simulate(*restored, cycle, 1.6, 1e-4);
    ok = ok && traces_identical(restored_trace, reference);
    return {ok, ok ? "composed and round-tripped traces bit-identical"
                   : "trace mismatch detected"};
}

// criterion 11 ----------------------------------------------------------------

std::pair<bool, std::string> determinism_under_parallelism() {
    const ComponentCatalog cat = catalog();
    PlantConfig plant = base_plant(cat);
    plant.noise_sigma_mbar = 1.0;
    plant.seed = 42;
    FaultSchedule fault;
    fault.segments = {{0.0, 0.8, 0.0}};
    plant.fault = fault;
    const Trace measured = emulate(plant, diagnostic_cycle(2), 6.0, 1e-4);

    auto run_with = [&](int threads) {
        ModelPool pool;
        for (int level = 1; level <= 4; ++level) {
            auto probe = make_gripper_model(depth_from_level(level), reference_params(cat));
            PoolEntry entry;
            entry.metadata = probe->metadata();
            entry.factory = [level, &cat] {
                return make_gripper_model(depth_from_level(level), reference_params(cat));
            };
            pool.add(std::move(entry));
        }
        ActiveConfigurationStore store;
        ActiveModelConfiguration active;
        active.config.model_id = "gripper/d2";
        active.config.depth = 2;
        active.requirements = Requirements{};
        store.seed(active);
        RunLimits limits;
        limits.dt_s = 1e-4;
        limits.threads = threads;
        return canonical_result_json(run_pdca(pool, measured, Requirements{}, limits, store));
    };
    const std::string one = run_with(1);
    const std::string eight = run_with(8);
    const bool ok = one == eight;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "canonical JSON %s (%zu bytes)",
                  ok ? "byte-equal" : "differs", one.size());
    return {ok, buf};
}

// criterion 12 ----------------------------------------------------------------

std::pair<bool, std::string> numerical_convergence() {
    const ComponentCatalog cat = catalog();
    const auto params = reference_params(cat);
    const GripperCore core = derive_gripper_core(params);
    const double closed_form = core.tau_s * std::log(core.dp_max_mbar /
                                                     (core.dp_max_mbar - core.thresholds.h2_mbar));
    bool ok = true;
    double previous = 1e300;
    std::string detail;
    for (const double dt : {1e-3, 1e-4, 1e-5}) {
        auto model = make_gripper_model(ModelingDepth::physical_non_spatial, params);
        const Trace trace = simulate(*model, reference_cycle(1), 0.8, dt);
        const auto evac = evacuation_time_s(trace);
        if (!evac) {
            return {false, "H2 never reached"};
        }
        const double error = std::abs(*evac - closed_form);
        ok = ok && error < dt && error <= previous;
        previous = error;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "dt=%.0e err=%.2e ", dt, error);
        detail += buf;
    }
    return {ok, detail};
}

} // namespace

int main() {
    std::printf("twinforge acceptance suite\n");
    run(1, "sizing math", sizing_math);
    run(2, "generator selection", generator_selection);
    run(3, "energy direction electric vs pneumatic", energy_direction);
    run(4, "depth-accuracy ordering", depth_accuracy_ordering);
    run(5, "runtime ordering across depths", runtime_ordering);
    run(6, "leakage adaptation end to end", leakage_adaptation);
    run(7, "fault ordering under the leak ramp", fault_ordering);
    run(8, "instance-specific accuracy gain", instance_specific_gain);
    run(9, "leakage-weight boundary vs brute force", boundary_monotonicity);
    run(10, "composition and package fidelity", composition_fidelity);
    run(11, "determinism under parallelism", determinism_under_parallelism);
    run(12, "numerical convergence of the H2 crossing", numerical_convergence);

    if (failures > 0) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
