#include "twinforge/design.hpp"

#include "twinforge/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace twinforge {

KpiReport evaluate_kpis(const GrippingAssembly& assembly, const ProcessParams& process,
                        const CycleSpec& cycle, const KpiOptions& options) {
    assembly.validate();
    process.validate();
    cycle.validate();

    KpiReport report;
    report.type_id = assembly.generator.type_id;
    report.power_source = assembly.generator.power_source;
    report.acquisition_cost_eur = assembly.generator.cost_eur;
    report.placement = placement_check(assembly, process);

    const double dp_req = required_vacuum_mbar(process, assembly.cups);
    ThresholdConfig thresholds;
    try {
        thresholds = thresholds_for(
            dp_req, assembly.generator,
            threshold_policy_from_name(assembly.generator.threshold_policy));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::generator_infeasible) {
            throw;
        }
        report.feasible = false;
        report.reason = "required vacuum exceeds the generator's maximum";
        return report;
    }
    if (report.placement == Placement::infeasible) {
        report.feasible = false;
        report.reason = "generator too heavy and no remote mounting option";
        return report;
    }

    auto model = make_gripper_model(ModelingDepth::physical_non_spatial,
                                    gripper_param_map(assembly, thresholds),
                                    "gripper/d4/" + assembly.generator.type_id);
    const double duration = cycle.cycle_period_s * cycle.repetitions;
    const Trace trace = simulate(*model, cycle, duration, options.dt_s);

    report.evacuation_time_s = evacuation_time_s(trace);
    report.blow_off_time_s = blow_off_time_s(trace);
    report.energy_per_cycle_j = energy_per_cycle_j(trace, cycle.cycle_period_s);

    if (!report.evacuation_time_s) {
        report.feasible = false;
        report.reason = "part-present threshold never reached";
        return report;
    }
    const double active_time =
        *report.evacuation_time_s + report.blow_off_time_s.value_or(0.0);
    if (active_time > process.max_cycle_time_s) {
        report.feasible = false;
        report.reason = "active cycle time exceeds the budget";
        return report;
    }
    report.feasible = true;
    return report;
}

namespace {

int class_index(PowerSource source) {
    return source == PowerSource::electric ? 0 : 1;
}

} // namespace

RankedSelection select_generator(const std::vector<VacuumGenerator>& candidates,
                                 const Hose& hose, const SuctionCupSet& cups,
                                 const ProcessParams& process, const CycleSpec& cycle,
                                 const RankingSpec& ranking, const KpiOptions& options) {
    if (candidates.empty()) {
        throw Error(ErrorKind::invalid_parameter, "candidate list must not be empty");
    }
    std::vector<KpiReport> reports;
    reports.reserve(candidates.size());
    for (const VacuumGenerator& gen : candidates) {
        reports.push_back(evaluate_kpis({gen, hose, cups}, process, cycle, options));
    }

    // energy-class order: classes sorted by their best measured energy
    std::map<int, double> class_best;
    for (const KpiReport& r : reports) {
        if (!r.feasible) {
            continue;
        }
        const int cls = class_index(r.power_source);
        auto it = class_best.find(cls);
        if (it == class_best.end() || r.energy_per_cycle_j < it->second) {
            class_best[cls] = r.energy_per_cycle_j;
        }
    }
    std::map<int, int> class_rank;
    {
        std::vector<std::pair<double, int>> ordered;
        for (const auto& [cls, energy] : class_best) {
            ordered.emplace_back(energy, cls);
        }
        std::sort(ordered.begin(), ordered.end());
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            class_rank[ordered[i].second] = static_cast<int>(i);
        }
    }

    auto key_value = [&](const KpiReport& r, RankingSpec::Key key) {
        switch (key) {
        case RankingSpec::Key::energy_class:
            return static_cast<double>(class_rank.count(class_index(r.power_source))
                                           ? class_rank.at(class_index(r.power_source))
                                           : 99);
        case RankingSpec::Key::energy:
            return r.energy_per_cycle_j;
        case RankingSpec::Key::cost:
            return r.acquisition_cost_eur;
        case RankingSpec::Key::evacuation_time:
            return r.evacuation_time_s.value_or(std::numeric_limits<double>::infinity());
        }
        return 0.0;
    };

    std::sort(reports.begin(), reports.end(), [&](const KpiReport& a, const KpiReport& b) {
        if (a.feasible != b.feasible) {
            return a.feasible;
        }
        for (RankingSpec::Key key : ranking.keys) {
            const double va = key_value(a, key);
            const double vb = key_value(b, key);
            if (va != vb) {
                return va < vb;
            }
        }
        return a.type_id < b.type_id;
    });

    RankedSelection result;
    result.ranked = std::move(reports);
    if (!result.ranked.empty() && result.ranked.front().feasible) {
        result.chosen_type_id = result.ranked.front().type_id;
    }
    return result;
}

SweepResult sweep_hose_diameter(const GrippingAssembly& assembly_template,
                                const ProcessParams& process, const CycleSpec& cycle,
                                const std::vector<double>& diameters_mm,
                                const KpiOptions& options) {
    if (diameters_mm.size() < 1) {
        throw Error(ErrorKind::invalid_parameter, "sweep needs at least one diameter");
    }
    for (double d : diameters_mm) {
        if (!(d > 0.0)) {
            throw Error(ErrorKind::invalid_parameter, "hose diameters must be > 0");
        }
    }

    SweepResult result;
    double best_evac = std::numeric_limits<double>::infinity();
    double best_energy = std::numeric_limits<double>::infinity();
    for (double d : diameters_mm) {
        GrippingAssembly assembly = assembly_template;
        assembly.hose.inner_diameter_mm = d;
        const KpiReport kpi = evaluate_kpis(assembly, process, cycle, options);
        SweepRow row;
        row.diameter_mm = d;
        row.evacuation_time_s = kpi.evacuation_time_s;
        row.energy_per_cycle_j = kpi.energy_per_cycle_j;
        row.feasible = kpi.feasible;
        result.rows.push_back(row);

        if (row.evacuation_time_s && *row.evacuation_time_s < best_evac) {
            best_evac = *row.evacuation_time_s;
            result.argmin_evacuation_diameter_mm = d;
        }
        if (row.evacuation_time_s && row.energy_per_cycle_j < best_energy) {
            best_energy = row.energy_per_cycle_j;
            result.argmin_energy_diameter_mm = d;
        }
    }
    return result;
}

bool gripping_feasible(const GrippingAssembly& assembly, const ProcessParams& process_template,
                       const CycleSpec& cycle, double weight_kg, double d_leak_mm,
                       const KpiOptions& options) {
    ProcessParams process = process_template;
    process.object_mass_kg = weight_kg;

    const double dp_req = required_vacuum_mbar(process, assembly.cups);
    ThresholdConfig thresholds;
    try {
        thresholds = thresholds_for(
            dp_req, assembly.generator,
            threshold_policy_from_name(assembly.generator.threshold_policy));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::generator_infeasible) {
            return false;
        }
        throw;
    }

    auto params = gripper_param_map(assembly, thresholds);
    params[keys::d_leak_mm] = d_leak_mm;
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, std::move(params));
    const Trace trace = simulate(*model, cycle, cycle.cycle_period_s, options.dt_s);

    const auto evac = evacuation_time_s(trace);
    if (!evac) {
        return false;
    }
    const auto blow = blow_off_time_s(trace);
    if (*evac + blow.value_or(0.0) > process.max_cycle_time_s) {
        return false;
    }
    // held until release: vacuum stays at or above H2 from grip to blow-off
    const double t_h2 = cycle.suction_on_at_s + *evac;
    for (const SignalFrame& f : trace.frames) {
        if (f.t_s > t_h2 && f.t_s < cycle.blow_off_at_s && f.vacuum_mbar < thresholds.h2_mbar) {
            return false;
        }
    }
    return true;
}

namespace {

double cell_energy(const GrippingAssembly& assembly, const ProcessParams& process_template,
                   const CycleSpec& cycle, double weight_kg, double d_leak_mm,
                   const KpiOptions& options) {
    ProcessParams process = process_template;
    process.object_mass_kg = weight_kg;
    const double dp_req = required_vacuum_mbar(process, assembly.cups);
    ThresholdConfig thresholds;
    try {
        thresholds = thresholds_for(
            dp_req, assembly.generator,
            threshold_policy_from_name(assembly.generator.threshold_policy));
    } catch (const Error&) {
        return 0.0;
    }
    auto params = gripper_param_map(assembly, thresholds);
    params[keys::d_leak_mm] = d_leak_mm;
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, std::move(params));
    const Trace trace = simulate(*model, cycle, cycle.cycle_period_s, options.dt_s);
    return energy_per_cycle_j(trace, cycle.cycle_period_s);
}

void check_sorted(const std::vector<double>& grid, const char* what) {
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
        throw Error(ErrorKind::invalid_parameter,
                    std::string(what) + " grid must be non-empty and ascending");
    }
}

} // namespace

FeasibilityGrid feasibility_grid(const GrippingAssembly& assembly,
                                 const ProcessParams& process_template, const CycleSpec& cycle,
                                 const std::vector<double>& weights_kg,
                                 const std::vector<double>& leaks_mm,
                                 const KpiOptions& options) {
    check_sorted(weights_kg, "weight");
    check_sorted(leaks_mm, "leak");
    FeasibilityGrid grid;
    grid.weights_kg = weights_kg;
    grid.leaks_mm = leaks_mm;
    for (double w : weights_kg) {
        std::vector<char> row;
        std::vector<double> energies;
        for (double d : leaks_mm) {
            row.push_back(gripping_feasible(assembly, process_template, cycle, w, d, options)
                              ? 1
                              : 0);
            energies.push_back(row.back()
                                   ? cell_energy(assembly, process_template, cycle, w, d, options)
                                   : 0.0);
        }
        grid.feasible.push_back(std::move(row));
        grid.energy_j.push_back(std::move(energies));
    }
    return grid;
}

std::vector<BoundaryEntry> boundary_from_grid(const FeasibilityGrid& grid) {
    std::vector<BoundaryEntry> boundary;
    for (std::size_t i = 0; i < grid.weights_kg.size(); ++i) {
        BoundaryEntry entry;
        entry.weight_kg = grid.weights_kg[i];
        for (std::size_t j = 0; j < grid.leaks_mm.size(); ++j) {
            if (grid.feasible[i][j]) {
                entry.any_feasible = true;
                entry.max_leak_mm = grid.leaks_mm[j];
            }
        }
        boundary.push_back(entry);
    }
    return boundary;
}

std::vector<BoundaryEntry> leakage_weight_boundary(const GrippingAssembly& assembly,
                                                   const ProcessParams& process_template,
                                                   const CycleSpec& cycle,
                                                   const std::vector<double>& weights_kg,
                                                   const std::vector<double>& leaks_mm,
                                                   const KpiOptions& options) {
    check_sorted(weights_kg, "weight");
    check_sorted(leaks_mm, "leak");
    std::vector<BoundaryEntry> boundary;
    for (double w : weights_kg) {
        BoundaryEntry entry;
        entry.weight_kg = w;
        auto feasible_at = [&](std::size_t j) {
            return gripping_feasible(assembly, process_template, cycle, w, leaks_mm[j], options);
        };
        // monotone in the leak diameter: find the last feasible grid point
        if (feasible_at(0)) {
            std::size_t lo = 0;                  // known feasible
            std::size_t hi = leaks_mm.size() - 1; // unknown
            if (feasible_at(hi)) {
                lo = hi;
            } else {
                while (hi - lo > 1) {
                    const std::size_t mid = (lo + hi) / 2;
                    if (feasible_at(mid)) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
            }
            entry.any_feasible = true;
            entry.max_leak_mm = leaks_mm[lo];
        }
        boundary.push_back(entry);
    }
    return boundary;
}

} // namespace twinforge
