#pragma once

#include "twinforge/components.hpp"
#include "twinforge/sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace twinforge {

struct KpiOptions {
    double dt_s = 1e-4;
};

/// Per-candidate performance figures of a designed gripping system.
struct KpiReport {
    std::string type_id;
    PowerSource power_source = PowerSource::electric;
    std::optional<double> evacuation_time_s;
    std::optional<double> blow_off_time_s;
    double energy_per_cycle_j = 0.0;
    double acquisition_cost_eur = 0.0;
    Placement placement = Placement::infeasible;
    bool feasible = false;
    std::string reason; // set when infeasible
};

/// Runs the depth-4 model over the cycle and extracts the KPI set.
KpiReport evaluate_kpis(const GrippingAssembly& assembly, const ProcessParams& process,
                        const CycleSpec& cycle, const KpiOptions& options = {});

struct RankingSpec {
    enum class Key { energy_class, energy, cost, evacuation_time };
    std::vector<Key> keys{Key::energy_class, Key::cost};
};

struct RankedSelection {
    std::vector<KpiReport> ranked; // feasible candidates first, in rank order
    std::optional<std::string> chosen_type_id;
};

/// Evaluates all candidates on the same hose/cup template and ranks them:
/// infeasible last, then by the ranking keys; ties break on type_id so the
/// ordering is total and permutation-independent.
RankedSelection select_generator(const std::vector<VacuumGenerator>& candidates,
                                 const Hose& hose, const SuctionCupSet& cups,
                                 const ProcessParams& process, const CycleSpec& cycle,
                                 const RankingSpec& ranking = {}, const KpiOptions& options = {});

struct SweepRow {
    double diameter_mm = 0.0;
    std::optional<double> evacuation_time_s;
    double energy_per_cycle_j = 0.0;
    bool feasible = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::optional<double> argmin_evacuation_diameter_mm;
    std::optional<double> argmin_energy_diameter_mm;
};

/// KPI curve over hose inner diameters; argmins reported per KPI.
SweepResult sweep_hose_diameter(const GrippingAssembly& assembly_template,
                                const ProcessParams& process, const CycleSpec& cycle,
                                const std::vector<double>& diameters_mm,
                                const KpiOptions& options = {});

/// Whether one (weight, leak) combination still grips within the cycle
/// budget: thresholds re-derived for the weight, H2 reached in time and held
/// until release.
bool gripping_feasible(const GrippingAssembly& assembly, const ProcessParams& process_template,
                       const CycleSpec& cycle, double weight_kg, double d_leak_mm,
                       const KpiOptions& options = {});

struct FeasibilityGrid {
    std::vector<double> weights_kg;
    std::vector<double> leaks_mm;
    std::vector<std::vector<char>> feasible;   // [weight][leak]
    std::vector<std::vector<double>> energy_j; // [weight][leak], 0 when infeasible
};

/// Brute-force evaluation of the full grid (the oracle for the boundary).
FeasibilityGrid feasibility_grid(const GrippingAssembly& assembly,
                                 const ProcessParams& process_template, const CycleSpec& cycle,
                                 const std::vector<double>& weights_kg,
                                 const std::vector<double>& leaks_mm,
                                 const KpiOptions& options = {});

struct BoundaryEntry {
    double weight_kg = 0.0;
    double max_leak_mm = 0.0;
    bool any_feasible = false;
};

/// Largest tolerable leak per weight, found by binary search over the sorted
/// leak grid (feasibility is monotone in the leak diameter).
std::vector<BoundaryEntry> leakage_weight_boundary(const GrippingAssembly& assembly,
                                                   const ProcessParams& process_template,
                                                   const CycleSpec& cycle,
                                                   const std::vector<double>& weights_kg,
                                                   const std::vector<double>& leaks_mm,
                                                   const KpiOptions& options = {});

/// Boundary extracted from an already-computed grid; the reference the
/// binary-search variant must match exactly.
std::vector<BoundaryEntry> boundary_from_grid(const FeasibilityGrid& grid);

} // namespace twinforge
