#pragma once

#include "twinforge/metadata.hpp"
#include "twinforge/models.hpp"
#include "twinforge/optimize.hpp"
#include "twinforge/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

/// Gap between a measured and a virtual trace on the compared channels.
struct DeviationReport {
    double rmse_mbar = 0.0;
    double max_abs_mbar = 0.0;
    double cumulative_abs_mbar_s = 0.0;
    bool h1_mismatch = false;
    bool h2_mismatch = false;
    std::size_t compared_samples = 0;
};

struct CompareChannels {
    bool vacuum = true;
    bool booleans = true;
};

/// Resamples the virtual trace onto the measured timestamps (linear for the
/// vacuum channel, hold for booleans) and reports the deviation metrics.
DeviationReport compare_traces(const Trace& measured, const Trace& virtual_trace,
                               const CompareChannels& channels = {});

/// What an application currently demands from its model.
struct Requirements {
    double epsilon_rmse_mbar = 20.0;
    std::optional<double> runtime_budget_s_per_sim_s;

    bool operator==(const Requirements&) const = default;
};

struct AdaptationGoal {
    enum class Target { reduce_gap, meet_new_requirement };
    enum class Cause { asset_or_environment, requirement_change };

    Target target = Target::reduce_gap;
    Cause cause = Cause::asset_or_environment;
    double epsilon_rmse_mbar = 20.0;
    std::optional<double> runtime_budget_s_per_sim_s;
    MetadataQuery pool_query;
};

/// One candidate produced by the Do step and scored by the Check step.
struct ModelConfiguration {
    std::string model_id;
    int depth = 0;
    int runtime_class = 1; // static cost hint from the metadata
    std::map<std::string, double> fitted_parameters; // free parameters only
    DeviationReport residual;
    /// Deterministic runtime metric (counted work, not wall clock); the
    /// ranking input, so results are schedule-independent.
    double nominal_runtime_per_sim_s = 0.0;
    /// Observed wall clock, reported for reference only.
    double wall_runtime_per_sim_s = 0.0;
    double utility = 0.0;
    bool passed_gate = false;
    bool failed = false;
    std::string failure;
    int fit_evaluations = 0;
};

struct ActiveModelConfiguration {
    ModelConfiguration config;
    Requirements requirements;
    std::uint64_t sequence = 0; // adaptation epoch that produced it
    int rank = 0;               // rank within that epoch's candidate list
    std::vector<std::string> candidates_considered;
    std::string goal_summary;
};

/// Holds the single active configuration per application. Concurrent
/// activations resolve deterministically: newer adaptation epochs win, and
/// within an epoch the better-ranked configuration wins.
class ActiveConfigurationStore {
  public:
    std::uint64_t begin_adaptation();
    ActiveModelConfiguration activate(ActiveModelConfiguration candidate);
    [[nodiscard]] std::optional<ActiveModelConfiguration> current() const;
    void seed(ActiveModelConfiguration initial);

  private:
    mutable std::mutex mutex_;
    std::optional<ActiveModelConfiguration> current_;
    std::uint64_t next_sequence_ = 1;
};

struct PoolEntry {
    ModelMetadata metadata;
    std::function<std::unique_ptr<BehaviorModel>()> factory;
};

/// The heterogeneous model pool; reads are lock-free snapshots, writes are
/// serialized.
class ModelPool {
  public:
    void add(PoolEntry entry);
    [[nodiscard]] std::vector<const PoolEntry*> entries() const;
    [[nodiscard]] const PoolEntry* find(const std::string& model_id) const;
    [[nodiscard]] std::size_t size() const;

  private:
    mutable std::mutex mutex_;
    std::vector<std::unique_ptr<PoolEntry>> entries_;
};

/// Plan step: decides whether adaptation is needed and classifies the cause.
std::optional<AdaptationGoal> plan(const DeviationReport& report, const Requirements& requirements,
                                   const ActiveModelConfiguration& active);

/// Do step, structural part: metadata-filtered candidates in ascending depth.
std::vector<const PoolEntry*> do_structural(const ModelPool& pool, const AdaptationGoal& goal);

struct FitOptions {
    double dt_s = 1e-4;
    FitSearchOptions search;
    CompareChannels channels{true, false}; // quality is judged on the vacuum channel
};

struct FitOutcome {
    std::map<std::string, double> fitted_parameters;
    DeviationReport residual;
    int evaluations = 0;
    bool failed = false;
    std::string failure;
};

/// Do step, parameter part: bounded derivative-free minimization of the
/// replay residual over the model's declared free parameters.
FitOutcome fit_parameters(BehaviorModel& model, const Trace& measured,
                          const FitOptions& options = {});

struct UtilityWeights {
    double quality = 0.6;
    double time = 0.3;
    double cost = 0.1;
};

/// Check step: quality/budget gates plus normalized utility scoring.
/// Returns true when at least one candidate passed the gates; candidates are
/// reordered best-first either way (best-effort ranking when none passed).
bool check(std::vector<ModelConfiguration>& candidates, const AdaptationGoal& goal,
           const UtilityWeights& weights = {});

struct DiagnosisRules {
    double d_leak_tolerance_mm = 0.05;
    double q_scale_degraded_below = 0.85;
};

struct DiagnosisCause {
    std::string cause;
    std::string parameter;
    double fitted = 0.0;
    double nominal = 0.0;
};

struct DiagnosisRecord {
    bool fault_isolated = false;
    std::vector<DiagnosisCause> causes;
    std::string summary = "no fault isolated";
};

/// Maps out-of-tolerance fitted parameters to named causes.
DiagnosisRecord diagnose(const ModelConfiguration& fitted,
                         const std::map<std::string, double>& nominal_parameters,
                         const DiagnosisRules& rules = {});

struct RunLimits {
    int threads = 1;
    int max_candidates = 16;
    double dt_s = 1e-4;
    FitSearchOptions search;
    UtilityWeights weights;
    DiagnosisRules diagnosis;
};

struct AdaptationResult {
    std::optional<AdaptationGoal> goal;
    DeviationReport initial_deviation;
    std::vector<ModelConfiguration> candidates; // ranked best-first
    std::optional<ActiveModelConfiguration> active;
    DiagnosisRecord diagnosis;
    bool no_op = false;
    bool goal_met = false;
};

/// The full PDCA pass: plan, structural + parameter adaptation, utility
/// check, activation, diagnosis. Candidate evaluation parallelizes over
/// limits.threads; results are independent of the schedule.
AdaptationResult run_pdca(const ModelPool& pool, const Trace& measured,
                          const Requirements& requirements, const RunLimits& limits,
                          ActiveConfigurationStore& store);

nlohmann::json to_json(const AdaptationResult& result);

/// Canonical form for byte-comparison: measured wall-clock stripped, keys
/// sorted, fixed float formatting.
std::string canonical_result_json(const AdaptationResult& result);

} // namespace twinforge
