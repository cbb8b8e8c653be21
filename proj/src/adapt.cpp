#include "twinforge/adapt.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace twinforge {

namespace {

// nominal cost of one counted work unit; fixes the deterministic runtime scale
constexpr double work_unit_cost_s = 25e-9;

double interpolate_vacuum(const Trace& trace, double t, std::size_t& hint) {
    const auto& fs = trace.frames;
    while (hint + 1 < fs.size() && fs[hint + 1].t_s < t) {
        ++hint;
    }
    if (fs[hint].t_s >= t || hint + 1 >= fs.size()) {
        return fs[hint].vacuum_mbar;
    }
    const auto& lo = fs[hint];
    const auto& hi = fs[hint + 1];
    if (hi.t_s == lo.t_s) {
        return hi.vacuum_mbar;
    }
    const double w = (t - lo.t_s) / (hi.t_s - lo.t_s);
    return lo.vacuum_mbar + w * (hi.vacuum_mbar - lo.vacuum_mbar);
}

const SignalFrame& hold_frame(const Trace& trace, double t, std::size_t& hint) {
    const auto& fs = trace.frames;
    while (hint + 1 < fs.size() && fs[hint + 1].t_s <= t) {
        ++hint;
    }
    return fs[hint];
}

} // namespace

DeviationReport compare_traces(const Trace& measured, const Trace& virtual_trace,
                               const CompareChannels& channels) {
    if (measured.frames.empty() || virtual_trace.frames.empty()) {
        throw Error(ErrorKind::incomparable_traces, "empty trace");
    }
    const double t_begin =
        std::max(measured.frames.front().t_s, virtual_trace.frames.front().t_s);
    const double t_end = std::min(measured.frames.back().t_s, virtual_trace.frames.back().t_s);
    if (!(t_end > t_begin)) {
        throw Error(ErrorKind::incomparable_traces, "traces do not overlap in time");
    }

    DeviationReport report;
    double sum_sq = 0.0;
    std::size_t v_hint = 0;
    std::size_t b_hint = 0;
    double prev_t = 0.0;
    double prev_abs = 0.0;
    bool have_prev = false;
    for (const SignalFrame& m : measured.frames) {
        if (m.t_s < t_begin || m.t_s > t_end) {
            continue;
        }
        if (channels.vacuum) {
            const double v = interpolate_vacuum(virtual_trace, m.t_s, v_hint);
            const double dev = std::abs(m.vacuum_mbar - v);
            sum_sq += dev * dev;
            report.max_abs_mbar = std::max(report.max_abs_mbar, dev);
            if (have_prev) {
                report.cumulative_abs_mbar_s += 0.5 * (prev_abs + dev) * (m.t_s - prev_t);
            }
            prev_t = m.t_s;
            prev_abs = dev;
            have_prev = true;
        }
        if (channels.booleans) {
            const SignalFrame& v = hold_frame(virtual_trace, m.t_s, b_hint);
            report.h1_mismatch |= v.in_control_h1 != m.in_control_h1;
            report.h2_mismatch |= v.part_present_h2 != m.part_present_h2;
        }
        ++report.compared_samples;
    }
    if (report.compared_samples == 0) {
        throw Error(ErrorKind::incomparable_traces, "no samples in the overlap window");
    }
    if (channels.vacuum) {
        report.rmse_mbar = std::sqrt(sum_sq / static_cast<double>(report.compared_samples));
    }
    return report;
}

std::uint64_t ActiveConfigurationStore::begin_adaptation() {
    std::lock_guard lock(mutex_);
    return next_sequence_++;
}

ActiveModelConfiguration ActiveConfigurationStore::activate(ActiveModelConfiguration candidate) {
    std::lock_guard lock(mutex_);
    if (!current_) {
        current_ = std::move(candidate);
        return *current_;
    }
    const auto wins = [](const ActiveModelConfiguration& a, const ActiveModelConfiguration& b) {
        if (a.sequence != b.sequence) {
            return a.sequence > b.sequence; // newer adaptation supersedes
        }
        if (a.rank != b.rank) {
            return a.rank < b.rank; // better-ranked configuration wins the race
        }
        if (a.config.depth != b.config.depth) {
            return a.config.depth < b.config.depth;
        }
        return a.config.model_id < b.config.model_id;
    };
    if (wins(candidate, *current_)) {
        current_ = std::move(candidate);
    }
    return *current_;
}

std::optional<ActiveModelConfiguration> ActiveConfigurationStore::current() const {
    std::lock_guard lock(mutex_);
    return current_;
}

void ActiveConfigurationStore::seed(ActiveModelConfiguration initial) {
    std::lock_guard lock(mutex_);
    next_sequence_ = std::max(next_sequence_, initial.sequence + 1);
    current_ = std::move(initial);
}

void ModelPool::add(PoolEntry entry) {
    entry.metadata.validate();
    if (!entry.factory) {
        throw Error(ErrorKind::invalid_parameter, "pool entry needs a factory");
    }
    std::lock_guard lock(mutex_);
    for (const auto& existing : entries_) {
        if (existing->metadata.model_id == entry.metadata.model_id) {
            throw Error(ErrorKind::invalid_parameter,
                        "duplicate pool model '" + entry.metadata.model_id + "'");
        }
    }
    entries_.push_back(std::make_unique<PoolEntry>(std::move(entry)));
}

std::vector<const PoolEntry*> ModelPool::entries() const {
    std::lock_guard lock(mutex_);
    std::vector<const PoolEntry*> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
        out.push_back(e.get());
    }
    return out;
}

const PoolEntry* ModelPool::find(const std::string& model_id) const {
    std::lock_guard lock(mutex_);
    for (const auto& e : entries_) {
        if (e->metadata.model_id == model_id) {
            return e.get();
        }
    }
    return nullptr;
}

std::size_t ModelPool::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::optional<AdaptationGoal> plan(const DeviationReport& report, const Requirements& requirements,
                                   const ActiveModelConfiguration& active) {
    const bool requirements_changed = !(requirements == active.requirements);
    const bool gap = report.rmse_mbar > requirements.epsilon_rmse_mbar;
    if (!requirements_changed && !gap) {
        return std::nullopt;
    }
    AdaptationGoal goal;
    goal.epsilon_rmse_mbar = requirements.epsilon_rmse_mbar;
    goal.runtime_budget_s_per_sim_s = requirements.runtime_budget_s_per_sim_s;
    if (requirements_changed) {
        goal.target = AdaptationGoal::Target::meet_new_requirement;
        goal.cause = AdaptationGoal::Cause::requirement_change;
        // a requirement change may be met by any depth, including lower ones
    } else {
        // unchanged requirements: the asset or its environment drifted
        goal.target = AdaptationGoal::Target::reduce_gap;
        goal.cause = AdaptationGoal::Cause::asset_or_environment;
        goal.pool_query.min_depth = active.config.depth;
    }
    return goal;
}

std::vector<const PoolEntry*> do_structural(const ModelPool& pool, const AdaptationGoal& goal) {
    std::vector<const PoolEntry*> candidates;
    for (const PoolEntry* entry : pool.entries()) {
        if (matches(goal.pool_query, entry->metadata)) {
            candidates.push_back(entry);
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const PoolEntry* a, const PoolEntry* b) {
        const int da = depth_level(a->metadata.depth);
        const int db = depth_level(b->metadata.depth);
        if (da != db) {
            return da < db;
        }
        return a->metadata.model_id < b->metadata.model_id;
    });
    return candidates;
}

FitOutcome fit_parameters(BehaviorModel& model, const Trace& measured,
                          const FitOptions& options) {
    const auto& free_params = model.metadata().free_parameters;
    if (free_params.empty()) {
        throw Error(ErrorKind::invalid_parameter,
                    model.metadata().model_id + " declares no free parameters to fit");
    }

    FitOutcome outcome;
    try {
        Bounds bounds;
        for (const FreeParameter& p : free_params) {
            bounds.box.emplace_back(p.lower, p.upper);
        }
        auto objective = [&](const std::vector<double>& x) {
            try {
                for (std::size_t i = 0; i < free_params.size(); ++i) {
                    model.set_parameter(free_params[i].name, x[i]);
                }
                const Trace virtual_trace = simulate_replay(model, measured, options.dt_s);
                return compare_traces(measured, virtual_trace, options.channels).rmse_mbar;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::numerical_divergence) {
                    return std::numeric_limits<double>::infinity();
                }
                throw;
            }
        };
        const OptimizeResult fit = grid_then_refine(objective, bounds, options.search);
        outcome.evaluations = fit.evaluations;
        if (!std::isfinite(fit.value)) {
            outcome.failed = true;
            outcome.failure = "all fit evaluations diverged";
            return outcome;
        }
        for (std::size_t i = 0; i < free_params.size(); ++i) {
            model.set_parameter(free_params[i].name, fit.x[i]);
            outcome.fitted_parameters[free_params[i].name] = fit.x[i];
        }
        const Trace virtual_trace = simulate_replay(model, measured, options.dt_s);
        outcome.residual = compare_traces(measured, virtual_trace, options.channels);
    } catch (const Error& e) {
        outcome.failed = true;
        outcome.failure = e.what();
    }
    return outcome;
}

bool check(std::vector<ModelConfiguration>& candidates, const AdaptationGoal& goal,
           const UtilityWeights& weights) {
    if (candidates.empty()) {
        return false;
    }
    for (ModelConfiguration& c : candidates) {
        c.passed_gate = !c.failed && c.residual.rmse_mbar <= goal.epsilon_rmse_mbar &&
                        (!goal.runtime_budget_s_per_sim_s ||
                         c.nominal_runtime_per_sim_s <= *goal.runtime_budget_s_per_sim_s);
    }
    const bool any_passed =
        std::any_of(candidates.begin(), candidates.end(),
                    [](const ModelConfiguration& c) { return c.passed_gate; });

    // normalized goodness on [0,1] per axis over the scored set (the gated
    // set normally; all non-failed candidates in the best-effort case)
    auto scored = [&](const ModelConfiguration& c) {
        return any_passed ? c.passed_gate : !c.failed;
    };
    double q_min = std::numeric_limits<double>::infinity();
    double q_max = -std::numeric_limits<double>::infinity();
    double t_min = q_min;
    double t_max = q_max;
    double c_min = q_min;
    double c_max = q_max;
    for (const ModelConfiguration& c : candidates) {
        if (!scored(c)) {
            continue;
        }
        q_min = std::min(q_min, c.residual.rmse_mbar);
        q_max = std::max(q_max, c.residual.rmse_mbar);
        t_min = std::min(t_min, c.nominal_runtime_per_sim_s);
        t_max = std::max(t_max, c.nominal_runtime_per_sim_s);
        c_min = std::min(c_min, static_cast<double>(c.runtime_class));
        c_max = std::max(c_max, static_cast<double>(c.runtime_class));
    }
    auto goodness = [](double value, double lo, double hi) {
        return hi > lo ? 1.0 - (value - lo) / (hi - lo) : 1.0;
    };
    for (ModelConfiguration& c : candidates) {
        if (!scored(c)) {
            c.utility = 0.0;
            continue;
        }
        const double q = goodness(c.residual.rmse_mbar, q_min, q_max);
        const double t = goodness(c.nominal_runtime_per_sim_s, t_min, t_max);
        // the cost axis is proxied by the static runtime-class ordinal
        const double cost = goodness(static_cast<double>(c.runtime_class), c_min, c_max);
        c.utility = weights.quality * q + weights.time * t + weights.cost * cost;
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const ModelConfiguration& a, const ModelConfiguration& b) {
                         if (a.failed != b.failed) {
                             return !a.failed;
                         }
                         if (a.passed_gate != b.passed_gate) {
                             return a.passed_gate;
                         }
                         if (a.utility != b.utility) {
                             return a.utility > b.utility;
                         }
                         if (a.depth != b.depth) {
                             return a.depth < b.depth; // ties break toward lower depth
                         }
                         return a.model_id < b.model_id;
                     });
    return any_passed;
}

DiagnosisRecord diagnose(const ModelConfiguration& fitted,
                         const std::map<std::string, double>& nominal_parameters,
                         const DiagnosisRules& rules) {
    DiagnosisRecord record;
    auto nominal_of = [&](const std::string& name, double fallback) {
        auto it = nominal_parameters.find(name);
        return it == nominal_parameters.end() ? fallback : it->second;
    };
    if (auto it = fitted.fitted_parameters.find(keys::d_leak_mm);
        it != fitted.fitted_parameters.end()) {
        const double nominal = nominal_of(keys::d_leak_mm, 0.0);
        if (it->second - nominal > rules.d_leak_tolerance_mm) {
            record.causes.push_back(
                {"leakage / worn suction lip", keys::d_leak_mm, it->second, nominal});
        }
    }
    if (auto it = fitted.fitted_parameters.find(keys::q_max_scale);
        it != fitted.fitted_parameters.end()) {
        const double nominal = nominal_of(keys::q_max_scale, 1.0);
        if (it->second < rules.q_scale_degraded_below * nominal) {
            record.causes.push_back({"pump degradation", keys::q_max_scale, it->second, nominal});
        }
    }
    if (!record.causes.empty()) {
        record.fault_isolated = true;
        record.summary = record.causes.front().cause;
        for (std::size_t i = 1; i < record.causes.size(); ++i) {
            record.summary += "; " + record.causes[i].cause;
        }
    }
    return record;
}

namespace {

ModelConfiguration evaluate_candidate(const PoolEntry& entry, const Trace& measured,
                                      const RunLimits& limits) {
    ModelConfiguration config;
    config.model_id = entry.metadata.model_id;
    config.depth = depth_level(entry.metadata.depth);
    config.runtime_class = entry.metadata.runtime_class;
    try {
        auto model = entry.factory();
        if (entry.metadata.free_parameters.empty()) {
            const Trace virtual_trace = simulate_replay(*model, measured, limits.dt_s);
            config.residual = compare_traces(measured, virtual_trace, {true, false});
        } else {
            FitOptions fit_options;
            fit_options.dt_s = limits.dt_s;
            fit_options.search = limits.search;
            const FitOutcome outcome = fit_parameters(*model, measured, fit_options);
            config.fitted_parameters = outcome.fitted_parameters;
            config.residual = outcome.residual;
            config.fit_evaluations = outcome.evaluations;
            config.failed = outcome.failed;
            config.failure = outcome.failure;
        }
        if (!config.failed) {
            // timed replay: counted work drives the deterministic metric,
            // the wall clock is informational
            const auto t0 = std::chrono::steady_clock::now();
            const Trace timed = simulate_replay(*model, measured, limits.dt_s);
            const auto t1 = std::chrono::steady_clock::now();
            const double sim_span = timed.frames.back().t_s - timed.frames.front().t_s;
            const double work_s = static_cast<double>(model->work_units()) * work_unit_cost_s;
            config.nominal_runtime_per_sim_s = work_s / sim_span;
            config.wall_runtime_per_sim_s =
                std::chrono::duration<double>(t1 - t0).count() / sim_span;
        }
    } catch (const Error& e) {
        config.failed = true;
        config.failure = e.what();
    }
    return config;
}

} // namespace

AdaptationResult run_pdca(const ModelPool& pool, const Trace& measured,
                          const Requirements& requirements, const RunLimits& limits,
                          ActiveConfigurationStore& store) {
    const auto active = store.current();
    if (!active) {
        throw Error(ErrorKind::invalid_parameter, "no active model configuration to compare");
    }
    if (pool.size() == 0) {
        throw Error(ErrorKind::invalid_parameter, "model pool is empty");
    }

    AdaptationResult result;

    // comparison of real and virtual behavior for the active configuration
    {
        const PoolEntry* active_entry = pool.find(active->config.model_id);
        if (active_entry == nullptr) {
            throw Error(ErrorKind::missing_model,
                        "active configuration '" + active->config.model_id +
                            "' is not in the pool");
        }
        auto model = active_entry->factory();
        for (const auto& [name, value] : active->config.fitted_parameters) {
            model->set_parameter(name, value);
        }
        const Trace virtual_trace = simulate_replay(*model, measured, limits.dt_s);
        result.initial_deviation = compare_traces(measured, virtual_trace, {true, true});
    }

    result.goal = plan(result.initial_deviation, requirements, *active);
    if (!result.goal) {
        result.no_op = true;
        result.goal_met = true;
        result.active = active;
        return result;
    }

    std::vector<const PoolEntry*> entries = do_structural(pool, *result.goal);
    if (entries.size() > static_cast<std::size_t>(limits.max_candidates)) {
        entries.resize(static_cast<std::size_t>(limits.max_candidates));
    }
    if (entries.empty()) {
        result.goal_met = false;
        result.active = active;
        return result;
    }

    // independent candidate tasks; slot-indexed results keep the outcome
    // identical for any thread count
    std::vector<ModelConfiguration> configs(entries.size());
    const int threads = std::max(1, limits.threads);
    if (threads == 1 || entries.size() == 1) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            configs[i] = evaluate_candidate(*entries[i], measured, limits);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const int n_workers = std::min<std::size_t>(threads, entries.size());
        workers.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            workers.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= entries.size()) {
                        return;
                    }
                    configs[i] = evaluate_candidate(*entries[i], measured, limits);
                }
            });
        }
        for (std::thread& t : workers) {
            t.join();
        }
    }

    result.goal_met = check(configs, *result.goal, limits.weights);
    result.candidates = configs;

    const std::uint64_t sequence = store.begin_adaptation();
    const ModelConfiguration& best = result.candidates.front();
    if (!best.failed) {
        ActiveModelConfiguration activation;
        activation.config = best;
        activation.requirements = requirements;
        activation.sequence = sequence;
        activation.rank = 0;
        for (const ModelConfiguration& c : result.candidates) {
            activation.candidates_considered.push_back(c.model_id);
        }
        activation.goal_summary =
            result.goal->target == AdaptationGoal::Target::reduce_gap ? "reduce-gap"
                                                                      : "meet-new-requirement";
        result.active = store.activate(std::move(activation));

        const PoolEntry* best_entry = pool.find(best.model_id);
        std::map<std::string, double> nominal;
        if (best_entry != nullptr) {
            nominal = best_entry->factory()->parameters();
        }
        result.diagnosis = diagnose(best, nominal, limits.diagnosis);
    } else {
        result.active = active;
    }
    return result;
}

namespace {

nlohmann::json deviation_to_json(const DeviationReport& d) {
    return {{"rmse_mbar", d.rmse_mbar},
            {"max_abs_mbar", d.max_abs_mbar},
            {"cumulative_abs_mbar_s", d.cumulative_abs_mbar_s},
            {"h1_mismatch", d.h1_mismatch},
            {"h2_mismatch", d.h2_mismatch},
            {"compared_samples", d.compared_samples}};
}

nlohmann::json config_to_json(const ModelConfiguration& c) {
    nlohmann::json j{{"model_id", c.model_id},
                     {"depth", c.depth},
                     {"runtime_class", c.runtime_class},
                     {"fitted_parameters", c.fitted_parameters},
                     {"rmse_mbar", c.residual.rmse_mbar},
                     {"nominal_runtime_per_sim_s", c.nominal_runtime_per_sim_s},
                     {"wall_runtime_per_sim_s", c.wall_runtime_per_sim_s},
                     {"utility", c.utility},
                     {"passed_gate", c.passed_gate},
                     {"failed", c.failed}};
    if (c.failed) {
        j["failure"] = c.failure;
    }
    return j;
}

} // namespace

nlohmann::json to_json(const AdaptationResult& result) {
    nlohmann::json j;
    if (result.goal) {
        j["goal"] = {
            {"target", result.goal->target == AdaptationGoal::Target::reduce_gap
                           ? "reduce-gap"
                           : "meet-new-requirement"},
            {"cause", result.goal->cause == AdaptationGoal::Cause::asset_or_environment
                          ? "asset-or-environment"
                          : "requirement-change"},
            {"epsilon_rmse_mbar", result.goal->epsilon_rmse_mbar},
        };
        if (result.goal->runtime_budget_s_per_sim_s) {
            j["goal"]["runtime_budget_s_per_sim_s"] = *result.goal->runtime_budget_s_per_sim_s;
        }
    } else {
        j["goal"] = nullptr;
    }
    j["no_op"] = result.no_op;
    j["goal_met"] = result.goal_met;
    j["initial_deviation"] = deviation_to_json(result.initial_deviation);
    auto candidates = nlohmann::json::array();
    for (const ModelConfiguration& c : result.candidates) {
        candidates.push_back(config_to_json(c));
    }
    j["candidates"] = candidates;
    if (result.active) {
        j["active"] = {{"model_id", result.active->config.model_id},
                       {"depth", result.active->config.depth},
                       {"fitted_parameters", result.active->config.fitted_parameters},
                       {"sequence", result.active->sequence},
                       {"goal_summary", result.active->goal_summary},
                       {"candidates_considered", result.active->candidates_considered}};
    } else {
        j["active"] = nullptr;
    }
    nlohmann::json causes = nlohmann::json::array();
    for (const DiagnosisCause& c : result.diagnosis.causes) {
        causes.push_back({{"cause", c.cause},
                          {"parameter", c.parameter},
                          {"fitted", c.fitted},
                          {"nominal", c.nominal}});
    }
    j["diagnosis"] = {{"fault_isolated", result.diagnosis.fault_isolated},
                      {"causes", causes},
                      {"summary", result.diagnosis.summary}};
    return j;
}

std::string canonical_result_json(const AdaptationResult& result) {
    nlohmann::json j = to_json(result);
    for (auto& c : j["candidates"]) {
        c.erase("wall_runtime_per_sim_s");
    }
    return j.dump(2);
}

} // namespace twinforge
