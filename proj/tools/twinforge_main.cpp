// twinforge: multi-fidelity digital-twin toolkit for vacuum gripping systems.
// Subcommands map to the library workflows: create, design, sweep, validate,
// simulate, emulate, adapt, bench.

#include "twinforge/adapt.hpp"
#include "twinforge/components.hpp"
#include "twinforge/design.hpp"
#include "twinforge/emulator.hpp"
#include "twinforge/models.hpp"
#include "twinforge/registry.hpp"
#include "twinforge/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr const char* kToolVersion = "0.1.0";

using twinforge::Error;
using twinforge::ErrorKind;

int log_level() {
    const char* env = std::getenv("TWINFORGE_LOG");
    if (env == nullptr) {
        return 1;
    }
    const std::string v = env;
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void log_info(const std::string& message) {
    if (log_level() >= 1) {
        std::cerr << "[twinforge] " << message << "\n";
    }
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    double dt = 1e-4;
    int threads = 1;
    nlohmann::json config; // loaded lazily

    void load_config() {
        if (config_path.empty()) {
            return;
        }
        std::ifstream in(config_path);
        if (!in) {
            throw Error(ErrorKind::usage, "cannot read config '" + config_path + "'");
        }
        try {
            in >> config;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::usage,
                        "invalid JSON in config '" + config_path + "': " + e.what());
        }
    }

    std::string resolve(const std::string& flag_value, const std::string& key,
                        const std::string& fallback = {}) const {
        if (!flag_value.empty()) {
            return flag_value;
        }
        if (config.contains(key)) {
            try {
                return config.at(key).get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::usage,
                            "config key '" + key + "' must be a path string: " + e.what());
            }
        }
        if (!fallback.empty()) {
            return fallback;
        }
        throw Error(ErrorKind::usage, "missing required input '" + key +
                                          "' (flag or config key)");
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON file providing input paths");
    cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", args.seed, "seed override for stochastic inputs")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--dt", args.dt, "integration step in seconds")->capture_default_str();
    cmd->add_option("--threads", args.threads, "worker cap for parallel sections")
        ->capture_default_str();
}

struct ManifestWriter {
    ManifestWriter(std::string name, CommonArgs& args)
        : subcommand(std::move(name)), common(&args) {}

    std::string subcommand;
    CommonArgs* common = nullptr;
    std::map<std::string, std::string> inputs;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::string out_path(const std::string& name) const {
        return (std::filesystem::path(common->out_dir) / name).string();
    }

    std::string emit(const std::string& name) {
        std::filesystem::create_directories(common->out_dir);
        const std::string path = out_path(name);
        outputs.push_back(path);
        return path;
    }

    void finish() const {
        std::filesystem::create_directories(common->out_dir);
        nlohmann::json j{
            {"subcommand", subcommand},
            {"inputs", inputs},
            {"seed", common->seed},
            {"dt_s", common->dt},
            {"threads", common->threads},
            {"tool_version", kToolVersion},
            {"outputs", outputs},
            {"wall_clock_s",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
        };
        std::ofstream out(out_path("run_manifest.json"));
        out << j.dump(2) << "\n";
    }
};

std::vector<double> parse_grid(const std::string& text) {
    // either "a,b,c" or "lo:hi:n"
    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        double lo = 0.0;
        double hi = 0.0;
        int n = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1) {
            throw Error(ErrorKind::usage, "grid '" + text + "' must be lo:hi:n");
        }
        for (int i = 0; i < n; ++i) {
            values.push_back(n == 1 ? lo : lo + (hi - lo) * i / static_cast<double>(n - 1));
        }
        return values;
    }
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        values.push_back(std::stod(cell));
    }
    if (values.empty()) {
        throw Error(ErrorKind::usage, "empty grid '" + text + "'");
    }
    return values;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        values.push_back(std::stoi(cell));
    }
    return values;
}

twinforge::CycleSpec resolve_cycle(const CommonArgs& common, const std::string& cycle_flag,
                                   int default_reps = 3) {
    twinforge::CycleSpec cycle;
    cycle.repetitions = default_reps;
    std::string path;
    try {
        path = common.resolve(cycle_flag, "cycle");
    } catch (const Error&) {
        return cycle; // built-in default handling cycle
    }
    twinforge::cycle_from_json_file(path, cycle);
    return cycle;
}

// an explicit duration extends the cycle pattern to fill the horizon
void extend_cycle_to(twinforge::CycleSpec& cycle, double duration_s) {
    if (duration_s > 0.0) {
        const int needed =
            static_cast<int>(std::ceil(duration_s / cycle.cycle_period_s - 1e-9));
        cycle.repetitions = std::max(cycle.repetitions, needed);
    }
}

twinforge::GrippingAssembly assembly_for(const twinforge::ComponentCatalog& catalog,
                                         const std::string& generator_id) {
    return {catalog.find(generator_id), catalog.default_hose, catalog.default_cups};
}

std::string format_opt(const std::optional<double>& v) {
    if (!v) {
        return "never";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", *v);
    return buf;
}

// --- subcommand bodies ------------------------------------------------------

int run_create(CommonArgs& common, const std::string& graph_flag, const std::string& table_flag,
               const std::string& library_flag, const std::string& data_flag,
               const std::string& asset_id, const std::string& twin_id,
               const std::string& depths_text) {
    using namespace twinforge;
    ManifestWriter manifest("create", common);
    const std::string graph_path = common.resolve(graph_flag, "graph");
    const std::string table_path = common.resolve(table_flag, "table");
    const std::string library_path = common.resolve(library_flag, "library");
    const std::string data_path = common.resolve(data_flag, "data");
    manifest.inputs = {{"graph", graph_path},
                       {"table", table_path},
                       {"library", library_path},
                       {"data", data_path}};

    const SystemGraph graph = load_system_graph(graph_path);
    const TranslationTable table = load_translation_table(table_path);
    const ModelLibrary library = load_library(library_path);
    const DataBasis data = load_data_basis(data_path);

    const std::vector<int> depths = parse_int_list(depths_text);
    ComposedModel composed =
        compose(semantify(graph, table), library, depth_from_level(*std::max_element(
                                                      depths.begin(), depths.end())));
    composed = parameterize(composed, data, asset_id);
    const TwinPackage package = build_twin_package(composed, depths, twin_id, library, data);

    const std::string out = manifest.emit(twin_id + ".twin.json");
    export_package(package, out);
    log_info("exported twin package to " + out);
    manifest.finish();
    return 0;
}

int run_design(CommonArgs& common, const std::string& catalog_flag,
               const std::string& process_flag, const std::string& cycle_flag) {
    using namespace twinforge;
    ManifestWriter manifest("design", common);
    const std::string catalog_path = common.resolve(catalog_flag, "catalog");
    const std::string process_path = common.resolve(process_flag, "process");
    manifest.inputs = {{"catalog", catalog_path}, {"process", process_path}};

    const ComponentCatalog catalog = load_catalog(catalog_path);
    const ProcessParams process = load_process_params(process_path);
    const CycleSpec cycle = resolve_cycle(common, cycle_flag);

    const RankedSelection sel =
        select_generator(catalog.generators, catalog.default_hose, catalog.default_cups,
                         process, cycle, {}, {common.dt});

    const std::string csv_path = manifest.emit("design_kpis.csv");
    std::ofstream csv(csv_path);
    csv << "rank,type_id,power_source,feasible,placement,evacuation_s,blow_off_s,"
           "energy_per_cycle_J,cost_EUR,reason\n";
    int rank = 1;
    for (const KpiReport& r : sel.ranked) {
        csv << rank++ << ',' << r.type_id << ','
            << (r.power_source == PowerSource::electric ? "electric" : "pneumatic") << ','
            << (r.feasible ? 1 : 0) << ',' << placement_name(r.placement) << ','
            << format_opt(r.evacuation_time_s) << ',' << format_opt(r.blow_off_time_s) << ','
            << r.energy_per_cycle_j << ',' << r.acquisition_cost_eur << ',' << r.reason
            << "\n";
    }
    csv.close();

    nlohmann::json summary;
    summary["chosen"] = sel.chosen_type_id ? nlohmann::json(*sel.chosen_type_id)
                                           : nlohmann::json(nullptr);
    summary["required_vacuum_mbar"] = required_vacuum_mbar(process, catalog.default_cups);
    summary["holding_force_n"] = holding_force_n(process);
    const std::string summary_path = manifest.emit("design_summary.json");
    std::ofstream(summary_path) << summary.dump(2) << "\n";
    log_info("chosen generator: " + (sel.chosen_type_id ? *sel.chosen_type_id : "(none)"));
    manifest.finish();
    return 0;
}

int run_sweep(CommonArgs& common, const std::string& catalog_flag,
              const std::string& process_flag, const std::string& cycle_flag,
              const std::string& generator_id, const std::string& diameters_text) {
    using namespace twinforge;
    ManifestWriter manifest("sweep", common);
    const std::string catalog_path = common.resolve(catalog_flag, "catalog");
    const std::string process_path = common.resolve(process_flag, "process");
    manifest.inputs = {{"catalog", catalog_path}, {"process", process_path}};

    const ComponentCatalog catalog = load_catalog(catalog_path);
    const ProcessParams process = load_process_params(process_path);
    const CycleSpec cycle = resolve_cycle(common, cycle_flag);
    const std::vector<double> diameters = parse_grid(diameters_text);

    const SweepResult sweep = sweep_hose_diameter(assembly_for(catalog, generator_id), process,
                                                  cycle, diameters, {common.dt});

    const std::string csv_path = manifest.emit("sweep.csv");
    std::ofstream csv(csv_path);
    csv << "diameter_mm,evacuation_s,energy_per_cycle_J,feasible\n";
    for (const SweepRow& row : sweep.rows) {
        csv << row.diameter_mm << ',' << format_opt(row.evacuation_time_s) << ','
            << row.energy_per_cycle_j << ',' << (row.feasible ? 1 : 0) << "\n";
    }
    csv.close();

    nlohmann::json summary;
    summary["generator"] = generator_id;
    summary["argmin_evacuation_diameter_mm"] =
        sweep.argmin_evacuation_diameter_mm ? nlohmann::json(*sweep.argmin_evacuation_diameter_mm)
                                            : nlohmann::json(nullptr);
    summary["argmin_energy_diameter_mm"] =
        sweep.argmin_energy_diameter_mm ? nlohmann::json(*sweep.argmin_energy_diameter_mm)
                                        : nlohmann::json(nullptr);
    const std::string summary_path = manifest.emit("sweep_summary.json");
    std::ofstream(summary_path) << summary.dump(2) << "\n";
    manifest.finish();
    return 0;
}

int run_validate(CommonArgs& common, const std::string& catalog_flag,
                 const std::string& process_flag, const std::string& cycle_flag,
                 const std::string& generator_id, const std::string& weights_text,
                 const std::string& leaks_text) {
    using namespace twinforge;
    ManifestWriter manifest("validate", common);
    const std::string catalog_path = common.resolve(catalog_flag, "catalog");
    const std::string process_path = common.resolve(process_flag, "process");
    manifest.inputs = {{"catalog", catalog_path}, {"process", process_path}};

    const ComponentCatalog catalog = load_catalog(catalog_path);
    const ProcessParams process = load_process_params(process_path);
    CycleSpec cycle = resolve_cycle(common, cycle_flag);
    cycle.repetitions = 1;
    const std::vector<double> weights = parse_grid(weights_text);
    const std::vector<double> leaks = parse_grid(leaks_text);
    const GrippingAssembly assembly = assembly_for(catalog, generator_id);

    const FeasibilityGrid grid =
        feasibility_grid(assembly, process, cycle, weights, leaks, {common.dt});
    const auto boundary = boundary_from_grid(grid);

    const std::string grid_path = manifest.emit("grid.csv");
    std::ofstream grid_csv(grid_path);
    grid_csv << "weight_kg,leak_mm,feasible,energy_per_cycle_J\n";
    for (std::size_t i = 0; i < grid.weights_kg.size(); ++i) {
        for (std::size_t j = 0; j < grid.leaks_mm.size(); ++j) {
            grid_csv << grid.weights_kg[i] << ',' << grid.leaks_mm[j] << ','
                     << int(grid.feasible[i][j]) << ',' << grid.energy_j[i][j] << "\n";
        }
    }
    grid_csv.close();

    const std::string boundary_path = manifest.emit("boundary.csv");
    std::ofstream boundary_csv(boundary_path);
    boundary_csv << "weight_kg,max_leak_mm,any_feasible\n";
    for (const BoundaryEntry& entry : boundary) {
        boundary_csv << entry.weight_kg << ',' << entry.max_leak_mm << ','
                     << (entry.any_feasible ? 1 : 0) << "\n";
    }
    boundary_csv.close();

    nlohmann::json summary;
    summary["generator"] = generator_id;
    auto points = nlohmann::json::array();
    for (const BoundaryEntry& entry : boundary) {
        points.push_back({{"weight_kg", entry.weight_kg},
                          {"max_leak_mm", entry.max_leak_mm},
                          {"any_feasible", entry.any_feasible}});
    }
    summary["boundary"] = points;
    const std::string summary_path = manifest.emit("validate_summary.json");
    std::ofstream(summary_path) << summary.dump(2) << "\n";
    manifest.finish();
    return 0;
}

int run_simulate(CommonArgs& common, const std::string& package_flag, int depth,
                 const std::string& cycle_flag, double duration) {
    using namespace twinforge;
    ManifestWriter manifest("simulate", common);
    const std::string package_path = common.resolve(package_flag, "package");
    manifest.inputs = {{"package", package_path}};

    const TwinPackage package = read_package(package_path);
    auto model = instantiate_package_depth(package, depth);
    CycleSpec cycle = resolve_cycle(common, cycle_flag);
    extend_cycle_to(cycle, duration);
    const double horizon = duration > 0.0 ? duration : cycle.cycle_period_s * cycle.repetitions;

    const Trace trace = simulate(*model, cycle, horizon, common.dt);
    const std::string trace_path = manifest.emit("trace.csv");
    write_trace_csv(trace, trace_path);
    log_info("simulated " + std::to_string(horizon) + " s at depth " + std::to_string(depth));
    manifest.finish();
    return 0;
}

int run_emulate(CommonArgs& common, const std::string& plant_flag, const std::string& cycle_flag,
                double duration) {
    using namespace twinforge;
    ManifestWriter manifest("emulate", common);
    const std::string plant_path = common.resolve(plant_flag, "plant");
    manifest.inputs = {{"plant", plant_path}};

    PlantConfig plant = load_plant_config(plant_path);
    if (common.seed_given) {
        plant.seed = common.seed;
    }
    CycleSpec cycle = resolve_cycle(common, cycle_flag);
    extend_cycle_to(cycle, duration);
    const double horizon = duration > 0.0 ? duration : cycle.cycle_period_s * cycle.repetitions;

    const Trace trace = emulate(plant, cycle, horizon, common.dt);
    const std::string trace_path = manifest.emit("measured.csv");
    write_trace_csv(trace, trace_path);
    manifest.finish();
    return 0;
}

int run_adapt(CommonArgs& common, const std::string& package_flag,
              const std::string& measured_flag, int active_depth, double epsilon,
              double budget) {
    using namespace twinforge;
    ManifestWriter manifest("adapt", common);
    const std::string package_path = common.resolve(package_flag, "package");
    const std::string measured_path = common.resolve(measured_flag, "measured");
    manifest.inputs = {{"package", package_path}, {"measured", measured_path}};

    ModelPool pool;
    const TwinPackage package = import_package(package_path, pool);
    const Trace measured = read_trace_csv(measured_path);

    Requirements requirements;
    requirements.epsilon_rmse_mbar = epsilon;
    if (budget > 0.0) {
        requirements.runtime_budget_s_per_sim_s = budget;
    }

    ActiveConfigurationStore store;
    ActiveModelConfiguration initial;
    initial.config.model_id = package.twin_id + "/d" + std::to_string(active_depth);
    initial.config.depth = active_depth;
    initial.config.runtime_class = active_depth;
    initial.requirements = requirements;
    store.seed(initial);

    RunLimits limits;
    limits.threads = common.threads;
    limits.dt_s = common.dt;
    const AdaptationResult result = run_pdca(pool, measured, requirements, limits, store);

    const std::string result_path = manifest.emit("adaptation.json");
    std::ofstream(result_path) << to_json(result).dump(2) << "\n";
    const std::string canonical_path = manifest.emit("adaptation_canonical.json");
    std::ofstream(canonical_path) << canonical_result_json(result) << "\n";
    if (result.active) {
        log_info("active configuration: " + result.active->config.model_id);
    }
    log_info("diagnosis: " + result.diagnosis.summary);
    manifest.finish();
    return 0;
}

int run_bench(CommonArgs& common, const std::string& catalog_flag,
              const std::string& process_flag, const std::string& generator_id,
              const std::string& depths_text, int runs, double horizon) {
    using namespace twinforge;
    ManifestWriter manifest("bench", common);
    const std::string catalog_path = common.resolve(catalog_flag, "catalog");
    const std::string process_path = common.resolve(process_flag, "process");
    manifest.inputs = {{"catalog", catalog_path}, {"process", process_path}};

    const ComponentCatalog catalog = load_catalog(catalog_path);
    const ProcessParams process = load_process_params(process_path);
    const GrippingAssembly assembly = assembly_for(catalog, generator_id);
    const double dp_req = required_vacuum_mbar(process, assembly.cups);
    const ThresholdConfig thresholds = thresholds_for(
        dp_req, assembly.generator,
        threshold_policy_from_name(assembly.generator.threshold_policy));
    const auto params = gripper_param_map(assembly, thresholds);

    CycleSpec cycle;
    cycle.repetitions = static_cast<int>(std::ceil(horizon / cycle.cycle_period_s));

    const std::vector<int> depths = parse_int_list(depths_text);
    const std::string csv_path = manifest.emit("bench.csv");
    std::ofstream csv(csv_path);
    csv << "depth,run,wall_s\n";

    nlohmann::json summary = nlohmann::json::array();
    SimulateOptions options;
    options.record_every = 0; // time the stepping, not the recording
    for (int level : depths) {
        auto model = make_gripper_model(depth_from_level(level), params);
        simulate(*model, cycle, horizon, common.dt, options); // warm-up
        std::vector<double> times;
        for (int run = 0; run < runs; ++run) {
            const auto t0 = std::chrono::steady_clock::now();
            simulate(*model, cycle, horizon, common.dt, options);
            const auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
            csv << level << ',' << run << ',' << times.back() << "\n";
        }
        std::vector<double> sorted = times;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        double mean = 0.0;
        for (double t : times) {
            mean += t;
        }
        mean /= static_cast<double>(times.size());
        summary.push_back({{"depth", level}, {"median_s", median}, {"mean_s", mean}});
        log_info("depth " + std::to_string(level) + ": median " + std::to_string(median) + " s");
    }
    csv.close();
    const std::string summary_path = manifest.emit("bench_summary.json");
    std::ofstream(summary_path) << summary.dump(2) << "\n";
    manifest.finish();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-fidelity digital-twin toolkit for vacuum gripping systems"};
    app.require_subcommand(1);

    CommonArgs common;

    // create
    auto* create = app.add_subcommand("create", "compose, parameterize and package a twin");
    std::string graph_flag, table_flag, library_flag, data_flag;
    std::string asset_id = "vac.generator.ecbpmi";
    std::string twin_id = "gripper-twin";
    std::string depths_text = "1,2,3,4";
    add_common(create, common);
    create->add_option("--graph", graph_flag, "system description graph JSON");
    create->add_option("--table", table_flag, "translation table JSON");
    create->add_option("--library", library_flag, "model library manifest JSON");
    create->add_option("--data", data_flag, "data basis JSON");
    create->add_option("--id", asset_id, "asset type or instance id")->capture_default_str();
    create->add_option("--twin-id", twin_id, "identifier of the packaged twin")
        ->capture_default_str();
    create->add_option("--depths", depths_text, "modeling depths to package")
        ->capture_default_str();

    // design
    auto* design = app.add_subcommand("design", "rank catalog generators on a handling task");
    std::string catalog_flag, process_flag, cycle_flag;
    add_common(design, common);
    design->add_option("--catalog", catalog_flag, "component catalog JSON");
    design->add_option("--process", process_flag, "handling process JSON");
    design->add_option("--cycle", cycle_flag, "cycle spec JSON");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "hose-diameter KPI sweep");
    std::string sweep_generator = "ECBPI";
    std::string diameters_text = "1,2,3,4,5,6,7,8";
    add_common(sweep, common);
    sweep->add_option("--catalog", catalog_flag, "component catalog JSON");
    sweep->add_option("--process", process_flag, "handling process JSON");
    sweep->add_option("--cycle", cycle_flag, "cycle spec JSON");
    sweep->add_option("--generator", sweep_generator, "generator type id")
        ->capture_default_str();
    sweep->add_option("--diameters", diameters_text, "list a,b,c or lo:hi:n in mm")
        ->capture_default_str();

    // validate
    auto* validate = app.add_subcommand("validate", "leakage-weight feasibility boundary");
    std::string validate_generator = "ECBPMi";
    std::string weights_text = "0.03:0.25:10";
    std::string leaks_text = "0:0.45:10";
    add_common(validate, common);
    validate->add_option("--catalog", catalog_flag, "component catalog JSON");
    validate->add_option("--process", process_flag, "handling process JSON");
    validate->add_option("--cycle", cycle_flag, "cycle spec JSON");
    validate->add_option("--generator", validate_generator, "generator type id")
        ->capture_default_str();
    validate->add_option("--weights", weights_text, "weight grid in kg")->capture_default_str();
    validate->add_option("--dleaks", leaks_text, "leak diameter grid in mm")
        ->capture_default_str();

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "run one packaged model over a cycle");
    std::string package_flag;
    int sim_depth = 4;
    double sim_duration = 0.0;
    add_common(simulate_cmd, common);
    simulate_cmd->add_option("--package", package_flag, "twin package JSON");
    simulate_cmd->add_option("--depth", sim_depth, "modeling depth to run")
        ->capture_default_str();
    simulate_cmd->add_option("--cycle", cycle_flag, "cycle spec JSON");
    simulate_cmd->add_option("--duration", sim_duration, "simulated seconds (default: cycles)");

    // emulate
    auto* emulate_cmd = app.add_subcommand("emulate", "produce a measured trace from the plant");
    std::string plant_flag;
    double emu_duration = 0.0;
    add_common(emulate_cmd, common);
    emulate_cmd->add_option("--plant", plant_flag, "plant config JSON");
    emulate_cmd->add_option("--cycle", cycle_flag, "cycle spec JSON");
    emulate_cmd->add_option("--duration", emu_duration, "emulated seconds (default: cycles)");

    // adapt
    auto* adapt_cmd = app.add_subcommand("adapt", "run the PDCA adaptation on a measured trace");
    std::string measured_flag;
    int active_depth = 2;
    double epsilon = 20.0;
    double budget = 0.0;
    add_common(adapt_cmd, common);
    adapt_cmd->add_option("--package", package_flag, "twin package JSON (model pool)");
    adapt_cmd->add_option("--measured", measured_flag, "measured trace CSV");
    adapt_cmd->add_option("--active-depth", active_depth, "currently active modeling depth")
        ->capture_default_str();
    adapt_cmd->add_option("--epsilon", epsilon, "quality tolerance, mbar RMSE")
        ->capture_default_str();
    adapt_cmd->add_option("--budget", budget, "runtime budget, s per simulated s");

    // bench
    auto* bench = app.add_subcommand("bench", "runtime comparison across modeling depths");
    std::string bench_generator = "ECBPMi";
    std::string bench_depths = "1,2,3,4";
    int bench_runs = 10;
    double bench_horizon = 9.0;
    add_common(bench, common);
    bench->add_option("--catalog", catalog_flag, "component catalog JSON");
    bench->add_option("--process", process_flag, "handling process JSON");
    bench->add_option("--generator", bench_generator, "generator type id")
        ->capture_default_str();
    bench->add_option("--depths", bench_depths, "depth levels to time")->capture_default_str();
    bench->add_option("--runs", bench_runs, "timed runs per depth")->capture_default_str();
    bench->add_option("--horizon", bench_horizon, "simulated seconds per run")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        common.load_config();
        if (create->parsed()) {
            return run_create(common, graph_flag, table_flag, library_flag, data_flag, asset_id,
                              twin_id, depths_text);
        }
        if (design->parsed()) {
            return run_design(common, catalog_flag, process_flag, cycle_flag);
        }
        if (sweep->parsed()) {
            return run_sweep(common, catalog_flag, process_flag, cycle_flag, sweep_generator,
                             diameters_text);
        }
        if (validate->parsed()) {
            return run_validate(common, catalog_flag, process_flag, cycle_flag,
                                validate_generator, weights_text, leaks_text);
        }
        if (simulate_cmd->parsed()) {
            return run_simulate(common, package_flag, sim_depth, cycle_flag, sim_duration);
        }
        if (emulate_cmd->parsed()) {
            return run_emulate(common, plant_flag, cycle_flag, emu_duration);
        }
        if (adapt_cmd->parsed()) {
            return run_adapt(common, package_flag, measured_flag, active_depth, epsilon, budget);
        }
        if (bench->parsed()) {
            return run_bench(common, catalog_flag, process_flag, bench_generator, bench_depths,
                             bench_runs, bench_horizon);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.kind() == ErrorKind::usage || e.kind() == ErrorKind::io) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
