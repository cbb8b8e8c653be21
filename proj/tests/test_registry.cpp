#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "twinforge/emulator.hpp"
#include "twinforge/registry.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace twinforge;
using namespace tftest;

namespace {

const std::string kData = TWINFORGE_DATA_DIR;

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

bool traces_identical(const Trace& a, const Trace& b) {
    if (a.frames.size() != b.frames.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        const auto& x = a.frames[i];
        const auto& y = b.frames[i];
        if (x.t_s != y.t_s || x.vacuum_mbar != y.vacuum_mbar || x.power_w != y.power_w ||
            x.part_present_h2 != y.part_present_h2 || x.in_control_h1 != y.in_control_h1) {
            return false;
        }
    }
    return true;
}

ComposedModel demo_composed(ModelingDepth depth) {
    const SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    return compose(semantify(graph, table), library, depth);
}

} // namespace

TEST_CASE("semantify resolves company-specific names") {
    const SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const SystemGraph resolved = semantify(graph, table);
    REQUIRE(resolved.nodes.size() == 3);
    CHECK(*resolved.find_node("pump")->type_id == "vac.generator.ecbpmi");
    CHECK(*resolved.find_node("hose")->type_id == "vac.hose.750x3");
    CHECK(*resolved.find_node("cups")->type_id == "vac.cupset.3x11_7");
}

TEST_CASE("semantify is the identity on fully typed graphs") {
    const SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const SystemGraph once = semantify(graph, table);
    const SystemGraph twice = semantify(once, table);
    for (std::size_t i = 0; i < once.nodes.size(); ++i) {
        CHECK(once.nodes[i].type_id == twice.nodes[i].type_id);
    }
}

TEST_CASE("unmapped names raise unresolved-semantics naming the nodes") {
    SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    graph.nodes[0].name = "Totally-Unknown-Device";
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    try {
        semantify(graph, table);
        FAIL("expected unresolved-semantics");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unresolved_semantics);
        CHECK(std::string(e.what()).find("pump") != std::string::npos);
    }
}

TEST_CASE("composed model is bit-identical to the hand-built one") {
    ComposedModel composed = demo_composed(ModelingDepth::physical_non_spatial);
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    composed = parameterize(composed, data, "vac.generator.ecbpmi");
    auto from_graph = instantiate(composed, "twin/d4");

    auto hand_built = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());

    const Trace a = simulate(*from_graph, reference_cycle(2), 1.6, 1e-4);
    const Trace b = simulate(*hand_built, reference_cycle(2), 1.6, 1e-4);
    CHECK(traces_identical(a, b));
}

TEST_CASE("node order does not change the composed behavior") {
    SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    std::reverse(graph.nodes.begin(), graph.nodes.end());
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    const DataBasis data = load_data_basis(kData + "/data_basis.json");

    ComposedModel reordered = parameterize(
        compose(semantify(graph, table), library, ModelingDepth::physical_non_spatial), data,
        "vac.generator.ecbpmi");
    ComposedModel original = parameterize(demo_composed(ModelingDepth::physical_non_spatial),
                                          data, "vac.generator.ecbpmi");
    CHECK(reordered.parameters == original.parameters);
}

TEST_CASE("single-node system graphs use the system template directly") {
    SystemGraph graph;
    graph.nodes.push_back({"sys", "Greifsystem-Komplett", std::nullopt, std::nullopt});
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    const ComposedModel composed =
        compose(semantify(graph, table), library, ModelingDepth::continuous_simplified);
    CHECK(composed.asset_type_id == "vac.system.gripper_demo");
    CHECK(composed.parameters.at(keys::q_max_lpm) == 1.6);
}

TEST_CASE("wiring errors name the offending edge or port") {
    SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    graph.edges[0].to.port = "no_such_port";
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    try {
        compose(semantify(graph, table), library, ModelingDepth::physical_non_spatial);
        FAIL("expected wiring error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::wiring);
        CHECK(std::string(e.what()).find("no_such_port") != std::string::npos);
    }
}

TEST_CASE("missing templates are reported as missing-model") {
    SystemGraph graph = load_system_graph(kData + "/system_graph.json");
    const TranslationTable table = load_translation_table(kData + "/translation_table.json");
    ModelLibrary library = load_library(kData + "/library_manifest.json");
    library.templates.erase("vac.hose.750x3");
    CHECK_THROWS_AS(compose(semantify(graph, table), library, ModelingDepth::physical_non_spatial),
                    Error);
}

TEST_CASE("type-level parameterization pulls the catalog values") {
    ComposedModel composed = demo_composed(ModelingDepth::physical_non_spatial);
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    composed = parameterize(composed, data, "vac.generator.ecbpmi");
    CHECK(composed.parameters.at(keys::q_max_lpm) == 1.6);
    CHECK(composed.parameters.at(keys::dp_max_mbar) == 600.0);
    CHECK(composed.parameters.at(keys::rated_power_w) == 3.0);
    CHECK(composed.asset_type_id == "vac.generator.ecbpmi");
    CHECK_FALSE(composed.asset_instance_id.has_value());
}

TEST_CASE("instance parameterization overlays only the measured overrides") {
    ComposedModel composed = demo_composed(ModelingDepth::physical_non_spatial);
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    composed = parameterize(composed, data, "ecbpmi-sn042");
    CHECK(composed.parameters.at(keys::q_max_lpm) == 1.52);
    CHECK(composed.parameters.at(keys::dp_max_mbar) == 596.0);
    // everything else keeps the type-level value
    CHECK(composed.parameters.at(keys::rated_power_w) == 3.0);
    CHECK(composed.parameters.at(keys::hose_length_mm) == 750.0);
    REQUIRE(composed.asset_instance_id.has_value());
    CHECK(*composed.asset_instance_id == "ecbpmi-sn042");
}

TEST_CASE("unknown asset ids are rejected") {
    ComposedModel composed = demo_composed(ModelingDepth::physical_non_spatial);
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    try {
        parameterize(composed, data, "no-such-asset");
        FAIL("expected unknown-asset");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unknown_asset);
    }
}

TEST_CASE("package export/import round-trip preserves behavior exactly") {
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    ComposedModel composed = parameterize(demo_composed(ModelingDepth::physical_non_spatial),
                                          data, "vac.generator.ecbpmi");
    const TwinPackage package =
        build_twin_package(composed, {1, 2, 3, 4}, "gripper-twin", library, data);

    const std::string path = temp_path("twinforge_package_roundtrip.json");
    export_package(package, path);

    ModelPool pool;
    const TwinPackage imported = import_package(path, pool);
    std::remove(path.c_str());

    CHECK(imported.twin_id == "gripper-twin");
    CHECK(imported.depth_parameters == package.depth_parameters);
    CHECK(pool.size() == 4);
    CHECK(imported.library_version == library.version);
    CHECK_FALSE(imported.materials.empty());

    auto original = instantiate_package_depth(package, 4);
    auto restored = instantiate_package_depth(imported, 4);
    const Trace a = simulate(*original, reference_cycle(2), 1.6, 1e-4);
    const Trace b = simulate(*restored, reference_cycle(2), 1.6, 1e-4);
    CHECK(traces_identical(a, b));
}

TEST_CASE("packages missing provenance are rejected with the JSON path") {
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    ComposedModel composed = parameterize(demo_composed(ModelingDepth::physical_non_spatial),
                                          data, "vac.generator.ecbpmi");
    const TwinPackage package = build_twin_package(composed, {4}, "broken", library, data);

    const std::string path = temp_path("twinforge_package_broken.json");
    export_package(package, path);
    nlohmann::json j;
    {
        std::ifstream in(path);
        in >> j;
    }
    j.erase("provenance");
    {
        std::ofstream out(path);
        out << j.dump(2);
    }
    try {
        read_package(path);
        FAIL("expected malformed-package");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::malformed_package);
        CHECK(std::string(e.what()).find("/provenance") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("an imported depth 2-4 package provides exactly three structural candidates") {
    const ModelLibrary library = load_library(kData + "/library_manifest.json");
    const DataBasis data = load_data_basis(kData + "/data_basis.json");
    ComposedModel composed = parameterize(demo_composed(ModelingDepth::physical_non_spatial),
                                          data, "vac.generator.ecbpmi");
    const TwinPackage package =
        build_twin_package(composed, {2, 3, 4}, "gripper-twin", library, data);

    const std::string path = temp_path("twinforge_package_234.json");
    export_package(package, path);
    ModelPool pool;
    import_package(path, pool);
    std::remove(path.c_str());

    AdaptationGoal goal;
    goal.pool_query.min_depth = 2;
    const auto candidates = do_structural(pool, goal);
    CHECK(candidates.size() == 3);
}

TEST_CASE("instance records from the end-of-line test feed the twin pipeline") {
    // UC3: measured instance data shrinks the gap of the composed twin
    PlantConfig plant;
    plant.instance_id = "ecbpmi-eol-77";
    plant.assembly = reference_assembly();
    plant.thresholds = reference_thresholds();
    plant.noise_sigma_mbar = 0.0;
    plant.true_overrides[keys::q_max_lpm] = 1.6 * 0.9;

    InstanceRecord record = end_of_line_test(plant);
    REQUIRE(record.usable);
    record.type_id = "vac.generator.ecbpmi"; // semantic id in the data basis

    DataBasis data = load_data_basis(kData + "/data_basis.json");
    data.add_instance(record);

    ComposedModel type_twin = parameterize(demo_composed(ModelingDepth::physical_non_spatial),
                                           data, "vac.generator.ecbpmi");
    ComposedModel instance_twin = parameterize(
        demo_composed(ModelingDepth::physical_non_spatial), data, "ecbpmi-eol-77");

    const Trace measured = emulate(plant, reference_cycle(2), 1.6, 1e-4);
    auto type_model = instantiate(type_twin, "twin/type");
    auto instance_model = instantiate(instance_twin, "twin/instance");
    const Trace type_trace = simulate_replay(*type_model, measured, 1e-4);
    const Trace instance_trace = simulate_replay(*instance_model, measured, 1e-4);

    const double type_rmse = compare_traces(measured, type_trace).rmse_mbar;
    const double instance_rmse = compare_traces(measured, instance_trace).rmse_mbar;
    CHECK(instance_rmse < type_rmse);
}
