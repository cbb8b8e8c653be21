#pragma once

#include "twinforge/adapt.hpp"
#include "twinforge/metadata.hpp"
#include "twinforge/models.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace twinforge {

// --- System description graph ---------------------------------------------

struct GraphNode {
    std::string node_id;
    std::string name; // possibly company-specific
    std::optional<std::string> type_id;
    std::optional<std::string> instance_id;
};

struct PortRef {
    std::string node_id;
    std::string port;
};

struct GraphEdge {
    PortRef from;
    PortRef to;
    std::string kind = "pneumatic";
};

struct SystemGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    void validate() const;
    [[nodiscard]] const GraphNode* find_node(const std::string& node_id) const;
};

SystemGraph system_graph_from_json(const nlohmann::json& j);
nlohmann::json system_graph_to_json(const SystemGraph& graph);
SystemGraph load_system_graph(const std::string& path);

/// Company-specific designation -> semantically unique type identifier.
struct TranslationTable {
    std::map<std::string, std::string> name_to_type;
};

TranslationTable load_translation_table(const std::string& path);

/// Resolves missing type_ids through the translation table. Idempotent;
/// unmapped names raise unresolved-semantics listing the offending nodes.
SystemGraph semantify(SystemGraph graph, const TranslationTable& table);

// --- Behavior model library -------------------------------------------------

struct LibraryTemplate {
    std::string type_id;
    std::string kind; // vacuum_generator | hose | cup_set | gripper_system
    ModelingRange range = ModelingRange::component;
    std::vector<std::string> ports;
    std::set<int> depths;
    std::map<std::string, double> defaults;

    [[nodiscard]] bool has_port(const std::string& port) const;
};

struct ModelLibrary {
    std::string version;
    std::map<std::string, LibraryTemplate> templates;

    [[nodiscard]] const LibraryTemplate& get(const std::string& type_id) const;
};

ModelLibrary load_library(const std::string& path);

/// Type-level parameter sets plus per-instance overrides.
struct DataBasis {
    std::string version;
    std::map<std::string, std::map<std::string, double>> type_parameters;
    std::map<std::string, InstanceRecord> instances;
    std::map<std::string, std::vector<std::string>> materials; // per type_id

    void add_instance(InstanceRecord record);
};

DataBasis load_data_basis(const std::string& path);

// --- Composition ------------------------------------------------------------

/// A composed (and possibly parameterized) model blueprint of the gripper
/// family: the semantified graph reduced to one lumped parameter map.
struct ComposedModel {
    ModelingDepth depth = ModelingDepth::physical_non_spatial;
    SystemGraph graph;
    std::map<std::string, double> parameters;
    std::string asset_type_id;
    std::optional<std::string> asset_instance_id;
    std::vector<std::string> part_type_ids;
    bool parameterized = false;
};

/// Instantiates one template per node and wires them along the edges into a
/// single steppable model blueprint with library-default parameters.
ComposedModel compose(const SystemGraph& graph, const ModelLibrary& library, ModelingDepth depth);

/// Attaches parameters from the data basis: a type id yields the type-level
/// set, an instance id overlays the instance's measured overrides.
ComposedModel parameterize(ComposedModel model, const DataBasis& data, const std::string& id);

/// Builds the steppable model from a blueprint.
std::unique_ptr<BehaviorModel> instantiate(const ComposedModel& model,
                                           const std::string& model_id = {});

// --- Twin package -----------------------------------------------------------

struct TwinPackage {
    int schema_version = 1;
    std::string twin_id;
    std::string asset_type_id;
    std::optional<std::string> asset_instance_id;
    SystemGraph graph;
    std::map<int, std::map<std::string, double>> depth_parameters;
    std::map<int, ModelMetadata> depth_metadata;
    std::vector<std::string> materials;
    std::string library_version;
    std::string data_basis_version;
    std::string created;
};

/// Assembles the package for a parameterized blueprint across the requested
/// depths, pulling metadata from the instantiated models and materials from
/// the data basis.
TwinPackage build_twin_package(const ComposedModel& model, const std::vector<int>& depths,
                               const std::string& twin_id, const ModelLibrary& library,
                               const DataBasis& data);

void export_package(const TwinPackage& package, const std::string& path);

/// Parses and validates a package file; schema violations raise
/// malformed-package naming the JSON path.
TwinPackage read_package(const std::string& path);

/// Registers one pool entry per packaged depth (model ids `<twin>/d<k>`).
TwinPackage import_package(const std::string& path, ModelPool& pool);

/// The steppable model for one packaged depth.
std::unique_ptr<BehaviorModel> instantiate_package_depth(const TwinPackage& package, int depth);

} // namespace twinforge
