#include "twinforge/registry.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace twinforge {

namespace {

nlohmann::json read_json_file(const std::string& path) {
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
    return j;
}

} // namespace

void SystemGraph::validate() const {
    std::set<std::string> ids;
    for (const GraphNode& n : nodes) {
        if (n.node_id.empty()) {
            throw Error(ErrorKind::invalid_parameter, "graph node without node_id");
        }
        if (!ids.insert(n.node_id).second) {
            throw Error(ErrorKind::invalid_parameter, "duplicate node_id '" + n.node_id + "'");
        }
    }
    for (const GraphEdge& e : edges) {
        for (const PortRef& ref : {e.from, e.to}) {
            if (ids.count(ref.node_id) == 0) {
                throw Error(ErrorKind::invalid_parameter,
                            "edge references unknown node '" + ref.node_id + "'");
            }
        }
    }
}

const GraphNode* SystemGraph::find_node(const std::string& node_id) const {
    for (const GraphNode& n : nodes) {
        if (n.node_id == node_id) {
            return &n;
        }
    }
    return nullptr;
}

namespace {

PortRef parse_port_ref(const std::string& text) {
    const auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size()) {
        throw Error(ErrorKind::invalid_parameter,
                    "port reference '" + text + "' must be 'node.port'");
    }
    return {text.substr(0, dot), text.substr(dot + 1)};
}

std::string port_ref_to_string(const PortRef& ref) { return ref.node_id + "." + ref.port; }

} // namespace

SystemGraph system_graph_from_json(const nlohmann::json& j) {
    SystemGraph graph;
    for (const auto& n : j.at("nodes")) {
        GraphNode node;
        node.node_id = n.at("node_id").get<std::string>();
        node.name = n.value("name", std::string{});
        if (n.contains("type_id")) {
            node.type_id = n.at("type_id").get<std::string>();
        }
        if (n.contains("instance_id")) {
            node.instance_id = n.at("instance_id").get<std::string>();
        }
        graph.nodes.push_back(std::move(node));
    }
    for (const auto& e : j.at("edges")) {
        GraphEdge edge;
        edge.from = parse_port_ref(e.at("from").get<std::string>());
        edge.to = parse_port_ref(e.at("to").get<std::string>());
        edge.kind = e.value("kind", std::string("pneumatic"));
        graph.edges.push_back(std::move(edge));
    }
    graph.validate();
    return graph;
}

nlohmann::json system_graph_to_json(const SystemGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const GraphNode& n : graph.nodes) {
        nlohmann::json node{{"node_id", n.node_id}, {"name", n.name}};
        if (n.type_id) {
            node["type_id"] = *n.type_id;
        }
        if (n.instance_id) {
            node["instance_id"] = *n.instance_id;
        }
        nodes.push_back(std::move(node));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const GraphEdge& e : graph.edges) {
        edges.push_back({{"from", port_ref_to_string(e.from)},
                         {"to", port_ref_to_string(e.to)},
                         {"kind", e.kind}});
    }
    return {{"nodes", nodes}, {"edges", edges}};
}

SystemGraph load_system_graph(const std::string& path) {
    return system_graph_from_json(read_json_file(path));
}

TranslationTable load_translation_table(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    TranslationTable table;
    for (const auto& [name, type_id] : j.at("mappings").items()) {
        table.name_to_type[name] = type_id.get<std::string>();
    }
    return table;
}

SystemGraph semantify(SystemGraph graph, const TranslationTable& table) {
    graph.validate();
    std::vector<std::string> unresolved;
    for (GraphNode& node : graph.nodes) {
        if (node.type_id) {
            continue; // already semantically unique
        }
        auto it = table.name_to_type.find(node.name);
        if (it == table.name_to_type.end()) {
            unresolved.push_back(node.node_id + " ('" + node.name + "')");
        } else {
            node.type_id = it->second;
        }
    }
    if (!unresolved.empty()) {
        std::string list;
        for (std::size_t i = 0; i < unresolved.size(); ++i) {
            list += (i ? ", " : "") + unresolved[i];
        }
        throw Error(ErrorKind::unresolved_semantics, "no translation for: " + list);
    }
    return graph;
}

bool LibraryTemplate::has_port(const std::string& port) const {
    return std::find(ports.begin(), ports.end(), port) != ports.end();
}

const LibraryTemplate& ModelLibrary::get(const std::string& type_id) const {
    auto it = templates.find(type_id);
    if (it == templates.end()) {
        throw Error(ErrorKind::missing_model, "no library template for '" + type_id + "'");
    }
    return it->second;
}

ModelLibrary load_library(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    ModelLibrary library;
    library.version = j.at("version").get<std::string>();
    for (const auto& t : j.at("templates")) {
        LibraryTemplate tpl;
        tpl.type_id = t.at("type_id").get<std::string>();
        tpl.kind = t.at("kind").get<std::string>();
        tpl.range = range_from_name(t.at("range").get<std::string>());
        for (const auto& p : t.at("ports")) {
            tpl.ports.push_back(p.get<std::string>());
        }
        for (const auto& d : t.at("depths")) {
            tpl.depths.insert(d.get<int>());
        }
        if (t.contains("defaults")) {
            for (const auto& [key, value] : t.at("defaults").items()) {
                tpl.defaults[key] = value.get<double>();
            }
        }
        library.templates[tpl.type_id] = std::move(tpl);
    }
    return library;
}

void DataBasis::add_instance(InstanceRecord record) {
    instances[record.instance_id] = std::move(record);
}

DataBasis load_data_basis(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    DataBasis data;
    data.version = j.at("version").get<std::string>();
    for (const auto& [type_id, params] : j.at("type_parameters").items()) {
        for (const auto& [key, value] : params.items()) {
            data.type_parameters[type_id][key] = value.get<double>();
        }
    }
    if (j.contains("instances")) {
        for (const auto& [instance_id, body] : j.at("instances").items()) {
            InstanceRecord record;
            record.instance_id = instance_id;
            record.type_id = body.at("type_id").get<std::string>();
            for (const auto& [key, value] : body.at("parameter_overrides").items()) {
                record.parameter_overrides[key] = value.get<double>();
            }
            record.usable = body.value("usable", true);
            data.instances[instance_id] = std::move(record);
        }
    }
    if (j.contains("materials")) {
        for (const auto& [type_id, list] : j.at("materials").items()) {
            for (const auto& m : list) {
                data.materials[type_id].push_back(m.get<std::string>());
            }
        }
    }
    return data;
}

namespace {

struct PartedGraph {
    const GraphNode* generator = nullptr;
    const GraphNode* hose = nullptr;
    const GraphNode* cups = nullptr;
    const GraphNode* system = nullptr;
};

std::string edge_label(const GraphEdge& e) {
    return port_ref_to_string(e.from) + " -> " + port_ref_to_string(e.to);
}

} // namespace

ComposedModel compose(const SystemGraph& graph, const ModelLibrary& library, ModelingDepth depth) {
    graph.validate();
    if (graph.nodes.empty()) {
        throw Error(ErrorKind::invalid_parameter, "system graph has no nodes");
    }

    PartedGraph parts;
    for (const GraphNode& node : graph.nodes) {
        if (!node.type_id) {
            throw Error(ErrorKind::unresolved_semantics,
                        "node '" + node.node_id + "' has no type; semantify first");
        }
        const LibraryTemplate& tpl = library.get(*node.type_id);
        if (tpl.depths.count(depth_level(depth)) == 0) {
            throw Error(ErrorKind::missing_model,
                        "template '" + tpl.type_id + "' has no depth-" +
                            std::to_string(depth_level(depth)) + " model");
        }
        if (tpl.kind == "vacuum_generator") {
            if (parts.generator != nullptr) {
                throw Error(ErrorKind::wiring, "more than one vacuum generator in the graph");
            }
            parts.generator = &node;
        } else if (tpl.kind == "hose") {
            if (parts.hose != nullptr) {
                throw Error(ErrorKind::wiring,
                            "chains of more than one hose are not supported by this family");
            }
            parts.hose = &node;
        } else if (tpl.kind == "cup_set") {
            if (parts.cups != nullptr) {
                throw Error(ErrorKind::wiring, "more than one cup set in the graph");
            }
            parts.cups = &node;
        } else if (tpl.kind == "gripper_system") {
            parts.system = &node;
        } else {
            throw Error(ErrorKind::missing_model,
                        "unknown template kind '" + tpl.kind + "' for '" + tpl.type_id + "'");
        }
    }

    // every edge must land on declared ports
    for (const GraphEdge& e : graph.edges) {
        for (const PortRef& ref : {e.from, e.to}) {
            const GraphNode* node = graph.find_node(ref.node_id);
            const LibraryTemplate& tpl = library.get(*node->type_id);
            if (!tpl.has_port(ref.port)) {
                throw Error(ErrorKind::wiring, "edge " + edge_label(e) + ": template '" +
                                                   tpl.type_id + "' has no port '" + ref.port +
                                                   "'");
            }
        }
    }

    ComposedModel model;
    model.depth = depth;
    model.graph = graph;

    if (parts.system != nullptr) {
        if (graph.nodes.size() != 1) {
            throw Error(ErrorKind::wiring,
                        "a gripper_system node must be the only node in the graph");
        }
        const LibraryTemplate& tpl = library.get(*parts.system->type_id);
        model.parameters = tpl.defaults;
        model.asset_type_id = tpl.type_id;
        model.asset_instance_id = parts.system->instance_id;
        model.part_type_ids = {tpl.type_id};
        return model;
    }

    if (parts.generator == nullptr || parts.cups == nullptr) {
        throw Error(ErrorKind::wiring,
                    "the gripper family needs one vacuum generator and one cup set");
    }

    // connectivity: generator -> (hose ->) cups along pneumatic edges
    auto connected = [&](const std::string& a, const std::string& b) {
        return std::any_of(graph.edges.begin(), graph.edges.end(), [&](const GraphEdge& e) {
            return (e.from.node_id == a && e.to.node_id == b) ||
                   (e.from.node_id == b && e.to.node_id == a);
        });
    };
    if (parts.hose != nullptr) {
        if (!connected(parts.generator->node_id, parts.hose->node_id) ||
            !connected(parts.hose->node_id, parts.cups->node_id)) {
            throw Error(ErrorKind::wiring, "generator, hose and cup set are not chained");
        }
    } else if (!connected(parts.generator->node_id, parts.cups->node_id)) {
        throw Error(ErrorKind::wiring, "generator and cup set are not connected");
    }

    // wire the building blocks: merged defaults of the parts form the lumped
    // parameter map of the system model
    model.parameters = library.get(*parts.generator->type_id).defaults;
    if (parts.hose != nullptr) {
        for (const auto& [key, value] : library.get(*parts.hose->type_id).defaults) {
            model.parameters[key] = value;
        }
    } else {
        model.parameters[keys::hose_length_mm] = 0.0;
        model.parameters[keys::hose_inner_diameter_mm] = 0.0;
    }
    for (const auto& [key, value] : library.get(*parts.cups->type_id).defaults) {
        model.parameters[key] = value;
    }

    model.asset_type_id = *parts.generator->type_id;
    model.asset_instance_id = parts.generator->instance_id;
    for (const GraphNode& node : graph.nodes) {
        model.part_type_ids.push_back(*node.type_id);
    }
    return model;
}

ComposedModel parameterize(ComposedModel model, const DataBasis& data, const std::string& id) {
    // type-level parameters for every part of the composition
    for (const std::string& type_id : model.part_type_ids) {
        auto it = data.type_parameters.find(type_id);
        if (it == data.type_parameters.end()) {
            continue; // library defaults stand
        }
        for (const auto& [key, value] : it->second) {
            model.parameters[key] = value;
        }
    }

    auto instance_it = data.instances.find(id);
    if (instance_it != data.instances.end()) {
        const InstanceRecord& record = instance_it->second;
        if (!record.usable) {
            throw Error(ErrorKind::unknown_asset,
                        "instance '" + id + "' is flagged unusable");
        }
        const bool type_in_graph =
            std::find(model.part_type_ids.begin(), model.part_type_ids.end(), record.type_id) !=
            model.part_type_ids.end();
        if (!type_in_graph) {
            throw Error(ErrorKind::unknown_asset,
                        "instance '" + id + "' is a " + record.type_id +
                            ", which is not part of this composition");
        }
        for (const auto& [key, value] : record.parameter_overrides) {
            if (model.parameters.count(key) == 0) {
                throw Error(ErrorKind::invalid_parameter,
                            "instance override '" + key + "' is not a model parameter");
            }
            model.parameters[key] = value;
        }
        model.asset_instance_id = record.instance_id;
        model.asset_type_id = record.type_id;
    } else {
        const bool known_type =
            std::find(model.part_type_ids.begin(), model.part_type_ids.end(), id) !=
            model.part_type_ids.end();
        if (!known_type) {
            throw Error(ErrorKind::unknown_asset,
                        "'" + id + "' is neither a composed type nor a known instance");
        }
        model.asset_type_id = id;
        model.asset_instance_id.reset();
    }
    model.parameterized = true;
    return model;
}

std::unique_ptr<BehaviorModel> instantiate(const ComposedModel& model,
                                           const std::string& model_id) {
    return make_gripper_model(model.depth, model.parameters, model_id);
}

namespace {

std::string package_timestamp() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

[[noreturn]] void malformed(const std::string& path, const std::string& json_path,
                            const std::string& what) {
    throw Error(ErrorKind::malformed_package, path + ": " + json_path + ": " + what);
}

} // namespace

TwinPackage build_twin_package(const ComposedModel& model, const std::vector<int>& depths,
                               const std::string& twin_id, const ModelLibrary& library,
                               const DataBasis& data) {
    if (!model.parameterized) {
        throw Error(ErrorKind::invalid_parameter, "parameterize the model before packaging");
    }
    if (depths.empty()) {
        throw Error(ErrorKind::invalid_parameter, "package needs at least one depth");
    }
    TwinPackage package;
    package.twin_id = twin_id;
    package.asset_type_id = model.asset_type_id;
    package.asset_instance_id = model.asset_instance_id;
    package.graph = model.graph;
    for (int level : depths) {
        auto instance = make_gripper_model(depth_from_level(level), model.parameters,
                                           twin_id + "/d" + std::to_string(level));
        package.depth_parameters[level] = instance->parameters();
        package.depth_metadata[level] = instance->metadata();
    }
    std::set<std::string> materials;
    for (const std::string& type_id : model.part_type_ids) {
        auto it = data.materials.find(type_id);
        if (it != data.materials.end()) {
            materials.insert(it->second.begin(), it->second.end());
        }
    }
    package.materials.assign(materials.begin(), materials.end());
    package.library_version = library.version;
    package.data_basis_version = data.version;
    package.created = package_timestamp();
    return package;
}

void export_package(const TwinPackage& package, const std::string& path) {
    nlohmann::json depths = nlohmann::json::array();
    for (const auto& [level, params] : package.depth_parameters) {
        nlohmann::json md;
        to_json(md, package.depth_metadata.at(level));
        depths.push_back({{"depth", level}, {"metadata", md}, {"parameters", params}});
    }
    nlohmann::json asset{{"type_id", package.asset_type_id}};
    if (package.asset_instance_id) {
        asset["instance_id"] = *package.asset_instance_id;
    }
    const nlohmann::json j{
        {"schema_version", package.schema_version},
        {"twin_id", package.twin_id},
        {"asset", asset},
        {"depths", depths},
        {"graph", system_graph_to_json(package.graph)},
        {"materials", package.materials},
        {"provenance",
         {{"library_version", package.library_version},
          {"data_basis_version", package.data_basis_version},
          {"created", package.created}}},
    };
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write '" + path + "'");
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw Error(ErrorKind::io, "failed writing '" + path + "'");
    }
}

TwinPackage read_package(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    TwinPackage package;

    if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer()) {
        malformed(path, "/schema_version", "missing or not an integer");
    }
    package.schema_version = j.at("schema_version").get<int>();
    if (package.schema_version != 1) {
        malformed(path, "/schema_version",
                  "unsupported version " + std::to_string(package.schema_version));
    }
    if (!j.contains("twin_id") || !j.at("twin_id").is_string()) {
        malformed(path, "/twin_id", "missing or not a string");
    }
    package.twin_id = j.at("twin_id").get<std::string>();
    if (!j.contains("asset") || !j.at("asset").contains("type_id")) {
        malformed(path, "/asset/type_id", "missing");
    }
    package.asset_type_id = j.at("asset").at("type_id").get<std::string>();
    if (j.at("asset").contains("instance_id")) {
        package.asset_instance_id = j.at("asset").at("instance_id").get<std::string>();
    }
    if (!j.contains("depths") || !j.at("depths").is_array() || j.at("depths").empty()) {
        malformed(path, "/depths", "missing or empty");
    }
    std::size_t index = 0;
    for (const auto& entry : j.at("depths")) {
        const std::string base = "/depths/" + std::to_string(index);
        if (!entry.contains("depth") || !entry.at("depth").is_number_integer()) {
            malformed(path, base + "/depth", "missing or not an integer");
        }
        const int level = entry.at("depth").get<int>();
        if (!entry.contains("parameters") || !entry.at("parameters").is_object()) {
            malformed(path, base + "/parameters", "missing or not an object");
        }
        if (!entry.contains("metadata") || !entry.at("metadata").is_object()) {
            malformed(path, base + "/metadata", "missing or not an object");
        }
        std::map<std::string, double> params;
        for (const auto& [key, value] : entry.at("parameters").items()) {
            if (!value.is_number()) {
                malformed(path, base + "/parameters/" + key, "not a number");
            }
            params[key] = value.get<double>();
        }
        ModelMetadata md;
        try {
            from_json(entry.at("metadata"), md);
        } catch (const std::exception& e) {
            malformed(path, base + "/metadata", e.what());
        }
        package.depth_parameters[level] = std::move(params);
        package.depth_metadata[level] = std::move(md);
        ++index;
    }
    if (!j.contains("graph")) {
        malformed(path, "/graph", "missing");
    }
    try {
        package.graph = system_graph_from_json(j.at("graph"));
    } catch (const std::exception& e) {
        malformed(path, "/graph", e.what());
    }
    if (!j.contains("materials") || !j.at("materials").is_array()) {
        malformed(path, "/materials", "missing or not an array");
    }
    for (const auto& m : j.at("materials")) {
        package.materials.push_back(m.get<std::string>());
    }
    if (!j.contains("provenance")) {
        malformed(path, "/provenance", "missing");
    }
    const auto& prov = j.at("provenance");
    for (const char* field : {"library_version", "data_basis_version", "created"}) {
        if (!prov.contains(field) || !prov.at(field).is_string()) {
            malformed(path, std::string("/provenance/") + field, "missing or not a string");
        }
    }
    package.library_version = prov.at("library_version").get<std::string>();
    package.data_basis_version = prov.at("data_basis_version").get<std::string>();
    package.created = prov.at("created").get<std::string>();
    return package;
}

std::unique_ptr<BehaviorModel> instantiate_package_depth(const TwinPackage& package, int depth) {
    auto it = package.depth_parameters.find(depth);
    if (it == package.depth_parameters.end()) {
        throw Error(ErrorKind::missing_model,
                    package.twin_id + " has no depth-" + std::to_string(depth) + " model");
    }
    return make_gripper_model(depth_from_level(depth), it->second,
                              package.twin_id + "/d" + std::to_string(depth));
}

TwinPackage import_package(const std::string& path, ModelPool& pool) {
    TwinPackage package = read_package(path);
    for (const auto& [level, params] : package.depth_parameters) {
        PoolEntry entry;
        entry.metadata = package.depth_metadata.at(level);
        const auto params_copy = params;
        const auto depth = depth_from_level(level);
        const std::string model_id = entry.metadata.model_id;
        entry.factory = [params_copy, depth, model_id] {
            return make_gripper_model(depth, params_copy, model_id);
        };
        pool.add(std::move(entry));
    }
    return package;
}

} // namespace twinforge
