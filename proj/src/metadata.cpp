#include "twinforge/metadata.hpp"

#include <json.hpp>

#include <algorithm>

namespace twinforge {

int depth_level(ModelingDepth depth) { return static_cast<int>(depth); }

ModelingDepth depth_from_level(int level) {
    if (level < 1 || level > 5) {
        throw Error(ErrorKind::invalid_parameter,
                    "modeling depth level must be in 1..5, got " + std::to_string(level));
    }
    return static_cast<ModelingDepth>(level);
}

const char* depth_name(ModelingDepth depth) {
    switch (depth) {
    case ModelingDepth::discrete: return "discrete";
    case ModelingDepth::discrete_temporal: return "discrete-temporal";
    case ModelingDepth::continuous_simplified: return "continuous-simplified-physical";
    case ModelingDepth::physical_non_spatial: return "physical-non-spatial";
    case ModelingDepth::physical_spatial: return "physical-spatial";
    }
    return "unknown";
}

const char* discipline_name(Discipline d) {
    switch (d) {
    case Discipline::mechanical: return "mechanical";
    case Discipline::electrical: return "electrical";
    case Discipline::software: return "software";
    case Discipline::fluidic: return "fluidic";
    case Discipline::thermal: return "thermal";
    case Discipline::magnetic: return "magnetic";
    case Discipline::other: return "other";
    }
    return "unknown";
}

Discipline discipline_from_name(const std::string& name) {
    for (Discipline d : {Discipline::mechanical, Discipline::electrical, Discipline::software,
                         Discipline::fluidic, Discipline::thermal, Discipline::magnetic,
                         Discipline::other}) {
        if (name == discipline_name(d)) {
            return d;
        }
    }
    throw Error(ErrorKind::invalid_parameter, "unknown discipline '" + name + "'");
}

const char* range_name(ModelingRange r) {
    switch (r) {
    case ModelingRange::basic_physical_principle: return "basic-physical-principle";
    case ModelingRange::building_block: return "building-block";
    case ModelingRange::component: return "component";
    case ModelingRange::system: return "system";
    case ModelingRange::field_device: return "field-device";
    case ModelingRange::control_device: return "control-device";
    case ModelingRange::station: return "station";
    }
    return "unknown";
}

ModelingRange range_from_name(const std::string& name) {
    for (ModelingRange r :
         {ModelingRange::basic_physical_principle, ModelingRange::building_block,
          ModelingRange::component, ModelingRange::system, ModelingRange::field_device,
          ModelingRange::control_device, ModelingRange::station}) {
        if (name == range_name(r)) {
            return r;
        }
    }
    throw Error(ErrorKind::invalid_parameter, "unknown modeling range '" + name + "'");
}

const char* behavior_name(BehaviorKind b) {
    return b == BehaviorKind::ideal ? "ideal" : "error-prone";
}

BehaviorKind behavior_from_name(const std::string& name) {
    if (name == "ideal") {
        return BehaviorKind::ideal;
    }
    if (name == "error-prone") {
        return BehaviorKind::error_prone;
    }
    throw Error(ErrorKind::invalid_parameter, "unknown behavior kind '" + name + "'");
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::generator_infeasible: return "generator-infeasible";
    case ErrorKind::numerical_divergence: return "numerical-divergence";
    case ErrorKind::invalid_trace: return "invalid-trace";
    case ErrorKind::incomparable_traces: return "incomparable-traces";
    case ErrorKind::unresolved_semantics: return "unresolved-semantics";
    case ErrorKind::missing_model: return "missing-model";
    case ErrorKind::wiring: return "wiring";
    case ErrorKind::unknown_asset: return "unknown-asset";
    case ErrorKind::malformed_package: return "malformed-package";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
    }
    return "error";
}

void ModelMetadata::validate() const {
    if (model_id.empty()) {
        throw Error(ErrorKind::invalid_parameter, "model_id must not be empty");
    }
    for (const auto& p : free_parameters) {
        if (!(p.lower <= p.upper)) {
            throw Error(ErrorKind::invalid_parameter,
                        "free parameter '" + p.name + "' has lower > upper");
        }
    }
    if (behavior == BehaviorKind::error_prone && free_parameters.empty()) {
        throw Error(ErrorKind::invalid_parameter,
                    "error-prone model '" + model_id + "' must expose a fault parameter");
    }
    if (runtime_class < 1) {
        throw Error(ErrorKind::invalid_parameter, "runtime_class must be >= 1");
    }
}

const FreeParameter* ModelMetadata::find_free_parameter(const std::string& name) const {
    auto it = std::find_if(free_parameters.begin(), free_parameters.end(),
                           [&](const FreeParameter& p) { return p.name == name; });
    return it == free_parameters.end() ? nullptr : &*it;
}

bool matches(const MetadataQuery& query, const ModelMetadata& md) {
    const int level = depth_level(md.depth);
    if (query.min_depth && level < *query.min_depth) {
        return false;
    }
    if (query.max_depth && level > *query.max_depth) {
        return false;
    }
    for (Discipline d : query.disciplines) {
        if (md.disciplines.count(d) == 0) {
            return false;
        }
    }
    if (query.behavior && md.behavior != *query.behavior) {
        return false;
    }
    if (query.max_runtime_class && md.runtime_class > *query.max_runtime_class) {
        return false;
    }
    return true;
}

void to_json(nlohmann::json& j, const ModelMetadata& md) {
    j = nlohmann::json::object();
    j["model_id"] = md.model_id;
    j["depth"] = depth_level(md.depth);
    auto disciplines = nlohmann::json::array();
    for (Discipline d : md.disciplines) {
        disciplines.push_back(discipline_name(d));
    }
    j["disciplines"] = disciplines;
    j["range"] = range_name(md.range);
    j["behavior"] = behavior_name(md.behavior);
    auto params = nlohmann::json::array();
    for (const auto& p : md.free_parameters) {
        params.push_back({{"name", p.name}, {"unit", p.unit}, {"lower", p.lower}, {"upper", p.upper}});
    }
    j["free_parameters"] = params;
    j["validity"] = md.validity;
    j["runtime_class"] = md.runtime_class;
}

void from_json(const nlohmann::json& j, ModelMetadata& md) {
    md.model_id = j.at("model_id").get<std::string>();
    md.depth = depth_from_level(j.at("depth").get<int>());
    md.disciplines.clear();
    for (const auto& d : j.at("disciplines")) {
        md.disciplines.insert(discipline_from_name(d.get<std::string>()));
    }
    md.range = range_from_name(j.at("range").get<std::string>());
    md.behavior = behavior_from_name(j.at("behavior").get<std::string>());
    md.free_parameters.clear();
    for (const auto& p : j.at("free_parameters")) {
        md.free_parameters.push_back(FreeParameter{
            p.at("name").get<std::string>(),
            p.at("unit").get<std::string>(),
            p.at("lower").get<double>(),
            p.at("upper").get<double>(),
        });
    }
    md.validity = j.value("validity", std::string{});
    md.runtime_class = j.at("runtime_class").get<int>();
    md.validate();
}

} // namespace twinforge
