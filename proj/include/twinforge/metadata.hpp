#pragma once

#include "twinforge/errors.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace twinforge {

/// Fidelity level of a behavior model. Level 5 is representable but the
/// shipped library tops out at level 4.
enum class ModelingDepth : int {
    discrete = 1,
    discrete_temporal = 2,
    continuous_simplified = 3,
    physical_non_spatial = 4,
    physical_spatial = 5,
};

enum class Discipline {
    mechanical,
    electrical,
    software,
    fluidic,
    thermal,
    magnetic,
    other,
};

/// Structural scope of a model. The first four form the ordered library
/// substructure (variance increases from principle to system).
enum class ModelingRange {
    basic_physical_principle,
    building_block,
    component,
    system,
    field_device,
    control_device,
    station,
};

enum class BehaviorKind { ideal, error_prone };

int depth_level(ModelingDepth depth);
ModelingDepth depth_from_level(int level);
const char* depth_name(ModelingDepth depth);
const char* discipline_name(Discipline d);
Discipline discipline_from_name(const std::string& name);
const char* range_name(ModelingRange r);
ModelingRange range_from_name(const std::string& name);
const char* behavior_name(BehaviorKind b);
BehaviorKind behavior_from_name(const std::string& name);

/// A tunable parameter a model exposes for fitting, with physical bounds.
struct FreeParameter {
    std::string name;
    std::string unit;
    double lower = 0.0;
    double upper = 0.0;
};

struct ModelMetadata {
    std::string model_id;
    ModelingDepth depth = ModelingDepth::discrete;
    std::set<Discipline> disciplines;
    ModelingRange range = ModelingRange::system;
    BehaviorKind behavior = BehaviorKind::ideal;
    std::vector<FreeParameter> free_parameters;
    std::string validity;
    int runtime_class = 1; // ordinal cost hint, 1 cheapest

    /// Throws Error(invalid_parameter) on violated invariants.
    void validate() const;

    [[nodiscard]] const FreeParameter* find_free_parameter(const std::string& name) const;
};

/// Pool-filtering predicate. Every field left empty/unset is unconstrained,
/// so relaxing a query can only grow its match set.
struct MetadataQuery {
    std::optional<int> min_depth;
    std::optional<int> max_depth;
    std::set<Discipline> disciplines; // md must cover all of these
    std::optional<BehaviorKind> behavior;
    std::optional<int> max_runtime_class;
};

bool matches(const MetadataQuery& query, const ModelMetadata& md);

void to_json(nlohmann::json& j, const ModelMetadata& md);
void from_json(const nlohmann::json& j, ModelMetadata& md);

} // namespace twinforge
