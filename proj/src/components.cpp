#include "twinforge/components.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace twinforge {

void ProcessParams::validate() const {
    if (object_mass_kg < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "object mass must be >= 0");
    }
    if (acceleration_m_s2 < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "acceleration must be >= 0");
    }
    if (safety_factor < 1.0) {
        throw Error(ErrorKind::invalid_parameter, "safety factor must be >= 1");
    }
    if (!(friction_coeff > 0.0) || friction_coeff > 1.0) {
        throw Error(ErrorKind::invalid_parameter, "friction coefficient must be in (0,1]");
    }
    if (!(gravity_m_s2 > 0.0) || !(max_cycle_time_s > 0.0) || !(robot_payload_kg > 0.0)) {
        throw Error(ErrorKind::invalid_parameter,
                    "gravity, max cycle time and robot payload must be > 0");
    }
}

void VacuumGenerator::validate() const {
    if (type_id.empty()) {
        throw Error(ErrorKind::invalid_parameter, "generator type_id must not be empty");
    }
    if (!(max_suction_capacity_lpm > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, type_id + ": Q_max must be > 0");
    }
    if (!(max_vacuum_mbar > 0.0) || max_vacuum_mbar > constants::p_atm_mbar) {
        throw Error(ErrorKind::invalid_parameter,
                    type_id + ": max vacuum must be in (0, 1013] mbar");
    }
    if (power_source == PowerSource::electric && !(rated_power_w > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, type_id + ": electric rated power must be > 0");
    }
    if (power_source == PowerSource::pneumatic && !(air_consumption_lpm > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, type_id + ": air consumption must be > 0");
    }
}

void Hose::validate() const {
    if (!(length_mm > 0.0) || !(inner_diameter_mm > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "hose length and inner diameter must be > 0");
    }
}

void SuctionCupSet::validate() const {
    if (!(diameter_mm > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "cup diameter must be > 0");
    }
    if (count < 1) {
        throw Error(ErrorKind::invalid_parameter, "cup count must be >= 1");
    }
    if (dead_volume_per_cup_cm3 < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "cup dead volume must be >= 0");
    }
}

void GrippingAssembly::validate() const {
    generator.validate();
    hose.validate();
    cups.validate();
}

void ThresholdConfig::validate() const {
    if (!(h1_mbar > h2_mbar)) {
        throw Error(ErrorKind::invalid_parameter, "threshold H1 must be greater than H2");
    }
    if (!(h1_hysteresis_mbar > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "hysteresis h1 must be > 0");
    }
    if (!(h1_mbar - h1_hysteresis_mbar > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "H1 - h1 must stay above zero");
    }
}

ThresholdPolicy threshold_policy_from_name(const std::string& name) {
    if (name == "plus20") {
        return ThresholdPolicy::plus20;
    }
    if (name == "plus100") {
        return ThresholdPolicy::plus100;
    }
    throw Error(ErrorKind::invalid_parameter, "unknown threshold policy '" + name + "'");
}

const char* threshold_policy_name(ThresholdPolicy p) {
    return p == ThresholdPolicy::plus20 ? "plus20" : "plus100";
}

double holding_force_n(const ProcessParams& p) {
    if (!(p.friction_coeff > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "friction coefficient must be > 0");
    }
    return (p.gravity_m_s2 + p.acceleration_m_s2) * p.object_mass_kg * p.safety_factor /
           p.friction_coeff;
}

double required_vacuum_mbar(const ProcessParams& p, const SuctionCupSet& cups) {
    cups.validate();
    const double force = holding_force_n(p);
    const double radius_m = cups.diameter_mm * 1e-3 / 2.0;
    const double area_m2 = static_cast<double>(cups.count) * std::numbers::pi * radius_m * radius_m;
    return force / area_m2 / constants::mbar_to_pa;
}

ThresholdConfig thresholds_for(double required_mbar, const VacuumGenerator& gen,
                               ThresholdPolicy policy) {
    if (required_mbar >= gen.max_vacuum_mbar) {
        throw Error(ErrorKind::generator_infeasible,
                    gen.type_id + " cannot reach " + std::to_string(required_mbar) + " mbar (max " +
                        std::to_string(gen.max_vacuum_mbar) + ")");
    }
    ThresholdConfig cfg;
    cfg.h2_mbar = std::ceil(required_mbar);
    cfg.h1_mbar = cfg.h2_mbar + (policy == ThresholdPolicy::plus20 ? 20.0 : 100.0);
    cfg.h1_hysteresis_mbar = constants::default_h1_hysteresis_mbar;
    cfg.validate();
    return cfg;
}

double system_volume_m3(const GrippingAssembly& assembly) {
    const double radius_m = assembly.hose.inner_diameter_mm * 1e-3 / 2.0;
    const double hose_m3 = std::numbers::pi * radius_m * radius_m * assembly.hose.length_mm * 1e-3;
    const double cups_m3 =
        static_cast<double>(assembly.cups.count) * assembly.cups.dead_volume_per_cup_cm3 * 1e-6;
    return hose_m3 + cups_m3;
}

const char* placement_name(Placement p) {
    switch (p) {
    case Placement::on_gripper: return "on-gripper";
    case Placement::beside_robot: return "beside-robot";
    case Placement::infeasible: return "infeasible";
    }
    return "unknown";
}

Placement placement_check(const GrippingAssembly& assembly, const ProcessParams& p) {
    const double carried_kg = assembly.generator.weight_g * 1e-3 + p.object_mass_kg;
    if (carried_kg <= p.robot_payload_kg) {
        return Placement::on_gripper;
    }
    if (assembly.generator.positioning == Positioning::beside_robot) {
        return Placement::beside_robot;
    }
    return Placement::infeasible;
}

const VacuumGenerator& ComponentCatalog::find(const std::string& type_id) const {
    auto it = std::find_if(generators.begin(), generators.end(),
                           [&](const VacuumGenerator& g) { return g.type_id == type_id; });
    if (it == generators.end()) {
        throw Error(ErrorKind::unknown_asset, "no generator '" + type_id + "' in catalog");
    }
    return *it;
}

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

void to_json(nlohmann::json& j, const VacuumGenerator& g) {
    j = nlohmann::json{
        {"type_id", g.type_id},
        {"max_suction_capacity_lpm", g.max_suction_capacity_lpm},
        {"max_vacuum_mbar", g.max_vacuum_mbar},
        {"power_source", g.power_source == PowerSource::electric ? "electric" : "pneumatic"},
        {"drop_off", g.drop_off == DropOffPrinciple::valve ? "valve" : "blow-off"},
        {"cost_eur", g.cost_eur},
        {"weight_g", g.weight_g},
        {"positioning",
         g.positioning == Positioning::on_gripper ? "on-gripper" : "beside-robot"},
        {"threshold_policy", g.threshold_policy},
    };
    if (g.power_source == PowerSource::electric) {
        j["rated_power_w"] = g.rated_power_w;
    } else {
        j["air_consumption_lpm"] = g.air_consumption_lpm;
    }
}

void from_json(const nlohmann::json& j, VacuumGenerator& g) {
    g.type_id = j.at("type_id").get<std::string>();
    g.max_suction_capacity_lpm = j.at("max_suction_capacity_lpm").get<double>();
    g.max_vacuum_mbar = j.at("max_vacuum_mbar").get<double>();
    const auto source = j.at("power_source").get<std::string>();
    if (source == "electric") {
        g.power_source = PowerSource::electric;
        g.rated_power_w = j.at("rated_power_w").get<double>();
        g.air_consumption_lpm = 0.0;
    } else if (source == "pneumatic") {
        g.power_source = PowerSource::pneumatic;
        g.air_consumption_lpm = j.at("air_consumption_lpm").get<double>();
        g.rated_power_w = 0.0;
    } else {
        throw Error(ErrorKind::invalid_parameter, "unknown power source '" + source + "'");
    }
    const auto drop = j.at("drop_off").get<std::string>();
    if (drop == "valve") {
        g.drop_off = DropOffPrinciple::valve;
    } else if (drop == "blow-off") {
        g.drop_off = DropOffPrinciple::blow_off;
    } else {
        throw Error(ErrorKind::invalid_parameter, "unknown drop-off principle '" + drop + "'");
    }
    g.cost_eur = j.at("cost_eur").get<double>();
    g.weight_g = j.at("weight_g").get<double>();
    const auto pos = j.at("positioning").get<std::string>();
    if (pos == "on-gripper") {
        g.positioning = Positioning::on_gripper;
    } else if (pos == "beside-robot") {
        g.positioning = Positioning::beside_robot;
    } else {
        throw Error(ErrorKind::invalid_parameter, "unknown positioning '" + pos + "'");
    }
    g.threshold_policy = j.value("threshold_policy", std::string("plus100"));
    g.validate();
}

void to_json(nlohmann::json& j, const ProcessParams& p) {
    j = nlohmann::json{
        {"object_mass_kg", p.object_mass_kg},
        {"acceleration_m_s2", p.acceleration_m_s2},
        {"safety_factor", p.safety_factor},
        {"friction_coeff", p.friction_coeff},
        {"gravity_m_s2", p.gravity_m_s2},
        {"max_cycle_time_s", p.max_cycle_time_s},
        {"robot_payload_kg", p.robot_payload_kg},
    };
}

void from_json(const nlohmann::json& j, ProcessParams& p) {
    p.object_mass_kg = j.at("object_mass_kg").get<double>();
    p.acceleration_m_s2 = j.at("acceleration_m_s2").get<double>();
    p.safety_factor = j.at("safety_factor").get<double>();
    p.friction_coeff = j.at("friction_coeff").get<double>();
    p.gravity_m_s2 = j.value("gravity_m_s2", 9.81);
    p.max_cycle_time_s = j.at("max_cycle_time_s").get<double>();
    p.robot_payload_kg = j.at("robot_payload_kg").get<double>();
    p.validate();
}

ComponentCatalog load_catalog(const std::string& path) {
    const nlohmann::json j = read_json_file(path);
    ComponentCatalog catalog;
    for (const auto& g : j.at("generators")) {
        catalog.generators.push_back(g.get<VacuumGenerator>());
    }
    const auto& hose = j.at("default_hose");
    catalog.default_hose.length_mm = hose.at("length_mm").get<double>();
    catalog.default_hose.inner_diameter_mm = hose.at("inner_diameter_mm").get<double>();
    catalog.default_hose.validate();
    const auto& cups = j.at("default_cups");
    catalog.default_cups.diameter_mm = cups.at("diameter_mm").get<double>();
    catalog.default_cups.count = cups.at("count").get<int>();
    catalog.default_cups.dead_volume_per_cup_cm3 =
        cups.value("dead_volume_per_cup_cm3", constants::default_cup_dead_volume_cm3);
    catalog.default_cups.validate();
    return catalog;
}

ProcessParams load_process_params(const std::string& path) {
    return read_json_file(path).get<ProcessParams>();
}

} // namespace twinforge
