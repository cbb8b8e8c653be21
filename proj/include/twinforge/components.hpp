#pragma once

#include "twinforge/errors.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinforge {

/// Shared physical constants. Vacuum is relative Δp in mbar everywhere
/// (0 = atmospheric).
namespace constants {
inline constexpr double p_atm_mbar = 1013.0;
inline constexpr double mbar_to_pa = 100.0;
inline constexpr double rho_air_kg_m3 = 1.2;
inline constexpr double orifice_cd = 0.6;
inline constexpr double mu_air_pa_s = 1.8e-5;          // dynamic viscosity, hose conductance
inline constexpr double e_air_kwh_per_nm3 = 0.12;      // specific energy of compressed air
inline constexpr double standby_power_w = 0.2;         // electric generator idle electronics
inline constexpr double tau_blow_s = 0.02;             // blow-off venting time constant
inline constexpr double default_h1_hysteresis_mbar = 10.0;
inline constexpr double default_cup_dead_volume_cm3 = 1.0;
inline constexpr double lpm_to_m3s = 1.0 / 60000.0;
} // namespace constants

/// Handling task description (object, motion, robot limits).
struct ProcessParams {
    double object_mass_kg = 0.0;
    double acceleration_m_s2 = 0.0;
    double safety_factor = 1.0;
    double friction_coeff = 1.0;
    double gravity_m_s2 = 9.81;
    double max_cycle_time_s = 0.8;
    double robot_payload_kg = 0.0;

    void validate() const;
};

enum class PowerSource { electric, pneumatic };
enum class DropOffPrinciple { valve, blow_off };
enum class Positioning { on_gripper, beside_robot };

struct VacuumGenerator {
    std::string type_id;
    double max_suction_capacity_lpm = 0.0; // volumetric at zero vacuum
    double max_vacuum_mbar = 0.0;          // relative
    PowerSource power_source = PowerSource::electric;
    double rated_power_w = 0.0;            // electric generators
    double air_consumption_lpm = 0.0;      // pneumatic generators
    DropOffPrinciple drop_off = DropOffPrinciple::valve;
    double cost_eur = 0.0;
    double weight_g = 0.0;
    Positioning positioning = Positioning::on_gripper;
    /// H1 policy used when sizing thresholds for this generator.
    std::string threshold_policy = "plus100";

    void validate() const;
};

struct Hose {
    double length_mm = 0.0;
    double inner_diameter_mm = 0.0;

    void validate() const;
};

struct SuctionCupSet {
    double diameter_mm = 0.0;
    int count = 1;
    double dead_volume_per_cup_cm3 = constants::default_cup_dead_volume_cm3;

    void validate() const;
};

struct GrippingAssembly {
    VacuumGenerator generator;
    Hose hose;
    SuctionCupSet cups;

    void validate() const;
};

/// Switching thresholds of the generator's vacuum control (Fig. 16 semantics):
/// H2 = part present, H1 = in control range, h1 = hysteresis below H1.
struct ThresholdConfig {
    double h2_mbar = 0.0;
    double h1_mbar = 0.0;
    double h1_hysteresis_mbar = constants::default_h1_hysteresis_mbar;

    void validate() const;
};

/// Measured per-unit parameter overrides (end-of-line data, UC3).
struct InstanceRecord {
    std::string instance_id;
    std::string type_id;
    std::map<std::string, double> parameter_overrides;
    bool usable = true;
};

enum class ThresholdPolicy { plus20, plus100 };
ThresholdPolicy threshold_policy_from_name(const std::string& name);
const char* threshold_policy_name(ThresholdPolicy p);

/// Required holding force F_H = (g + a) * m_o * S / mu.
double holding_force_n(const ProcessParams& p);

/// Required relative vacuum in mbar: F_H spread over n cup areas.
double required_vacuum_mbar(const ProcessParams& p, const SuctionCupSet& cups);

/// Integer-mbar switching thresholds for a required vacuum on a generator.
ThresholdConfig thresholds_for(double required_mbar, const VacuumGenerator& gen,
                               ThresholdPolicy policy);

/// Evacuated system volume: hose cylinder plus cup dead volumes, in m^3.
double system_volume_m3(const GrippingAssembly& assembly);

enum class Placement { on_gripper, beside_robot, infeasible };
const char* placement_name(Placement p);

Placement placement_check(const GrippingAssembly& assembly, const ProcessParams& p);

/// Catalog of candidate generators plus the default assembly template.
struct ComponentCatalog {
    std::vector<VacuumGenerator> generators;
    Hose default_hose;
    SuctionCupSet default_cups;

    [[nodiscard]] const VacuumGenerator& find(const std::string& type_id) const;
};

ComponentCatalog load_catalog(const std::string& path);
ProcessParams load_process_params(const std::string& path);

void to_json(nlohmann::json& j, const VacuumGenerator& g);
void from_json(const nlohmann::json& j, VacuumGenerator& g);
void to_json(nlohmann::json& j, const ProcessParams& p);
void from_json(const nlohmann::json& j, ProcessParams& p);

} // namespace twinforge
