#pragma once

#include "twinforge/components.hpp"
#include "twinforge/metadata.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace twinforge {

/// Cyclic inputs of the gripping system.
struct SignalInputs {
    bool suction = false;
    bool blow_off = false;

    bool operator==(const SignalInputs&) const = default;
};

/// One sample of all cyclic and non-cyclic signals.
struct SignalFrame {
    double t_s = 0.0;
    bool suction = false;
    bool blow_off = false;
    bool part_present_h2 = false;
    bool in_control_h1 = false;
    double vacuum_mbar = 0.0;
    double power_w = 0.0;
};

// --- Building-block functions (library level: basic physical principles) ---

/// Linear pump characteristic: Q_max at zero vacuum, zero at max vacuum.
double pump_flow_m3s(double dp_mbar, double q_max_lpm, double dp_max_mbar);

/// Orifice leak flow through a worn suction lip of effective diameter d_leak.
double leak_flow_m3s(double dp_mbar, double d_leak_mm);

/// Laminar hose conductance in m^3/s per mbar of pressure drop.
double hose_conductance_m3s_per_mbar(double length_mm, double inner_diameter_mm);

/// Depth-3 evacuation law: dp_max * (1 - exp(-t / tau)).
double d3_vacuum_mbar(double t_since_suction_s, double tau_s, double dp_max_mbar);

/// Air-saving control state shared by depths 3 and 4.
struct ControlState {
    bool pump_active = false;
    bool in_control = false;
};

/// Hysteresis switching: pump stops at H1, restarts below H1 - h1;
/// in-control latches at H1 and unlatches below H1 - h1.
ControlState control_update(ControlState s, bool suction_commanded, double dp_mbar,
                            const ThresholdConfig& th);

// --- Lumped gripper parameters -----------------------------------------

/// Canonical parameter keys for gripper models. Every model of the family is
/// fully described by a named value map using these keys, so hand-built and
/// library-composed instances share one construction path.
namespace keys {
inline constexpr const char* q_max_lpm = "q_max_lpm";
inline constexpr const char* dp_max_mbar = "dp_max_mbar";
inline constexpr const char* power_source = "power_source"; // 0 electric, 1 pneumatic
inline constexpr const char* rated_power_w = "rated_power_w";
inline constexpr const char* air_consumption_lpm = "air_consumption_lpm";
inline constexpr const char* drop_off = "drop_off"; // 0 valve, 1 blow-off
inline constexpr const char* standby_power_w = "standby_power_w";
inline constexpr const char* e_air_kwh_per_nm3 = "e_air_kwh_per_nm3";
inline constexpr const char* hose_length_mm = "hose_length_mm";
inline constexpr const char* hose_inner_diameter_mm = "hose_inner_diameter_mm";
inline constexpr const char* cup_diameter_mm = "cup_diameter_mm";
inline constexpr const char* cup_count = "cup_count";
inline constexpr const char* cup_dead_volume_cm3 = "cup_dead_volume_cm3";
inline constexpr const char* extra_volume_m3 = "extra_volume_m3";
inline constexpr const char* h2_mbar = "h2_mbar";
inline constexpr const char* h1_mbar = "h1_mbar";
inline constexpr const char* h1_hyst_mbar = "h1_hyst_mbar";
inline constexpr const char* tau_blow_s = "tau_blow_s";
// depth 2
inline constexpr const char* t_evac_s = "t_evac_s";
inline constexpr const char* dt_h1_s = "dt_h1_s";
inline constexpr const char* t_blow_s = "t_blow_s";
// depth 3
inline constexpr const char* tau_s = "tau_s";
// depth 4
inline constexpr const char* d_leak_mm = "d_leak_mm";
inline constexpr const char* q_max_scale = "q_max_scale";
} // namespace keys

/// Derived numeric core used by the continuous depths and the plant emulator.
struct GripperCore {
    double volume_m3 = 0.0;
    double q_max_m3s = 0.0;   // catalog capacity
    double q_eff_m3s = 0.0;   // hose-attenuated effective capacity
    double dp_max_mbar = 0.0;
    double tau_s = 0.0;       // nominal evacuation time constant
    ThresholdConfig thresholds;
    PowerSource power_source = PowerSource::electric;
    DropOffPrinciple drop_off = DropOffPrinciple::valve;
    double p_active_w = 0.0;  // input power while evacuating (or air equivalent)
    double standby_w = 0.0;
    double tau_blow_s = constants::tau_blow_s;

    [[nodiscard]] double power_w(bool suction, bool blow, bool pump_active) const;
};

GripperCore derive_gripper_core(const std::map<std::string, double>& params);

/// Named value map for an assembly plus thresholds; the single source all
/// gripper model constructions go through.
std::map<std::string, double> gripper_param_map(const GrippingAssembly& assembly,
                                                const ThresholdConfig& thresholds);

/// Rate of change of the depth-4 lumped vacuum balance, mbar/s.
double d4_rate_mbar_s(const GripperCore& core, double dp_mbar, double d_leak_mm,
                      double q_max_scale, bool suction, bool blow, bool pump_active);

// --- Steppable model interface ------------------------------------------

/// Time-varying leak override used by the plant emulator; nullptr means the
/// model's own d_leak parameter applies.
using LeakSchedule = std::function<double(double t_s)>;

class BehaviorModel {
  public:
    virtual ~BehaviorModel() = default;

    [[nodiscard]] const ModelMetadata& metadata() const { return meta_; }
    [[nodiscard]] const std::map<std::string, double>& parameters() const { return params_; }
    [[nodiscard]] double parameter(const std::string& name) const;
    void set_parameter(const std::string& name, double value);
    void set_parameters(const std::map<std::string, double>& values);

    [[nodiscard]] virtual bool models_vacuum() const { return true; }
    [[nodiscard]] virtual bool models_power() const { return true; }

    void reset();
    [[nodiscard]] double time() const { return t_; }

    /// Advance internal state to absolute time t_target with inputs held
    /// constant over the interval. t_target == time() processes input edges
    /// without integrating.
    void advance_to(double t_target, const SignalInputs& in);

    [[nodiscard]] SignalFrame current_frame() const;
    [[nodiscard]] double current_vacuum_mbar() const { return out_vacuum_mbar(); }

    /// Exact-time output transition frames accumulated since the last call.
    [[nodiscard]] bool has_events() const { return !events_.empty(); }
    std::vector<SignalFrame> take_events();

    [[nodiscard]] virtual std::unique_ptr<BehaviorModel> clone() const = 0;

    /// Deterministic work counter (primitive state updates); basis of the
    /// schedule-independent runtime metric used by adaptation ranking.
    [[nodiscard]] std::uint64_t work_units() const { return work_; }

  protected:
    BehaviorModel(ModelMetadata meta, std::map<std::string, double> params);

    virtual void do_reset() = 0;
    virtual void handle_input_change(const SignalInputs& now) = 0;
    virtual void do_advance(double h, const SignalInputs& in) = 0;
    virtual void on_parameters_changed() {}

    [[nodiscard]] virtual bool out_part_present() const = 0;
    [[nodiscard]] virtual bool out_in_control() const = 0;
    [[nodiscard]] virtual double out_vacuum_mbar() const { return 0.0; }
    [[nodiscard]] virtual double out_power_w() const { return 0.0; }

    void push_event(double t_event);
    void add_work(std::uint64_t units) { work_ += units; }
    [[nodiscard]] const SignalInputs& last_inputs() const { return inputs_; }

    ModelMetadata meta_;
    std::map<std::string, double> params_;

  private:
    double t_ = 0.0;
    SignalInputs inputs_;
    std::vector<SignalFrame> events_;
    std::uint64_t work_ = 0;
};

/// Builds the gripping-system model at the requested depth. Missing
/// depth-specific keys are filled with defaults derived from the core
/// (e.g. depth 2's t_evac from the depth-3 evacuation law). The optional
/// leak schedule turns the depth-4 model into a time-varying plant.
std::unique_ptr<BehaviorModel> make_gripper_model(ModelingDepth depth,
                                                  std::map<std::string, double> params,
                                                  std::string model_id = {},
                                                  LeakSchedule leak_schedule = nullptr);

/// Resolved parameter map (defaults filled) for the given depth without
/// constructing the model.
std::map<std::string, double> resolve_gripper_params(ModelingDepth depth,
                                                     std::map<std::string, double> params);

} // namespace twinforge
