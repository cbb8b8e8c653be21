#include "twinforge/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>

namespace twinforge {

double pump_flow_m3s(double dp_mbar, double q_max_lpm, double dp_max_mbar) {
    if (dp_mbar < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "pump flow requires dp >= 0");
    }
    const double q_max = q_max_lpm * constants::lpm_to_m3s;
    return q_max * std::max(0.0, 1.0 - dp_mbar / dp_max_mbar);
}

double leak_flow_m3s(double dp_mbar, double d_leak_mm) {
    if (dp_mbar < 0.0 || d_leak_mm < 0.0) {
        throw Error(ErrorKind::invalid_parameter, "leak flow requires dp >= 0 and d_leak >= 0");
    }
    const double d_m = d_leak_mm * 1e-3;
    const double area = std::numbers::pi * d_m * d_m / 4.0;
    const double dp_pa = dp_mbar * constants::mbar_to_pa;
    return constants::orifice_cd * area * std::sqrt(2.0 * dp_pa / constants::rho_air_kg_m3);
}

double hose_conductance_m3s_per_mbar(double length_mm, double inner_diameter_mm) {
    if (!(length_mm > 0.0) || !(inner_diameter_mm > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "hose conductance requires positive geometry");
    }
    const double d = inner_diameter_mm * 1e-3;
    const double len = length_mm * 1e-3;
    const double per_pa =
        std::numbers::pi * d * d * d * d / (128.0 * constants::mu_air_pa_s * len);
    return per_pa * constants::mbar_to_pa;
}

double d3_vacuum_mbar(double t_since_suction_s, double tau_s, double dp_max_mbar) {
    if (!(tau_s > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "tau must be > 0");
    }
    if (t_since_suction_s <= 0.0) {
        return 0.0;
    }
    return dp_max_mbar * (1.0 - std::exp(-t_since_suction_s / tau_s));
}

ControlState control_update(ControlState s, bool suction_commanded, double dp_mbar,
                            const ThresholdConfig& th) {
    if (dp_mbar >= th.h1_mbar) {
        s.in_control = true;
        s.pump_active = false;
    } else if (dp_mbar < th.h1_mbar - th.h1_hysteresis_mbar) {
        s.in_control = false;
        s.pump_active = suction_commanded;
    }
    if (!suction_commanded) {
        s.pump_active = false;
    }
    return s;
}

double GripperCore::power_w(bool suction, bool blow, bool pump_active) const {
    if (blow) {
        return drop_off == DropOffPrinciple::blow_off ? p_active_w : 0.0;
    }
    if (suction && pump_active) {
        return p_active_w;
    }
    if (suction) {
        return 0.0; // air-saving hold
    }
    return power_source == PowerSource::electric ? standby_w : 0.0;
}

namespace {

double require_key(const std::map<std::string, double>& params, const char* key) {
    auto it = params.find(key);
    if (it == params.end()) {
        throw Error(ErrorKind::invalid_parameter,
                    std::string("missing model parameter '") + key + "'");
    }
    return it->second;
}

double value_or(const std::map<std::string, double>& params, const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace

GripperCore derive_gripper_core(const std::map<std::string, double>& params) {
    GripperCore core;
    const double q_max_lpm = require_key(params, keys::q_max_lpm);
    core.dp_max_mbar = require_key(params, keys::dp_max_mbar);
    core.q_max_m3s = q_max_lpm * constants::lpm_to_m3s;

    const double hose_len = value_or(params, keys::hose_length_mm, 0.0);
    const double hose_dia = value_or(params, keys::hose_inner_diameter_mm, 0.0);
    double hose_volume = 0.0;
    double attenuation = 1.0;
    if (hose_len > 0.0 && hose_dia > 0.0) {
        const double r = hose_dia * 1e-3 / 2.0;
        hose_volume = std::numbers::pi * r * r * hose_len * 1e-3;
        const double conductance = hose_conductance_m3s_per_mbar(hose_len, hose_dia);
        attenuation = 1.0 + core.q_max_m3s / (conductance * core.dp_max_mbar);
    }
    core.q_eff_m3s = core.q_max_m3s / attenuation;

    const double cup_count = value_or(params, keys::cup_count, 0.0);
    const double cup_dead = value_or(params, keys::cup_dead_volume_cm3, 0.0);
    core.volume_m3 = hose_volume + cup_count * cup_dead * 1e-6 +
                     value_or(params, keys::extra_volume_m3, 0.0);
    if (!(core.volume_m3 > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "gripper model needs a positive system volume");
    }

    core.tau_s = core.volume_m3 * core.dp_max_mbar / (constants::p_atm_mbar * core.q_eff_m3s);

    core.thresholds.h2_mbar = require_key(params, keys::h2_mbar);
    core.thresholds.h1_mbar = require_key(params, keys::h1_mbar);
    core.thresholds.h1_hysteresis_mbar =
        value_or(params, keys::h1_hyst_mbar, constants::default_h1_hysteresis_mbar);
    core.thresholds.validate();

    core.power_source = value_or(params, keys::power_source, 0.0) < 0.5 ? PowerSource::electric
                                                                        : PowerSource::pneumatic;
    core.drop_off = value_or(params, keys::drop_off, 0.0) < 0.5 ? DropOffPrinciple::valve
                                                                : DropOffPrinciple::blow_off;
    if (core.power_source == PowerSource::electric) {
        core.p_active_w = require_key(params, keys::rated_power_w);
        core.standby_w = value_or(params, keys::standby_power_w, constants::standby_power_w);
    } else {
        const double air_lpm = require_key(params, keys::air_consumption_lpm);
        const double e_air =
            value_or(params, keys::e_air_kwh_per_nm3, constants::e_air_kwh_per_nm3);
        // l/min -> Nm^3/s times J/Nm^3 collapses to 60 * e_air watts per l/min
        core.p_active_w = air_lpm * 60.0 * e_air;
        core.standby_w = 0.0;
    }
    core.tau_blow_s = value_or(params, keys::tau_blow_s, constants::tau_blow_s);
    return core;
}

std::map<std::string, double> gripper_param_map(const GrippingAssembly& assembly,
                                                const ThresholdConfig& thresholds) {
    assembly.validate();
    thresholds.validate();
    std::map<std::string, double> p;
    const VacuumGenerator& gen = assembly.generator;
    p[keys::q_max_lpm] = gen.max_suction_capacity_lpm;
    p[keys::dp_max_mbar] = gen.max_vacuum_mbar;
    p[keys::power_source] = gen.power_source == PowerSource::electric ? 0.0 : 1.0;
    if (gen.power_source == PowerSource::electric) {
        p[keys::rated_power_w] = gen.rated_power_w;
        p[keys::standby_power_w] = constants::standby_power_w;
    } else {
        p[keys::air_consumption_lpm] = gen.air_consumption_lpm;
        p[keys::e_air_kwh_per_nm3] = constants::e_air_kwh_per_nm3;
    }
    p[keys::drop_off] = gen.drop_off == DropOffPrinciple::valve ? 0.0 : 1.0;
    p[keys::hose_length_mm] = assembly.hose.length_mm;
    p[keys::hose_inner_diameter_mm] = assembly.hose.inner_diameter_mm;
    p[keys::cup_diameter_mm] = assembly.cups.diameter_mm;
    p[keys::cup_count] = static_cast<double>(assembly.cups.count);
    p[keys::cup_dead_volume_cm3] = assembly.cups.dead_volume_per_cup_cm3;
    p[keys::h2_mbar] = thresholds.h2_mbar;
    p[keys::h1_mbar] = thresholds.h1_mbar;
    p[keys::h1_hyst_mbar] = thresholds.h1_hysteresis_mbar;
    p[keys::tau_blow_s] = constants::tau_blow_s;
    return p;
}

double d4_rate_mbar_s(const GripperCore& core, double dp_mbar, double d_leak_mm,
                      double q_max_scale, bool suction, bool blow, bool pump_active) {
    if (blow) {
        return -dp_mbar / core.tau_blow_s;
    }
    const double gain = constants::p_atm_mbar / core.volume_m3;
    const double q_leak = leak_flow_m3s(std::max(0.0, dp_mbar), d_leak_mm);
    if (suction && pump_active) {
        const double q_pump =
            q_max_scale * core.q_eff_m3s * std::max(0.0, 1.0 - dp_mbar / core.dp_max_mbar);
        return gain * (q_pump - q_leak);
    }
    return -gain * q_leak;
}

// --- BehaviorModel base ---------------------------------------------------

BehaviorModel::BehaviorModel(ModelMetadata meta, std::map<std::string, double> params)
    : meta_(std::move(meta)), params_(std::move(params)) {
    meta_.validate();
}

double BehaviorModel::parameter(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw Error(ErrorKind::invalid_parameter,
                    meta_.model_id + " has no parameter '" + name + "'");
    }
    return it->second;
}

void BehaviorModel::set_parameter(const std::string& name, double value) {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw Error(ErrorKind::invalid_parameter,
                    meta_.model_id + " has no parameter '" + name + "'");
    }
    if (const FreeParameter* fp = meta_.find_free_parameter(name)) {
        if (value < fp->lower || value > fp->upper) {
            throw Error(ErrorKind::invalid_parameter,
                        "parameter '" + name + "' outside bounds [" +
                            std::to_string(fp->lower) + ", " + std::to_string(fp->upper) + "]");
        }
    }
    it->second = value;
    on_parameters_changed();
}

void BehaviorModel::set_parameters(const std::map<std::string, double>& values) {
    for (const auto& [name, value] : values) {
        set_parameter(name, value);
    }
}

void BehaviorModel::reset() {
    t_ = 0.0;
    inputs_ = SignalInputs{};
    events_.clear();
    work_ = 0;
    do_reset();
}

void BehaviorModel::advance_to(double t_target, const SignalInputs& in) {
    if (t_target < t_) {
        throw Error(ErrorKind::invalid_parameter, "advance_to cannot move backwards in time");
    }
    if (!(in == inputs_)) {
        inputs_ = in;
        handle_input_change(in);
    }
    const double h = t_target - t_;
    if (h > 0.0) {
        do_advance(h, inputs_);
    }
    t_ = t_target;
}

SignalFrame BehaviorModel::current_frame() const {
    SignalFrame f;
    f.t_s = t_;
    f.suction = inputs_.suction;
    f.blow_off = inputs_.blow_off;
    f.part_present_h2 = out_part_present();
    f.in_control_h1 = out_in_control();
    f.vacuum_mbar = out_vacuum_mbar();
    f.power_w = out_power_w();
    return f;
}

std::vector<SignalFrame> BehaviorModel::take_events() {
    return std::exchange(events_, {});
}

void BehaviorModel::push_event(double t_event) {
    SignalFrame f = current_frame();
    f.t_s = t_event;
    events_.push_back(f);
}

// --- Depth 1: discrete set/reset behavior ---------------------------------

namespace {

class D1Model final : public BehaviorModel {
  public:
    D1Model(ModelMetadata meta, std::map<std::string, double> params)
        : BehaviorModel(std::move(meta), std::move(params)) {}

    bool models_vacuum() const override { return false; }
    bool models_power() const override { return false; }

    std::unique_ptr<BehaviorModel> clone() const override {
        return std::make_unique<D1Model>(*this);
    }

  protected:
    void do_reset() override { latched_ = false; }

    void handle_input_change(const SignalInputs& now) override {
        const bool before = latched_;
        if (now.blow_off) {
            latched_ = false;
        } else if (now.suction) {
            latched_ = true;
        }
        if (latched_ != before) {
            push_event(time());
        }
        add_work(1);
    }

    void do_advance(double, const SignalInputs&) override { add_work(1); }

    bool out_part_present() const override { return latched_; }
    bool out_in_control() const override { return latched_; }

  private:
    bool latched_ = false;
};

// --- Depth 2: discrete temporal (delay automaton) --------------------------

class D2Model final : public BehaviorModel {
  public:
    D2Model(ModelMetadata meta, std::map<std::string, double> params)
        : BehaviorModel(std::move(meta), std::move(params)) {
        read_params();
    }

    bool models_vacuum() const override { return false; }
    bool models_power() const override { return false; }

    std::unique_ptr<BehaviorModel> clone() const override {
        return std::make_unique<D2Model>(*this);
    }

  protected:
    void do_reset() override {
        h2_out_ = false;
        h1_out_ = false;
        pend_h2_on_.reset();
        pend_h1_on_.reset();
        pend_off_.reset();
    }

    void on_parameters_changed() override { read_params(); }

    void handle_input_change(const SignalInputs& now) override {
        add_work(1);
        const bool suction = now.suction && !now.blow_off;
        if (now.blow_off && !prev_blow_) {
            pend_h2_on_.reset();
            pend_h1_on_.reset();
            if (h2_out_ || h1_out_) {
                pend_off_ = time() + t_blow_;
            }
        }
        if (suction && !prev_suction_) {
            pend_h2_on_ = time() + t_evac_;
            pend_h1_on_ = time() + t_evac_ + dt_h1_;
            pend_off_.reset();
        }
        if (!suction && prev_suction_) {
            // evacuation interrupted: unfired delays are dropped
            pend_h2_on_.reset();
            pend_h1_on_.reset();
        }
        prev_suction_ = suction;
        prev_blow_ = now.blow_off;
    }

    void do_advance(double h, const SignalInputs&) override {
        add_work(1);
        const double t_end = time() + h;
        while (true) {
            struct Fire {
                double t;
                int kind; // 0 h2 on, 1 h1 on, 2 off
            };
            std::optional<Fire> next;
            auto consider = [&](const std::optional<double>& pend, int kind) {
                if (pend && *pend <= t_end && (!next || *pend < next->t)) {
                    next = Fire{*pend, kind};
                }
            };
            consider(pend_h2_on_, 0);
            consider(pend_h1_on_, 1);
            consider(pend_off_, 2);
            if (!next) {
                break;
            }
            switch (next->kind) {
            case 0:
                pend_h2_on_.reset();
                h2_out_ = true;
                break;
            case 1:
                pend_h1_on_.reset();
                h1_out_ = true;
                break;
            case 2:
                pend_off_.reset();
                h2_out_ = false;
                h1_out_ = false;
                break;
            }
            push_event(next->t);
            add_work(1);
        }
    }

    bool out_part_present() const override { return h2_out_; }
    bool out_in_control() const override { return h1_out_; }

  private:
    void read_params() {
        t_evac_ = parameter(keys::t_evac_s);
        dt_h1_ = parameter(keys::dt_h1_s);
        t_blow_ = parameter(keys::t_blow_s);
    }

    double t_evac_ = 0.0;
    double dt_h1_ = 0.0;
    double t_blow_ = 0.1;
    bool h2_out_ = false;
    bool h1_out_ = false;
    bool prev_suction_ = false;
    bool prev_blow_ = false;
    std::optional<double> pend_h2_on_;
    std::optional<double> pend_h1_on_;
    std::optional<double> pend_off_;
};

// --- Depth 3: continuous simplified (closed-form evacuation curve) ---------

class D3Model final : public BehaviorModel {
  public:
    D3Model(ModelMetadata meta, std::map<std::string, double> params)
        : BehaviorModel(std::move(meta), std::move(params)) {
        read_params();
    }

    std::unique_ptr<BehaviorModel> clone() const override {
        return std::make_unique<D3Model>(*this);
    }

  protected:
    void do_reset() override {
        dp_ = 0.0;
        ctrl_ = ControlState{};
        energy_j_ = 0.0;
    }

    void on_parameters_changed() override { read_params(); }

    void handle_input_change(const SignalInputs& now) override {
        add_work(1);
        const bool before_pump = ctrl_.pump_active;
        const bool before_ic = ctrl_.in_control;
        ctrl_ = control_update(ctrl_, now.suction && !now.blow_off, dp_, core_.thresholds);
        if (ctrl_.pump_active != before_pump || ctrl_.in_control != before_ic) {
            push_event(time());
        }
    }

    void do_advance(double h, const SignalInputs& in) override {
        const bool blow = in.blow_off;
        const bool suction = in.suction && !in.blow_off;
        double t_now = time();
        double remaining = h;
        const ThresholdConfig& th = core_.thresholds;
        while (remaining > 0.0) {
            add_work(3);
            const double power = core_.power_w(suction, blow, ctrl_.pump_active);
            if (blow) {
                // exponential vent toward 0
                double target = -1.0;
                int kind = -1;
                if (dp_ >= th.h2_mbar && th.h2_mbar > 0.0) {
                    target = th.h2_mbar;
                    kind = 0; // part released
                }
                const double band = th.h1_mbar - th.h1_hysteresis_mbar;
                if (ctrl_.in_control && dp_ >= band && band > target) {
                    target = band;
                    kind = 1; // in-control unlatched
                }
                if (kind >= 0 && dp_ > target) {
                    const double t_cross = core_.tau_blow_s * std::log(dp_ / target);
                    if (t_cross <= remaining) {
                        t_now += t_cross;
                        remaining -= t_cross;
                        energy_j_ += power * t_cross;
                        if (kind == 1) {
                            dp_ = target;
                            ctrl_.in_control = false;
                        } else {
                            // part releases strictly below H2
                            dp_ = std::nextafter(target, 0.0);
                        }
                        push_event(t_now);
                        continue;
                    }
                }
                energy_j_ += power * remaining;
                dp_ *= std::exp(-remaining / core_.tau_blow_s);
                remaining = 0.0;
            } else if (suction && ctrl_.pump_active) {
                // closed-form rise toward dp_max; nearest threshold above wins
                const double dp_max = core_.dp_max_mbar;
                double target = -1.0;
                int kind = -1;
                if (dp_ < th.h2_mbar && th.h2_mbar < dp_max) {
                    target = th.h2_mbar;
                    kind = 0; // part present
                } else if (dp_ < th.h1_mbar && th.h1_mbar < dp_max) {
                    target = th.h1_mbar;
                    kind = 1; // in control range
                }
                if (kind >= 0) {
                    const double t_cross =
                        tau_ * std::log((dp_max - dp_) / (dp_max - target));
                    if (t_cross <= remaining) {
                        dp_ = target;
                        t_now += t_cross;
                        remaining -= t_cross;
                        energy_j_ += power * t_cross;
                        if (kind == 1) {
                            ctrl_.in_control = true;
                            ctrl_.pump_active = false;
                        }
                        push_event(t_now);
                        continue;
                    }
                }
                energy_j_ += power * remaining;
                dp_ = dp_max - (dp_max - dp_) * std::exp(-remaining / tau_);
                remaining = 0.0;
            } else {
                // no leak at this depth: vacuum holds
                energy_j_ += power * remaining;
                remaining = 0.0;
            }
        }
    }

    bool out_part_present() const override { return dp_ >= core_.thresholds.h2_mbar; }
    bool out_in_control() const override { return ctrl_.in_control; }
    double out_vacuum_mbar() const override { return dp_; }
    double out_power_w() const override {
        return core_.power_w(last_inputs().suction && !last_inputs().blow_off,
                             last_inputs().blow_off, ctrl_.pump_active);
    }

  private:
    void read_params() {
        core_ = derive_gripper_core(params_);
        tau_ = parameter(keys::tau_s);
        if (!(tau_ > 0.0)) {
            throw Error(ErrorKind::invalid_parameter, "tau_s must be > 0");
        }
    }

    GripperCore core_;
    double tau_ = 1.0;
    double dp_ = 0.0;
    ControlState ctrl_;
    double energy_j_ = 0.0;
};

// --- Depth 4: physical non-spatial (lumped-volume ODE) ----------------------

class D4Model final : public BehaviorModel {
  public:
    D4Model(ModelMetadata meta, std::map<std::string, double> params, LeakSchedule schedule)
        : BehaviorModel(std::move(meta), std::move(params)), schedule_(std::move(schedule)) {
        read_params();
    }

    std::unique_ptr<BehaviorModel> clone() const override {
        return std::make_unique<D4Model>(*this);
    }

  protected:
    void do_reset() override {
        dp_ = 0.0;
        ctrl_ = ControlState{};
        energy_j_ = 0.0;
    }

    void on_parameters_changed() override { read_params(); }

    void handle_input_change(const SignalInputs& now) override {
        add_work(1);
        const bool before_pump = ctrl_.pump_active;
        const bool before_ic = ctrl_.in_control;
        ctrl_ = control_update(ctrl_, now.suction && !now.blow_off, dp_, core_.thresholds);
        if (ctrl_.pump_active != before_pump || ctrl_.in_control != before_ic) {
            push_event(time());
        }
    }

    void do_advance(double h, const SignalInputs& in) override {
        const bool blow = in.blow_off;
        const bool suction = in.suction && !in.blow_off;
        double t_now = time();
        double remaining = h;
        const ThresholdConfig& th = core_.thresholds;
        int guard_fuse = 0;
        while (remaining > 0.0) {
            const double power = core_.power_w(suction, blow, ctrl_.pump_active);
            const double y0 = dp_;
            const double y1 = rk2_step(t_now, y0, remaining, suction, blow);
            // guard thresholds crossed within this substep
            double target = 0.0;
            int kind = -1;
            if (y1 > y0) {
                double best = std::numeric_limits<double>::infinity();
                if (y0 < th.h2_mbar && y1 >= th.h2_mbar) {
                    best = th.h2_mbar;
                    kind = 0;
                }
                if (ctrl_.pump_active && y0 < th.h1_mbar && y1 >= th.h1_mbar &&
                    th.h1_mbar < best) {
                    best = th.h1_mbar;
                    kind = 1;
                }
                target = best;
            } else if (y1 < y0) {
                double best = -std::numeric_limits<double>::infinity();
                if (y0 >= th.h2_mbar && y1 < th.h2_mbar) {
                    best = th.h2_mbar;
                    kind = 2;
                }
                const double band = th.h1_mbar - th.h1_hysteresis_mbar;
                const bool band_armed = ctrl_.in_control || (suction && !ctrl_.pump_active);
                if (band_armed && y0 >= band && y1 < band && band > best) {
                    best = band;
                    kind = 3;
                }
                target = best;
            }
            if (kind < 0) {
                dp_ = clamp_dp(y1);
                energy_j_ += power * remaining;
                t_now += remaining;
                remaining = 0.0;
                break;
            }
            if (++guard_fuse > 10000) {
                throw Error(ErrorKind::numerical_divergence,
                            "guard localization stalled at t=" + std::to_string(t_now));
            }
            const double h_cross = bisect_crossing(t_now, y0, remaining, target, suction, blow);
            dp_ = (kind == 2) ? std::nextafter(target, 0.0) : target;
            energy_j_ += power * h_cross;
            t_now += h_cross;
            remaining -= h_cross;
            switch (kind) {
            case 0: // part present
            case 2: // part released strictly below H2
                break;
            case 1: // H1 reached: latch, pump passive
                ctrl_.in_control = true;
                ctrl_.pump_active = false;
                break;
            case 3: // hysteresis band undercut: unlatch, pump restarts
                ctrl_.in_control = false;
                ctrl_.pump_active = suction;
                break;
            }
            push_event(t_now);
        }
    }

    bool out_part_present() const override { return dp_ >= core_.thresholds.h2_mbar; }
    bool out_in_control() const override { return ctrl_.in_control; }
    double out_vacuum_mbar() const override { return dp_; }
    double out_power_w() const override {
        return core_.power_w(last_inputs().suction && !last_inputs().blow_off,
                             last_inputs().blow_off, ctrl_.pump_active);
    }

  private:
    void read_params() {
        core_ = derive_gripper_core(params_);
        d_leak_param_ = parameter(keys::d_leak_mm);
        q_scale_ = parameter(keys::q_max_scale);
    }

    [[nodiscard]] double leak_at(double t) const {
        return schedule_ ? schedule_(t) : d_leak_param_;
    }

    [[nodiscard]] double rate(double t, double dp, bool suction, bool blow) const {
        return d4_rate_mbar_s(core_, std::max(0.0, dp), leak_at(t), q_scale_, suction, blow,
                              ctrl_.pump_active);
    }

    double rk2_step(double t, double y, double h, bool suction, bool blow) {
        add_work(6);
        const double k1 = rate(t, y, suction, blow);
        const double k2 = rate(t + 0.5 * h, y + 0.5 * h * k1, suction, blow);
        return y + h * k2;
    }

    /// Finds h* in (0, h] with rk2_step(t, y0, h*) == target by bisection.
    double bisect_crossing(double t, double y0, double h, double target, bool suction,
                           bool blow) {
        double lo = 0.0;
        double hi = h;
        for (int i = 0; i < 80 && (hi - lo) > 1e-16 * std::max(1.0, h); ++i) {
            const double mid = 0.5 * (lo + hi);
            const double y_mid = rk2_step(t, y0, mid, suction, blow);
            const bool past = (y0 < target) ? (y_mid >= target) : (y_mid <= target);
            if (past) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return hi;
    }

    [[nodiscard]] double clamp_dp(double dp) const {
        return std::min(std::max(dp, 0.0), core_.dp_max_mbar);
    }

    GripperCore core_;
    LeakSchedule schedule_;
    double d_leak_param_ = 0.0;
    double q_scale_ = 1.0;
    double dp_ = 0.0;
    ControlState ctrl_;
    double energy_j_ = 0.0;
};

ModelMetadata gripper_metadata(ModelingDepth depth, const std::string& model_id,
                               const std::map<std::string, double>& params) {
    ModelMetadata md;
    md.model_id = model_id;
    md.depth = depth;
    md.range = ModelingRange::system;
    md.runtime_class = depth_level(depth);
    switch (depth) {
    case ModelingDepth::discrete:
        md.disciplines = {Discipline::fluidic};
        md.behavior = BehaviorKind::ideal;
        md.validity = "logic-level gripping only; no timing, vacuum or power";
        break;
    case ModelingDepth::discrete_temporal:
        md.disciplines = {Discipline::fluidic};
        md.behavior = BehaviorKind::ideal;
        md.free_parameters = {{keys::t_evac_s, "s", 0.0, 5.0}};
        md.validity = "fixed-delay response; no vacuum or power channels";
        break;
    case ModelingDepth::continuous_simplified: {
        md.disciplines = {Discipline::fluidic, Discipline::electrical};
        md.behavior = BehaviorKind::ideal;
        const double tau_nominal = derive_gripper_core(params).tau_s;
        md.free_parameters = {{keys::tau_s, "s", tau_nominal / 10.0, tau_nominal * 10.0}};
        md.validity = "leak-free evacuation curve; valid near catalog operating point";
        break;
    }
    case ModelingDepth::physical_non_spatial:
        md.disciplines = {Discipline::fluidic, Discipline::electrical};
        md.behavior = BehaviorKind::error_prone;
        md.free_parameters = {{keys::d_leak_mm, "mm", 0.0, 2.0},
                              {keys::q_max_scale, "1", 0.6, 1.15}};
        md.validity = "lumped isothermal volume; no temperature or spatial effects";
        break;
    case ModelingDepth::physical_spatial:
        throw Error(ErrorKind::missing_model, "no physical-spatial model in this library");
    }
    return md;
}

} // namespace

std::map<std::string, double> resolve_gripper_params(ModelingDepth depth,
                                                     std::map<std::string, double> params) {
    const GripperCore core = derive_gripper_core(params);
    auto put_default = [&params](const char* key, double value) {
        params.emplace(key, value);
    };
    switch (depth) {
    case ModelingDepth::discrete:
        break;
    case ModelingDepth::discrete_temporal: {
        const double dp_max = core.dp_max_mbar;
        const ThresholdConfig& th = core.thresholds;
        put_default(keys::t_evac_s, core.tau_s * std::log(dp_max / (dp_max - th.h2_mbar)));
        put_default(keys::dt_h1_s,
                    core.tau_s * std::log((dp_max - th.h2_mbar) / (dp_max - th.h1_mbar)));
        put_default(keys::t_blow_s, 0.1);
        break;
    }
    case ModelingDepth::continuous_simplified:
        put_default(keys::tau_s, core.tau_s);
        break;
    case ModelingDepth::physical_non_spatial:
        put_default(keys::d_leak_mm, 0.0);
        put_default(keys::q_max_scale, 1.0);
        break;
    case ModelingDepth::physical_spatial:
        throw Error(ErrorKind::missing_model, "no physical-spatial model in this library");
    }
    return params;
}

std::unique_ptr<BehaviorModel> make_gripper_model(ModelingDepth depth,
                                                  std::map<std::string, double> params,
                                                  std::string model_id, LeakSchedule schedule) {
    params = resolve_gripper_params(depth, std::move(params));
    if (model_id.empty()) {
        model_id = "gripper/d" + std::to_string(depth_level(depth));
    }
    ModelMetadata md = gripper_metadata(depth, model_id, params);
    switch (depth) {
    case ModelingDepth::discrete:
        return std::make_unique<D1Model>(std::move(md), std::move(params));
    case ModelingDepth::discrete_temporal:
        return std::make_unique<D2Model>(std::move(md), std::move(params));
    case ModelingDepth::continuous_simplified:
        return std::make_unique<D3Model>(std::move(md), std::move(params));
    case ModelingDepth::physical_non_spatial:
        return std::make_unique<D4Model>(std::move(md), std::move(params), std::move(schedule));
    case ModelingDepth::physical_spatial:
        break;
    }
    throw Error(ErrorKind::missing_model, "no physical-spatial model in this library");
}

} // namespace twinforge
