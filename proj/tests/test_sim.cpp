#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"
#include "twinforge/models.hpp"
#include "twinforge/sim.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

using namespace twinforge;
using doctest::Approx;
using namespace tftest;

namespace {

bool frames_identical(const Trace& a, const Trace& b) {
    if (a.frames.size() != b.frames.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        const auto& x = a.frames[i];
        const auto& y = b.frames[i];
        if (x.t_s != y.t_s || x.suction != y.suction || x.blow_off != y.blow_off ||
            x.part_present_h2 != y.part_present_h2 || x.in_control_h1 != y.in_control_h1 ||
            x.vacuum_mbar != y.vacuum_mbar || x.power_w != y.power_w) {
            return false;
        }
    }
    return true;
}

double closed_form_h2_crossing() {
    const double q_eff = oracle_q_eff_m3s(1.6, 600.0, 750.0, 3.0);
    const double tau = oracle_tau_s(8.3014376e-6, 600.0, q_eff);
    return tau * std::log(600.0 / (600.0 - 414.0));
}

} // namespace

TEST_CASE("simulation is bit-deterministic") {
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const Trace a = simulate(*model, reference_cycle(2), 1.6, 1e-4);
    const Trace b = simulate(*model, reference_cycle(2), 1.6, 1e-4);
    CHECK(frames_identical(a, b));
}

TEST_CASE("timestamps are strictly increasing and channels aligned") {
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const Trace trace = simulate(*model, reference_cycle(2), 1.6, 1e-4);
    for (std::size_t i = 1; i < trace.frames.size(); ++i) {
        CHECK(trace.frames[i].t_s > trace.frames[i - 1].t_s);
    }
    CHECK(trace.frames.front().t_s == 0.0);
    CHECK(trace.frames.back().t_s == 1.6);
}

TEST_CASE("depth-4 H2 crossing matches the closed form within dt") {
    const double oracle = closed_form_h2_crossing();
    for (const double dt : {1e-3, 1e-4}) {
        auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
        const Trace trace = simulate(*model, reference_cycle(1), 0.8, dt);
        const auto evac = evacuation_time_s(trace);
        REQUIRE(evac.has_value());
        CHECK(std::abs(*evac - oracle) < dt);
    }
}

TEST_CASE("refining dt reduces the deviation from the closed form") {
    const double oracle = closed_form_h2_crossing();
    double previous = 1e9;
    for (const double dt : {1e-3, 1e-4, 1e-5}) {
        auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
        const Trace trace = simulate(*model, reference_cycle(1), 0.8, dt);
        const auto evac = evacuation_time_s(trace);
        REQUIRE(evac.has_value());
        const double deviation = std::abs(*evac - oracle);
        CHECK(deviation <= previous);
        CHECK(deviation < dt);
        previous = deviation;
    }
}

TEST_CASE("halving dt moves the crossing by less than dt") {
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const Trace coarse = simulate(*model, reference_cycle(1), 0.8, 2e-4);
    const Trace fine = simulate(*model, reference_cycle(1), 0.8, 1e-4);
    const auto a = evacuation_time_s(coarse);
    const auto b = evacuation_time_s(fine);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(std::abs(*a - *b) < 2e-4);
}

TEST_CASE("evacuation time requires a suction edge") {
    Trace trace;
    trace.frames.push_back({0.0, false, false, false, false, 0.0, 0.0});
    trace.frames.push_back({1.0, false, false, false, false, 0.0, 0.0});
    CHECK_THROWS_AS(evacuation_time_s(trace), Error);
}

TEST_CASE("heavy leakage never reaches H2") {
    auto params = reference_params();
    params[keys::d_leak_mm] = 1.5;
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, params);
    const Trace trace = simulate(*model, reference_cycle(1), 0.8, 1e-4);
    CHECK_FALSE(evacuation_time_s(trace).has_value());
}

TEST_CASE("energy of a synthetic constant-power trace") {
    Trace trace;
    trace.meta.dt_s = 0.1;
    for (int i = 0; i <= 20; ++i) {
        const double t = 0.1 * i;
        SignalFrame f;
        f.t_s = t;
        f.power_w = 2.0;
        trace.frames.push_back(f);
    }
    CHECK(energy_per_cycle_j(trace, 1.0) == Approx(2.0).epsilon(1e-12));
    CHECK(energy_per_cycle_j(trace, 2.0) == Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(energy_per_cycle_j(trace, 5.0), Error);
}

TEST_CASE("active pulse plus standby share integrates as expected") {
    // 3 W for 0.5 s, standby 0.2 W for the rest of a 1 s cycle
    Trace trace;
    for (int i = 0; i <= 1000; ++i) {
        const double t = 1e-3 * i;
        SignalFrame f;
        f.t_s = t;
        f.power_w = t < 0.5 ? 3.0 : 0.2;
        trace.frames.push_back(f);
    }
    CHECK(std::abs((energy_per_cycle_j(trace, 1.0)) - (1.5 + 0.1)) < 3e-3);
}

TEST_CASE("zero-power trace has zero energy") {
    auto model = make_gripper_model(ModelingDepth::discrete, reference_params());
    const Trace trace = simulate(*model, reference_cycle(1), 0.8, 1e-3);
    CHECK(energy_per_cycle_j(trace, 0.8) == 0.0);
}

TEST_CASE("controller passes on the ideal depth-4 model") {
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const ControllerReport report =
        controller_in_loop(*model, reference_cycle(3), {0.8}, 1e-4);
    CHECK(report.verdict == CycleVerdict::pass);
    CHECK(report.per_cycle.size() == 3);
}

TEST_CASE("controller times out under heavy leakage") {
    auto params = reference_params();
    params[keys::d_leak_mm] = 1.5;
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, params);
    const ControllerReport report =
        controller_in_loop(*model, reference_cycle(2), {0.8}, 1e-4);
    CHECK(report.verdict == CycleVerdict::timeout);
    CHECK(report.first_standstill_s.has_value());
}

TEST_CASE("mid-move leak step raises a fault") {
    // leak jumps from tight to severe at t = 0.35 s, inside the move window
    auto schedule = [](double t) { return t < 0.35 ? 0.0 : 2.0; };
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params(),
                                    "gripper/d4-leak-step", schedule);
    const ControllerReport report =
        controller_in_loop(*model, reference_cycle(1), {0.8}, 1e-4);
    CHECK(report.verdict == CycleVerdict::fault);
    REQUIRE(report.first_fault_s.has_value());
    CHECK(*report.first_fault_s > 0.35);
}

TEST_CASE("trace CSV round-trip is exact") {
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const Trace trace = simulate(*model, reference_cycle(1), 0.8, 1e-3);

    const std::string path =
        (std::filesystem::temp_directory_path() / "twinforge_trace_roundtrip.csv").string();
    write_trace_csv(trace, path);
    const Trace back = read_trace_csv(path);
    std::remove(path.c_str());

    CHECK(frames_identical(trace, back));
    CHECK(back.meta.model_id == trace.meta.model_id);
    CHECK(back.meta.dt_s == trace.meta.dt_s);
    CHECK(back.meta.parameters == trace.meta.parameters);
}

TEST_CASE("replay reproduces the original input schedule") {
    auto model = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const Trace original = simulate(*model, reference_cycle(2), 1.6, 1e-4);
    auto twin = make_gripper_model(ModelingDepth::physical_non_spatial, reference_params());
    const Trace replay = simulate_replay(*twin, original, 1e-4);
    CHECK(frames_identical(original, replay));
}

TEST_CASE("cycle inputs follow the phase windows") {
    const CycleSpec cycle = reference_cycle(2);
    CHECK(cycle_inputs_at(cycle, 0.0) == SignalInputs{true, false});
    CHECK(cycle_inputs_at(cycle, 0.59) == SignalInputs{true, false});
    CHECK(cycle_inputs_at(cycle, 0.6) == SignalInputs{false, true});
    CHECK(cycle_inputs_at(cycle, 0.81) == SignalInputs{true, false}); // second cycle
    CHECK(cycle_inputs_at(cycle, 1.7) == SignalInputs{false, false}); // past the pattern
}

TEST_CASE("cycle validation rejects inconsistent phases") {
    CycleSpec bad = reference_cycle(1);
    bad.blow_off_at_s = bad.cycle_period_s + 0.1;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = reference_cycle(1);
    bad.suction_on_at_s = 0.7;
    bad.blow_off_at_s = 0.6;
    CHECK_THROWS_AS(bad.validate(), Error);
}
