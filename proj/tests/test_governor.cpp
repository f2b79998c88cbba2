#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermofix/governor.hpp"
#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"
#include "thermofix/model_io.hpp"
#include "thermofix/scenario.hpp"

using namespace thermofix;

namespace {

ThermalModel bundled() {
    return load_model(std::string(THERMOFIX_DATA_DIR) + "/default_soc.json");
}

std::vector<FreqLevel> two_levels() {
    return {{2000.0, 1.25}, {1000.0, 0.9}};
}

GovernorConfig bundled_config() {
    GovernorConfig cfg;
    cfg.t_limit = 358.15;
    cfg.t_horizon = 1800.0;
    cfg.freq_table = two_levels();
    return cfg;
}

Vector loaded_power(const ThermalModel& m, double big_w) {
    Vector p = Vector::Zero(m.m());
    p[m.resource_index("little")] = 0.30;
    p[m.resource_index("mem")] = 1.05;
    p[m.resource_index("gpu")] = 0.90;
    p[m.resource_index("big")] = big_w;
    return p;
}

Scenario tiny_scenario(const ThermalModel& m) {
    Scenario sc;
    sc.name = "tiny";
    sc.duration_s = 20.0;
    sc.governor = bundled_config();
    sc.floor_w = Vector::Zero(m.m());
    sc.floor_w[m.resource_index("little")] = 0.30;
    sc.floor_w[m.resource_index("mem")] = 1.05;

    ProcessSpec hog;
    hog.pid = 1;
    hog.name = "hog";
    hog.big_w = 1.8;
    hog.little_w = 0.25;
    sc.processes.push_back(hog);

    ProcessSpec rt;
    rt.pid = 2;
    rt.name = "rt";
    rt.realtime = true;
    rt.big_w = 0.3;
    rt.gpu_w = 0.9;
    sc.processes.push_back(rt);
    return sc;
}

}  // namespace

TEST_CASE("frequency scaling follows the level table", "[governor]") {
    const std::vector<FreqLevel> table = two_levels();
    CHECK(freq_power_scale(table, 0) == 1.0);
    CHECK(freq_speed_scale(table, 0) == 1.0);
    CHECK(freq_power_scale(table, 1) == Catch::Approx(0.5 * 0.5184).epsilon(1e-12));
    CHECK(freq_speed_scale(table, 1) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(freq_power_scale({}, 0), std::invalid_argument);
    CHECK_THROWS_AS(freq_speed_scale({}, 0), std::invalid_argument);
    CHECK_THROWS_AS(freq_power_scale(table, 2), std::out_of_range);
    CHECK_THROWS_AS(freq_speed_scale(table, 2), std::out_of_range);
}

TEST_CASE("migration picker respects eligibility and ties", "[governor]") {
    std::vector<ProcessStats> procs{
        {10, false, true, 0.8},
        {11, true, true, 2.0},    // realtime, protected
        {12, false, false, 3.0},  // already off the big cluster
        {13, false, true, 0.8},   // ties with pid 10
    };
    CHECK(hottest_process(procs) == 10);

    std::reverse(procs.begin(), procs.end());
    CHECK(hottest_process(procs) == 10);

    procs.push_back({9, false, true, 1.4});
    CHECK(hottest_process(procs) == 9);

    CHECK(hottest_process({}) == -1);
    CHECK(hottest_process({{11, true, true, 2.0}, {12, false, false, 3.0}}) == -1);
}

TEST_CASE("baseline hysteresis steps one level with clamping", "[governor]") {
    GovernorConfig cfg = bundled_config();  // limit 358.15, band down to 356.15

    CHECK(baseline_tick(cfg, 358.2, 0) == 1);
    CHECK(baseline_tick(cfg, 358.2, 1) == 1);   // clamped at the slowest level
    CHECK(baseline_tick(cfg, 357.0, 1) == 1);   // inside the band: hold
    CHECK(baseline_tick(cfg, 356.0, 1) == 0);
    CHECK(baseline_tick(cfg, 356.0, 0) == 0);   // clamped at the fastest level
    CHECK(baseline_tick(cfg, 358.15, 0) == 0);  // limit itself is not a violation

    CHECK_THROWS_AS(baseline_tick(GovernorConfig{}, 300.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(baseline_tick(cfg, 300.0, 5), std::out_of_range);
}

TEST_CASE("predictive tick gates on peak and settling time", "[governor]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);
    const GovernorConfig cfg = bundled_config();
    const std::vector<ProcessStats> procs{{1, false, true, 1.8}, {2, true, true, 0.3}};

    // settled peak below the limit: never imminent
    const GovernorDecision cool = control_tick(m, ws, cfg, loaded_power(m, 0.35), 50.0, true, procs);
    CHECK_FALSE(cool.violation_imminent);
    CHECK_FALSE(cool.conservative);
    CHECK(cool.predicted_peak < cfg.t_limit);
    CHECK(cool.migrate_pid == -1);

    // settled peak above the limit and settling within the horizon
    const GovernorDecision hot = control_tick(m, ws, cfg, loaded_power(m, 1.95), 100.0, true, procs);
    CHECK(hot.violation_imminent);
    CHECK_FALSE(hot.conservative);
    CHECK(hot.predicted_peak > cfg.t_limit);
    CHECK(hot.eta_s == 100.0);
    CHECK(hot.migrate_pid == 1);

    // same peak but settling beyond the horizon: wait
    const GovernorDecision far = control_tick(m, ws, cfg, loaded_power(m, 1.95), 5000.0, true, procs);
    CHECK_FALSE(far.violation_imminent);
    CHECK(far.migrate_pid == -1);

    // unusable fit: assume settling now
    const GovernorDecision blind =
        control_tick(m, ws, cfg, loaded_power(m, 1.95), 5000.0, false, procs);
    CHECK(blind.violation_imminent);
    CHECK(blind.conservative);
    CHECK(blind.eta_s == 0.0);

    // only protected processes: imminent but nothing to migrate
    const GovernorDecision stuck =
        control_tick(m, ws, cfg, loaded_power(m, 1.95), 0.0, true, {{2, true, true, 0.3}});
    CHECK(stuck.violation_imminent);
    CHECK(stuck.migrate_pid == -1);
}

TEST_CASE("solver failure is treated as an imminent violation", "[governor]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);
    NewtonConfig solver;
    solver.tol = 1e-15;
    solver.max_iter = 1;
    const GovernorDecision decision = control_tick(m, ws, bundled_config(), loaded_power(m, 0.35),
                                                   50.0, true, {{1, false, true, 1.0}}, solver);
    CHECK(decision.violation_imminent);
    CHECK(decision.conservative);
    CHECK(decision.migrate_pid == 1);
}

TEST_CASE("policy names round-trip", "[governor]") {
    for (Policy p : {Policy::predictive, Policy::baseline, Policy::none})
        CHECK(parse_policy(policy_name(p)) == p);
    CHECK_THROWS_AS(parse_policy("reactive"), std::invalid_argument);
}

TEST_CASE("scenario JSON parses fields and defaults", "[governor]") {
    const ThermalModel m = bundled();
    const nlohmann::json j = {
        {"name", "parse_check"},
        {"duration_s", 30.0},
        {"noise_sigma_k", 0.2},
        {"noise_seed", 99},
        {"governor",
         {{"t_limit_celsius", 85.0}, {"t_horizon_s", 120.0}, {"tick_s", 0.2}, {"delta_k", 0.5}}},
        {"freq_table", {{{"mhz", 2000.0}, {"volts", 1.25}}, {{"mhz", 1500.0}, {"volts", 1.0}}}},
        {"floor_w", {{"little", 0.3}, {"mem", 1.05}}},
        {"processes",
         {{{"pid", 7}, {"name", "worker"}, {"big_w", 1.2}},
          {{"pid", 8}, {"name", "ui"}, {"realtime", true}, {"big_w", 0.2}, {"departure_s", 10.0}}}},
    };
    const Scenario sc = scenario_from_json(j, m);
    CHECK(sc.name == "parse_check");
    CHECK(sc.duration_s == 30.0);
    CHECK(sc.noise_seed == 99);
    CHECK(sc.governor.t_limit == Catch::Approx(358.15));
    CHECK(sc.governor.t_horizon == 120.0);
    CHECK(sc.governor.tick_s == 0.2);
    CHECK(sc.governor.delta == 0.5);
    CHECK(sc.governor.power_window_s == 1.0);  // default
    REQUIRE(sc.governor.freq_table.size() == 2);
    CHECK(sc.floor_w[m.resource_index("mem")] == 1.05);
    CHECK(sc.floor_w[m.resource_index("big")] == 0.0);
    REQUIRE(sc.processes.size() == 2);
    CHECK(sc.processes[0].departure_s == 30.0);  // defaults to the scenario end
    CHECK(sc.processes[0].little_speed == 0.4);
    CHECK(sc.processes[1].realtime);
    CHECK(sc.processes[1].departure_s == 10.0);
}

TEST_CASE("scenario JSON rejects malformed input", "[governor]") {
    const ThermalModel m = bundled();
    nlohmann::json base = {
        {"duration_s", 30.0},
        {"governor", {{"t_limit_celsius", 85.0}, {"t_horizon_s", 120.0}}},
        {"freq_table", {{{"mhz", 2000.0}, {"volts", 1.25}}}},
        {"floor_w", {{"little", 0.3}}},
        {"processes", {{{"pid", 7}, {"name", "worker"}}}},
    };
    CHECK_NOTHROW(scenario_from_json(base, m));

    nlohmann::json j = base;
    j.erase("duration_s");
    CHECK_THROWS_WITH(scenario_from_json(j, m), Catch::Matchers::ContainsSubstring("duration_s"));

    j = base;
    j["governor"].erase("t_limit_celsius");
    CHECK_THROWS_WITH(scenario_from_json(j, m),
                      Catch::Matchers::ContainsSubstring("t_limit_celsius"));

    j = base;
    j["freq_table"] = nlohmann::json::array();
    CHECK_THROWS_WITH(scenario_from_json(j, m), Catch::Matchers::ContainsSubstring("freq_table"));

    j = base;
    j["processes"].push_back({{"pid", 7}, {"name", "clone"}});
    CHECK_THROWS_WITH(scenario_from_json(j, m), Catch::Matchers::ContainsSubstring("duplicate"));

    j = base;
    j["floor_w"] = {{"npu", 0.2}};
    CHECK_THROWS_AS(scenario_from_json(j, m), std::invalid_argument);
}

TEST_CASE("uncontrolled scenario run records the plant honestly", "[governor][scenario]") {
    const ThermalModel m = bundled();
    const Scenario sc = tiny_scenario(m);
    const ScenarioSummary sum = run_scenario(m, sc, Policy::none);

    CHECK(sum.scenario == "tiny");
    CHECK(sum.policy == Policy::none);
    REQUIRE(sum.records.size() == 200);
    CHECK(sum.migrations == 0);
    CHECK(sum.imminent_ticks == 0);
    CHECK(sum.final_level == 0);
    CHECK_FALSE(sum.runaway);
    CHECK(sum.time_above_limit_s == 0.0);  // 20 s is far too short to reach the limit

    double peak = 0.0;
    long above = 0;
    for (std::size_t k = 0; k < sum.records.size(); ++k) {
        const TickRecord& rec = sum.records[k];
        CHECK(rec.time_s == Catch::Approx(0.1 * static_cast<double>(k)));
        CHECK(rec.t_hot_meas == rec.t_hot_true);  // noiseless scenario
        CHECK(rec.p_big == Catch::Approx(2.1));   // hog 1.8 + rt 0.3
        CHECK(rec.p_little == Catch::Approx(0.3));
        CHECK(rec.p_gpu == Catch::Approx(0.9));
        CHECK(rec.migrate_pid == -1);
        peak = std::max(peak, rec.t_hot_true);
        if (rec.t_hot_true > sc.governor.t_limit) ++above;
    }
    CHECK(sum.peak_temp >= peak);
    CHECK(sum.time_above_limit_s == Catch::Approx(0.1 * static_cast<double>(above)));

    // both processes ran the whole time at full speed
    REQUIRE(sum.processes.size() == 2);
    for (const ProcessOutcome& po : sum.processes) {
        CHECK(po.active_s == Catch::Approx(20.0));
        CHECK(po.proxy_fraction == Catch::Approx(1.0));
        CHECK(po.migrations == 0);
    }
}

TEST_CASE("predictive scenario run pins the hog to the little cluster", "[governor][scenario]") {
    const ThermalModel m = bundled();
    const Scenario sc = tiny_scenario(m);
    const ScenarioSummary sum = run_scenario(m, sc, Policy::predictive);

    CHECK(sum.migrations >= 1);
    CHECK(sum.imminent_ticks >= 1);
    CHECK(sum.conservative_ticks >= 30);  // no usable fit before 30 samples exist

    for (const TickRecord& rec : sum.records)
        if (rec.migrate_pid >= 0) CHECK(rec.imminent);

    const auto hog = std::find_if(sum.processes.begin(), sum.processes.end(),
                                  [](const ProcessOutcome& po) { return po.pid == 1; });
    const auto rt = std::find_if(sum.processes.begin(), sum.processes.end(),
                                 [](const ProcessOutcome& po) { return po.pid == 2; });
    REQUIRE(hog != sum.processes.end());
    REQUIRE(rt != sum.processes.end());
    CHECK(hog->migrations >= 1);
    CHECK(hog->proxy_fraction < 1.0);
    CHECK(rt->migrations == 0);
    CHECK(rt->proxy_fraction == Catch::Approx(1.0));
}

TEST_CASE("baseline scenario run only moves the frequency level", "[governor][scenario]") {
    const ThermalModel m = bundled();
    const Scenario sc = tiny_scenario(m);
    const ScenarioSummary sum = run_scenario(m, sc, Policy::baseline);

    CHECK(sum.migrations == 0);
    CHECK(sum.imminent_ticks == 0);
    for (const TickRecord& rec : sum.records) {
        CHECK(rec.migrate_pid == -1);
        CHECK(rec.level < sc.governor.freq_table.size());
    }
}

TEST_CASE("scenario without a settled idle state is rejected", "[governor][scenario]") {
    const ThermalModel m = bundled();
    Scenario sc = tiny_scenario(m);
    sc.floor_w[m.resource_index("big")] = 60.0;
    CHECK_THROWS_AS(run_scenario(m, sc, Policy::none), std::runtime_error);
}
