#pragma once

// =============================================================================
// Workload scenarios: process schedules driven through a governed tick loop
// =============================================================================
//
// A scenario describes a static power floor plus a set of processes, each
// demanding dynamic power on the big cluster, the little cluster (while
// migrated), and optionally the GPU, over an arrival/departure interval.
// `run_scenario` plays the schedule against the thermal model under one of
// three policies:
//
//   * predictive: fixed-point solve plus settling estimate each tick,
//     migrating the hottest eligible process when a violation is imminent,
//   * baseline: reactive one-level frequency hysteresis,
//   * none: uncontrolled.
//
// Tick order: restore expired migrations, compose power, snapshot per-process
// attribution, decide and apply the policy action, record, then step the
// plant. The governor sees a noisy measurement of the hottest sensor; summary
// metrics are computed from the true state. Migrations hold for one tick and
// persist only while the governor re-issues them.
//
// The model must name resources "big" and "little"; "gpu" is required only
// when a process draws GPU power.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermofix/governor.hpp"
#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"
#include "thermofix/trajectory.hpp"

namespace thermofix {

struct ProcessSpec {
    int pid = 0;
    std::string name;
    bool realtime = false;
    double big_w = 0.0;          ///< dynamic draw on the big cluster
    double little_w = 0.0;       ///< dynamic draw while migrated to little
    double gpu_w = 0.0;          ///< dynamic draw on the gpu resource
    double little_speed = 0.4;   ///< throughput ratio while migrated
    double arrival_s = 0.0;
    double departure_s = std::numeric_limits<double>::infinity();
};

struct Scenario {
    std::string name;
    double duration_s = 0.0;
    double noise_sigma = 0.0;    ///< kelvin, on the governor's measurement
    std::uint64_t noise_seed = 0;
    GovernorConfig governor;
    Vector floor_w;              ///< size M, always-on power per resource
    std::vector<ProcessSpec> processes;
};

enum class Policy { predictive, baseline, none };

[[nodiscard]] inline Policy parse_policy(const std::string& text) {
    if (text == "predictive") return Policy::predictive;
    if (text == "baseline") return Policy::baseline;
    if (text == "none") return Policy::none;
    throw std::invalid_argument("unknown policy: " + text);
}

[[nodiscard]] inline const char* policy_name(Policy policy) {
    switch (policy) {
        case Policy::predictive: return "predictive";
        case Policy::baseline: return "baseline";
        default: return "none";
    }
}

// =============================================================================
// Scenario JSON
// =============================================================================

[[nodiscard]] inline Scenario scenario_from_json(const nlohmann::json& j,
                                                 const ThermalModel& model) {
    const auto require = [&](const nlohmann::json& node, const char* key) -> const nlohmann::json& {
        if (!node.contains(key))
            throw std::runtime_error(std::string("scenario: missing key '") + key + "'");
        return node.at(key);
    };

    Scenario sc;
    sc.name = j.value("name", "scenario");
    sc.duration_s = require(j, "duration_s").get<double>();
    if (!(sc.duration_s > 0.0)) throw std::runtime_error("scenario: duration_s must be positive");
    sc.noise_sigma = j.value("noise_sigma_k", 0.0);
    sc.noise_seed = j.value("noise_seed", std::uint64_t{0});

    const auto& gov = require(j, "governor");
    sc.governor.t_limit = to_kelvin(require(gov, "t_limit_celsius").get<double>());
    sc.governor.t_horizon = require(gov, "t_horizon_s").get<double>();
    sc.governor.tick_s = gov.value("tick_s", 0.1);
    sc.governor.power_window_s = gov.value("power_window_s", 1.0);
    sc.governor.delta = gov.value("delta_k", 1.0);
    for (const auto& row : require(j, "freq_table")) {
        FreqLevel level;
        level.mhz = require(row, "mhz").get<double>();
        level.volts = require(row, "volts").get<double>();
        sc.governor.freq_table.push_back(level);
    }
    if (sc.governor.freq_table.empty())
        throw std::runtime_error("scenario: freq_table must not be empty");

    sc.floor_w = Vector::Zero(model.m());
    for (const auto& [key, value] : require(j, "floor_w").items())
        sc.floor_w[model.resource_index(key)] = value.get<double>();

    for (const auto& row : require(j, "processes")) {
        ProcessSpec spec;
        spec.pid = require(row, "pid").get<int>();
        spec.name = require(row, "name").get<std::string>();
        spec.realtime = row.value("realtime", false);
        spec.big_w = row.value("big_w", 0.0);
        spec.little_w = row.value("little_w", 0.0);
        spec.gpu_w = row.value("gpu_w", 0.0);
        spec.little_speed = row.value("little_speed", 0.4);
        spec.arrival_s = row.value("arrival_s", 0.0);
        spec.departure_s = row.value("departure_s", sc.duration_s);
        sc.processes.push_back(spec);
    }
    for (std::size_t i = 0; i < sc.processes.size(); ++i)
        for (std::size_t k = i + 1; k < sc.processes.size(); ++k)
            if (sc.processes[i].pid == sc.processes[k].pid)
                throw std::runtime_error("scenario: duplicate pid");
    return sc;
}

// =============================================================================
// Scenario execution
// =============================================================================

struct TickRecord {
    double time_s = 0.0;
    double t_hot_true = 0.0;   ///< kelvin
    double t_hot_meas = 0.0;   ///< kelvin
    std::size_t level = 0;
    double p_big = 0.0;
    double p_little = 0.0;
    double p_gpu = 0.0;
    bool imminent = false;
    int migrate_pid = -1;
};

struct ProcessOutcome {
    int pid = 0;
    std::string name;
    bool realtime = false;
    double active_s = 0.0;
    double proxy_units = 0.0;     ///< seconds of full-speed-equivalent work
    double proxy_fraction = 0.0;  ///< proxy_units / active_s
    long migrations = 0;
};

struct ScenarioSummary {
    std::string scenario;
    Policy policy = Policy::none;
    double duration_s = 0.0;
    double time_above_limit_s = 0.0;
    double peak_temp = 0.0;       ///< kelvin, true state
    long migrations = 0;
    long imminent_ticks = 0;
    long conservative_ticks = 0;
    std::size_t final_level = 0;
    bool runaway = false;
    std::vector<ProcessOutcome> processes;
    std::vector<TickRecord> records;
};

namespace detail {

struct ProcessState {
    bool on_little = false;
    double restore_at = -1.0;
    std::deque<double> window;    ///< recent big-cluster draw samples
    double proxy_units = 0.0;
    double active_s = 0.0;
    long migrations = 0;
};

[[nodiscard]] inline double window_mean(const std::deque<double>& window) {
    if (window.empty()) return 0.0;
    double sum = 0.0;
    for (double w : window) sum += w;
    return sum / static_cast<double>(window.size());
}

}  // namespace detail

/// Plays a scenario under the given policy and returns its summary.
[[nodiscard]] inline ScenarioSummary run_scenario(const ThermalModel& model, const Scenario& sc,
                                                  Policy policy) {
    const auto big = model.resource_index("big");
    const auto little = model.resource_index("little");
    Eigen::Index gpu = -1;
    for (const auto& spec : sc.processes)
        if (spec.gpu_w > 0.0) gpu = model.resource_index("gpu");

    const AcceleratedWorkspace ws = build_workspace(model);
    const GovernorConfig& cfg = sc.governor;
    const double tick = cfg.tick_s;
    const auto ticks = static_cast<long>(std::llround(sc.duration_s / tick));
    const auto window_ticks =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.power_window_s / tick)));
    const auto fit_window_ticks = static_cast<std::size_t>(std::llround(200.0 / tick));
    const auto refit_every = std::max<long>(1, std::llround(1.0 / tick));

    ScenarioSummary out;
    out.scenario = sc.name;
    out.policy = policy;
    out.duration_s = sc.duration_s;
    out.records.reserve(static_cast<std::size_t>(ticks));

    // start settled at the power floor
    const MimoSolution idle = solve(model, ws, sc.floor_w);
    if (!idle.converged) throw std::runtime_error("run_scenario: no settled idle state");
    Vector t = idle.t_star;

    std::vector<detail::ProcessState> procs(sc.processes.size());
    std::mt19937_64 rng(sc.noise_seed);
    std::normal_distribution<double> noise(0.0, sc.noise_sigma);

    std::vector<double> meas_times;
    std::vector<double> meas_series;
    meas_times.reserve(static_cast<std::size_t>(ticks));
    meas_series.reserve(static_cast<std::size_t>(ticks));
    FirstOrderFit fit;
    bool fit_ok = false;
    double fit_window_start = 0.0;
    std::size_t level = 0;

    const auto compose = [&](double now) {
        Vector p_c = sc.floor_w;
        const double pscale = freq_power_scale(cfg.freq_table, level);
        for (std::size_t i = 0; i < sc.processes.size(); ++i) {
            const auto& spec = sc.processes[i];
            if (now < spec.arrival_s || now >= spec.departure_s) continue;
            if (procs[i].on_little)
                p_c[little] += spec.little_w;
            else
                p_c[big] += spec.big_w * pscale;
            if (spec.gpu_w > 0.0) p_c[gpu] += spec.gpu_w;
        }
        return p_c;
    };

    for (long k = 0; k < ticks; ++k) {
        const double now = static_cast<double>(k) * tick;

        // restore expired migrations
        for (auto& state : procs)
            if (state.on_little && state.restore_at <= now) state.on_little = false;

        Vector p_c = compose(now);

        // attribution snapshot of big-cluster demand
        const double pscale = freq_power_scale(cfg.freq_table, level);
        std::vector<ProcessStats> stats;
        for (std::size_t i = 0; i < sc.processes.size(); ++i) {
            const auto& spec = sc.processes[i];
            const bool active = now >= spec.arrival_s && now < spec.departure_s;
            if (!active || spec.big_w <= 0.0) continue;
            auto& state = procs[i];
            state.window.push_back(state.on_little ? 0.0 : spec.big_w * pscale);
            while (state.window.size() > window_ticks) state.window.pop_front();
            ProcessStats row;
            row.pid = spec.pid;
            row.realtime = spec.realtime;
            row.on_big = !state.on_little;
            row.mean_big_power_w = detail::window_mean(state.window);
            stats.push_back(row);
        }

        // measurement and settling estimate
        const double t_true = t.maxCoeff();
        const double t_meas = t_true + (sc.noise_sigma > 0.0 ? noise(rng) : 0.0);
        meas_times.push_back(now);
        meas_series.push_back(t_meas);
        if (k % refit_every == 0 && meas_series.size() >= 30) {
            const std::size_t count = std::min(fit_window_ticks, meas_series.size());
            const std::size_t first = meas_series.size() - count;
            const std::vector<double> wt(meas_times.begin() + static_cast<std::ptrdiff_t>(first),
                                         meas_times.end());
            const std::vector<double> wv(meas_series.begin() + static_cast<std::ptrdiff_t>(first),
                                         meas_series.end());
            const std::vector<double> env = envelope(wv, 10);
            fit = fit_first_order(wt, env);
            fit_window_start = wt.front();
            // a time constant far beyond the observed span is pure extrapolation,
            // typically a degenerate fit of a flat window; treat it as unusable
            const double span = wt.back() - wt.front();
            fit_ok = fit.converged && std::isfinite(fit.t_final) && fit.tau > 0.0 &&
                     fit.tau <= 5.0 * span;
        }
        double eta = 0.0;
        if (fit_ok) eta = time_to_fixed_point(fit, now - fit_window_start, cfg.delta);

        // policy action
        TickRecord rec;
        rec.time_s = now;
        rec.level = level;
        if (policy == Policy::predictive) {
            const GovernorDecision decision =
                control_tick(model, ws, cfg, p_c, eta, fit_ok, stats);
            rec.imminent = decision.violation_imminent;
            rec.migrate_pid = decision.migrate_pid;
            if (decision.violation_imminent) ++out.imminent_ticks;
            if (decision.conservative) ++out.conservative_ticks;
            if (decision.migrate_pid >= 0) {
                for (std::size_t i = 0; i < sc.processes.size(); ++i) {
                    if (sc.processes[i].pid != decision.migrate_pid) continue;
                    if (sc.processes[i].realtime)
                        throw std::logic_error("run_scenario: migration targeted a realtime process");
                    if (!procs[i].on_little) {
                        ++procs[i].migrations;
                        ++out.migrations;
                    }
                    procs[i].on_little = true;
                    procs[i].restore_at = now + tick * 1.5;
                }
                p_c = compose(now);
            }
        } else if (policy == Policy::baseline) {
            const std::size_t next = baseline_tick(cfg, t_meas, level);
            if (next != level) {
                level = next;
                p_c = compose(now);
            }
            rec.level = level;
        }

        // record against the true state
        rec.t_hot_true = t_true;
        rec.t_hot_meas = t_meas;
        rec.p_big = p_c[big];
        rec.p_little = p_c[little];
        rec.p_gpu = gpu >= 0 ? p_c[gpu] : 0.0;
        out.records.push_back(rec);
        if (t_true > cfg.t_limit) out.time_above_limit_s += tick;
        out.peak_temp = std::max(out.peak_temp, t_true);

        // work proxy accrual
        const double speed_big = freq_speed_scale(cfg.freq_table, level);
        for (std::size_t i = 0; i < sc.processes.size(); ++i) {
            const auto& spec = sc.processes[i];
            if (now < spec.arrival_s || now >= spec.departure_s) continue;
            auto& state = procs[i];
            state.active_s += tick;
            double speed = 1.0;
            if (spec.big_w > 0.0) speed = state.on_little ? spec.little_speed : speed_big;
            state.proxy_units += speed * tick;
        }

        // advance the plant
        t = step(model, t, total_power(model, t, p_c));
        if (!t.allFinite() || t.maxCoeff() > model.t_max + 100.0) {
            out.runaway = true;
            break;
        }
    }

    out.final_level = level;
    for (std::size_t i = 0; i < sc.processes.size(); ++i) {
        ProcessOutcome po;
        po.pid = sc.processes[i].pid;
        po.name = sc.processes[i].name;
        po.realtime = sc.processes[i].realtime;
        po.active_s = procs[i].active_s;
        po.proxy_units = procs[i].proxy_units;
        po.proxy_fraction = po.active_s > 0.0 ? po.proxy_units / po.active_s : 1.0;
        po.migrations = procs[i].migrations;
        out.processes.push_back(po);
    }
    return out;
}

}  // namespace thermofix
