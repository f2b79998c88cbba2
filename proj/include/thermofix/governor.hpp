#pragma once

// =============================================================================
// Proactive thermal governor and the reactive baseline it is compared against
// =============================================================================
//
// Each control tick the governor solves for the fixed point of the current
// power assignment and estimates, from a first-order fit of the temperature
// envelope, how long the plant still needs to settle. A violation is imminent
// when the settled peak would exceed the limit and settling completes sooner
// than the configured horizon; the response is to migrate the hottest
// eligible process off the big cluster. Fallbacks are conservative: a solver
// failure counts as an imminent violation, an unusable fit as zero time left.
//
// The baseline governor is purely reactive hysteresis stepping one frequency
// level on the spot.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"

namespace thermofix {

struct FreqLevel {
    double mhz = 0.0;
    double volts = 0.0;
};

/// Dynamic-power ratio of `level` against level 0: (f/f0) * (V/V0)^2.
[[nodiscard]] inline double freq_power_scale(const std::vector<FreqLevel>& table,
                                             std::size_t level) {
    if (table.empty()) throw std::invalid_argument("freq_power_scale: empty table");
    if (level >= table.size()) throw std::out_of_range("freq_power_scale: level out of range");
    const auto& top = table.front();
    const auto& cur = table[level];
    return (cur.mhz / top.mhz) * (cur.volts / top.volts) * (cur.volts / top.volts);
}

/// Throughput ratio of `level` against level 0: f/f0.
[[nodiscard]] inline double freq_speed_scale(const std::vector<FreqLevel>& table,
                                             std::size_t level) {
    if (table.empty()) throw std::invalid_argument("freq_speed_scale: empty table");
    if (level >= table.size()) throw std::out_of_range("freq_speed_scale: level out of range");
    return table[level].mhz / table.front().mhz;
}

struct GovernorConfig {
    double t_limit = 358.15;     ///< kelvin, temperature ceiling
    double t_horizon = 60.0;     ///< seconds, act when settling sooner than this
    double tick_s = 0.1;         ///< control period
    double power_window_s = 1.0; ///< attribution averaging window
    double delta = 1.0;          ///< kelvin, tolerance defining "settled"
    std::vector<FreqLevel> freq_table;  ///< level 0 is the fastest
};

/// Per-process attribution snapshot consumed by the migration picker.
struct ProcessStats {
    int pid = -1;
    bool realtime = false;
    bool on_big = false;
    double mean_big_power_w = 0.0;  ///< windowed mean of big-cluster draw
};

/// Pid of the hottest migratable process: on the big cluster, not realtime,
/// largest windowed mean power; ties resolve to the smaller pid. -1 if none.
[[nodiscard]] inline int hottest_process(const std::vector<ProcessStats>& procs) {
    int best = -1;
    double best_power = -1.0;
    for (const auto& proc : procs) {
        if (!proc.on_big || proc.realtime) continue;
        if (proc.mean_big_power_w > best_power ||
            (proc.mean_big_power_w == best_power && best != -1 && proc.pid < best)) {
            best = proc.pid;
            best_power = proc.mean_big_power_w;
        }
    }
    return best;
}

struct GovernorDecision {
    bool violation_imminent = false;
    bool conservative = false;   ///< a fallback path produced this decision
    double predicted_peak = std::numeric_limits<double>::quiet_NaN();  ///< kelvin
    double eta_s = 0.0;          ///< seconds until settled, as used
    int migrate_pid = -1;        ///< -1 when no migration is requested
};

/// One predictive control tick.
///
/// `eta_s` is the caller's latest settling estimate; pass `eta_valid = false`
/// when no usable fit exists, which is treated as "settling now".
[[nodiscard]] inline GovernorDecision control_tick(const ThermalModel& model,
                                                   const AcceleratedWorkspace& ws,
                                                   const GovernorConfig& cfg, const Vector& p_c,
                                                   double eta_s, bool eta_valid,
                                                   const std::vector<ProcessStats>& procs,
                                                   const NewtonConfig& solver = {}) {
    GovernorDecision decision;
    decision.eta_s = eta_valid ? eta_s : 0.0;
    if (!eta_valid) decision.conservative = true;

    const MimoSolution sol = solve(model, ws, p_c, solver);
    if (!sol.converged || sol.out_of_domain) {
        decision.violation_imminent = true;
        decision.conservative = true;
        if (sol.converged) decision.predicted_peak = sol.t_star.maxCoeff();
    } else {
        decision.predicted_peak = sol.t_star.maxCoeff();
        decision.violation_imminent =
            decision.predicted_peak > cfg.t_limit && decision.eta_s < cfg.t_horizon;
    }
    if (decision.violation_imminent) decision.migrate_pid = hottest_process(procs);
    return decision;
}

/// One reactive baseline tick: hysteresis of one frequency level.
///
/// Steps down (slower) above the limit, back up 2 K below it.
[[nodiscard]] inline std::size_t baseline_tick(const GovernorConfig& cfg, double t_hot,
                                               std::size_t level) {
    if (cfg.freq_table.empty()) throw std::invalid_argument("baseline_tick: empty table");
    if (level >= cfg.freq_table.size()) throw std::out_of_range("baseline_tick: level out of range");
    if (t_hot > cfg.t_limit) {
        if (level + 1 < cfg.freq_table.size()) return level + 1;
        return level;
    }
    if (t_hot < cfg.t_limit - 2.0 && level > 0) return level - 1;
    return level;
}

}  // namespace thermofix
