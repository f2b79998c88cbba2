#pragma once

// =============================================================================
// Transient simulation, envelope extraction, and first-order settling fits
// =============================================================================
//
// A trace is produced by iterating the linear step under a piecewise-constant
// dynamic-power schedule, with leakage re-evaluated from the current
// temperature each sample. The envelope of a noisy trace is its trailing
// window maximum. A first-order model
//
//   T(t) = T0 + (Tf - T0) * (1 - exp(-t / tau))
//
// is fitted to the envelope by damped Gauss-Newton over (Tf, tau) with T0
// pinned to the first sample; the fit yields the time left until the trace
// is within a tolerance of its settled value.

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "thermofix/model.hpp"

namespace thermofix {

struct ScheduleStep {
    double duration_s = 0.0;  ///< length of this segment
    Vector p_c;               ///< size M, dynamic power while the segment lasts
};

struct Trace {
    std::vector<double> times;    ///< seconds, starting at 0
    std::vector<Vector> temps;    ///< kelvin, temps[k] is the state at times[k]
    std::vector<Vector> powers;   ///< watts, total power drawn at times[k]
    bool runaway = false;         ///< any sample left the domain by 100 K or more
};

/// Iterates the model under a piecewise-constant schedule from `t0`.
[[nodiscard]] inline Trace simulate(const ThermalModel& model, const Vector& t0,
                                    const std::vector<ScheduleStep>& schedule) {
    if (t0.size() != model.n())
        throw std::invalid_argument("simulate: initial state has wrong dimension");
    Trace trace;
    Vector t = t0;
    double now = 0.0;
    trace.times.push_back(now);
    trace.temps.push_back(t);
    for (const auto& step_spec : schedule) {
        if (step_spec.p_c.size() != model.m())
            throw std::invalid_argument("simulate: schedule power has wrong dimension");
        if (!(step_spec.duration_s > 0.0))
            throw std::invalid_argument("simulate: schedule durations must be positive");
        const auto samples =
            static_cast<std::size_t>(std::llround(step_spec.duration_s / model.sample_period));
        for (std::size_t k = 0; k < samples; ++k) {
            const Vector p = total_power(model, t, step_spec.p_c);
            trace.powers.push_back(p);
            t = step(model, t, p);
            now += model.sample_period;
            trace.times.push_back(now);
            trace.temps.push_back(t);
            if (t.maxCoeff() > model.t_max + 100.0 || !t.allFinite()) {
                trace.runaway = true;
                return trace;
            }
        }
    }
    // final sample holds the last power level
    trace.powers.push_back(trace.powers.empty() ? Vector(Vector::Zero(model.m()))
                                                : trace.powers.back());
    return trace;
}

/// Trailing-window maximum of a scalar series.
[[nodiscard]] inline std::vector<double> envelope(const std::vector<double>& series,
                                                  std::size_t window = 10) {
    if (window == 0) throw std::invalid_argument("envelope: window must be positive");
    std::vector<double> out(series.size());
    std::deque<std::size_t> peak;  // indices with decreasing values
    for (std::size_t k = 0; k < series.size(); ++k) {
        while (!peak.empty() && series[peak.back()] <= series[k]) peak.pop_back();
        peak.push_back(k);
        if (peak.front() + window <= k) peak.pop_front();
        out[k] = series[peak.front()];
    }
    return out;
}

struct FirstOrderFit {
    double t0 = 0.0;        ///< kelvin, pinned to the first sample
    double t_final = 0.0;   ///< kelvin, fitted settled value
    double tau = 0.0;       ///< seconds, fitted time constant
    double rmse = 0.0;      ///< kelvin, residual of the returned fit
    bool converged = false;
};

/// Fits T(t) = t0 + (t_final - t0)(1 - exp(-t/tau)) by damped Gauss-Newton.
[[nodiscard]] inline FirstOrderFit fit_first_order(const std::vector<double>& times,
                                                   const std::vector<double>& values) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_first_order: times and values differ in length");
    if (times.size() < 3) throw std::invalid_argument("fit_first_order: needs at least 3 samples");

    FirstOrderFit fit;
    fit.t0 = values.front();
    const double span = times.back() - times.front();
    if (!(span > 0.0)) throw std::invalid_argument("fit_first_order: times must advance");

    double tf = values.back() + 1.0;
    double tau = span / 3.0;
    const auto rmse_of = [&](double tf_c, double tau_c) {
        double ss = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double t_rel = times[k] - times.front();
            const double pred = fit.t0 + (tf_c - fit.t0) * (1.0 - std::exp(-t_rel / tau_c));
            ss += (values[k] - pred) * (values[k] - pred);
        }
        return std::sqrt(ss / static_cast<double>(times.size()));
    };

    double best = rmse_of(tf, tau);
    for (int iter = 0; iter < 100; ++iter) {
        // accumulate J^T J and J^T r for the 2-parameter model
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double t_rel = times[k] - times.front();
            const double decay = std::exp(-t_rel / tau);
            const double pred = fit.t0 + (tf - fit.t0) * (1.0 - decay);
            const double r = values[k] - pred;
            const double d_tf = 1.0 - decay;
            const double d_tau = -(tf - fit.t0) * decay * t_rel / (tau * tau);
            jtj00 += d_tf * d_tf;
            jtj01 += d_tf * d_tau;
            jtj11 += d_tau * d_tau;
            jtr0 += d_tf * r;
            jtr1 += d_tau * r;
        }
        if (std::abs(jtr0) < 1e-10 && std::abs(jtr1) < 1e-10) {
            fit.converged = true;
            break;
        }
        const double det = jtj00 * jtj11 - jtj01 * jtj01;
        if (!(std::abs(det) > 1e-300)) break;
        const double step_tf = (jtj11 * jtr0 - jtj01 * jtr1) / det;
        const double step_tau = (jtj00 * jtr1 - jtj01 * jtr0) / det;

        // halve the step until it improves the residual
        double damping = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            const double tf_c = tf + damping * step_tf;
            const double tau_c = tau + damping * step_tau;
            if (tau_c > 1e-9) {
                const double cand = rmse_of(tf_c, tau_c);
                if (cand < best) {
                    tf = tf_c;
                    tau = tau_c;
                    best = cand;
                    accepted = true;
                    break;
                }
            }
            damping *= 0.5;
        }
        if (!accepted) {
            fit.converged = true;  // stalled at a local minimum
            break;
        }
    }
    fit.t_final = tf;
    fit.tau = tau;
    fit.rmse = best;
    return fit;
}

/// Seconds until the fitted trace is within `delta` of its settled value.
///
/// Measured from the end of the fitted window; 0 when already inside.
[[nodiscard]] inline double time_to_fixed_point(const FirstOrderFit& fit, double elapsed_s,
                                                double delta = 1.0) {
    if (!(delta > 0.0)) throw std::invalid_argument("time_to_fixed_point: delta must be positive");
    const double gap = std::abs(fit.t_final - fit.t0) * std::exp(-elapsed_s / fit.tau);
    if (gap <= delta) return 0.0;
    return fit.tau * std::log(gap / delta);
}

/// Steady-state kelvin-per-watt of the scalar reduction b / (1 - a).
[[nodiscard]] inline double thermal_resistance(double a, double b) {
    if (!(a < 1.0)) throw std::invalid_argument("thermal_resistance: requires a < 1");
    return b / (1.0 - a);
}

/// Differential steady-state resistance between two settled trace segments.
///
/// Both segments must be settled (last sample of each); the ratio is the
/// change in the hotspot temperature over the change in total drawn power.
[[nodiscard]] inline double trace_resistance(const Trace& before, const Trace& after,
                                             Eigen::Index hotspot) {
    if (before.temps.empty() || after.temps.empty())
        throw std::invalid_argument("trace_resistance: empty trace");
    const double dt = after.temps.back()[hotspot] - before.temps.back()[hotspot];
    const double dp = after.powers.back().sum() - before.powers.back().sum();
    if (std::abs(dp) < 1e-12)
        throw std::invalid_argument("trace_resistance: power levels are indistinguishable");
    return dt / dp;
}

}  // namespace thermofix
