#pragma once

// =============================================================================
// Microbenchmark of the plain versus accelerated Newton iteration
// =============================================================================
//
// Times full solves capped at k = 1..10 iterations with the convergence test
// disabled, so both variants perform identical iteration counts. Each timing
// is the median over many repetitions after a warmup; a running checksum of
// the produced iterates keeps the work observable.

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"

namespace thermofix {

struct BenchRow {
    int iterations = 0;
    double plain_ns = 0.0;
    double accelerated_ns = 0.0;
    double speedup = 0.0;  ///< plain_ns / accelerated_ns
};

struct BenchResult {
    std::vector<BenchRow> rows;
    double checksum = 0.0;
};

namespace detail {

template <class Fn>
[[nodiscard]] inline double median_ns(Fn&& fn, int reps, int warmup) {
    for (int i = 0; i < warmup; ++i) fn();
    std::vector<double> samples(static_cast<std::size_t>(reps));
    for (auto& sample : samples) {
        const auto begin = std::chrono::steady_clock::now();
        fn();
        const auto end = std::chrono::steady_clock::now();
        sample = std::chrono::duration<double, std::nano>(end - begin).count();
    }
    const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
    std::nth_element(samples.begin(), mid, samples.end());
    return *mid;
}

}  // namespace detail

/// Times capped solves for k = 1..max_iterations under both step variants.
[[nodiscard]] inline BenchResult bench_newton(const ThermalModel& model, const Vector& p_c,
                                              int max_iterations = 10, int reps = 1000,
                                              int warmup = 100) {
    if (max_iterations < 1) throw std::invalid_argument("bench_newton: need at least 1 iteration");
    if (reps < 1) throw std::invalid_argument("bench_newton: need at least 1 repetition");

    const AcceleratedWorkspace ws = build_workspace(model);
    BenchResult result;
    for (int k = 1; k <= max_iterations; ++k) {
        NewtonConfig cfg;
        cfg.tol = 0.0;  // never satisfied: run exactly k iterations
        cfg.max_iter = k;

        BenchRow row;
        row.iterations = k;
        cfg.use_acceleration = false;
        row.plain_ns = detail::median_ns(
            [&] { result.checksum += solve(model, ws, p_c, cfg).t_star.sum(); }, reps, warmup);
        cfg.use_acceleration = true;
        row.accelerated_ns = detail::median_ns(
            [&] { result.checksum += solve(model, ws, p_c, cfg).t_star.sum(); }, reps, warmup);
        row.speedup = row.plain_ns / row.accelerated_ns;
        result.rows.push_back(row);
    }
    return result;
}

}  // namespace thermofix
