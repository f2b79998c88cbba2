#pragma once

// =============================================================================
// Guaranteed-convergence region of the Newton map over a power grid
// =============================================================================
//
// A power cell (p_cpu, p_gpu) is guaranteed when the Newton map g is a
// contraction from the temperature box into itself:
//
//   * range containment: g(T) stays inside [t_min, t_max] componentwise for
//     every probe T, and
//   * contraction: the max-norm of a central finite-difference Jacobian of g
//     stays below 1 at every probe.
//
// Probes grid the two leakage-driving hotspot axes; the remaining hotspot
// coordinates are pinned to the affine response (I - A)^{-1} B P evaluated
// with leakage at the gridded driving temperatures, which is where the
// non-driving components land after one affine step.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"

namespace thermofix {

struct SweepSpec {
    double cpu_min = 0.0024;  ///< watts, swept on the CPU-cluster resource
    double cpu_max = 4.0;
    double cpu_step = 0.16;
    double gpu_min = 0.0024;  ///< watts, swept on the GPU resource
    double gpu_max = 4.0;
    double gpu_step = 0.16;
    Vector fixed_powers;      ///< size M; swept entries are overwritten
    int temp_grid_density = 9;
    double fd_step = 0.01;    ///< kelvin, central-difference probe
};

struct CellResult {
    double p_cpu = 0.0;
    double p_gpu = 0.0;
    bool guaranteed = false;
    bool range_contained = false;
    double max_jacobian_norm = 0.0;
    bool singular = false;  ///< a probe hit a singular Newton step
};

struct SweepResult {
    std::vector<CellResult> cells;  ///< row-major: cpu outer, gpu inner, both ascending
    std::vector<double> cpu_values;
    std::vector<double> gpu_values;
    int cpu_resource = -1;
    int gpu_resource = -1;
};

/// Contraction check for one power vector.
///
/// Requires exactly two active leakage resources (a CPU-like and a GPU-like
/// axis); the driving hotspot axes are gridded with `density` points each.
[[nodiscard]] inline CellResult check_contraction(const ThermalModel& model,
                                                  const AcceleratedWorkspace& ws, const Vector& p_c,
                                                  int density, double fd_step) {
    if (ws.rank() != 2)
        throw std::invalid_argument("check_contraction: needs exactly two active leakage resources");
    if (density < 2) throw std::invalid_argument("check_contraction: grid density must be >= 2");

    CellResult cell;
    cell.range_contained = true;
    const auto n = model.n();
    const int d0 = ws.driving[0];
    const int d1 = ws.driving[1];
    const Matrix gain = -ws.ainv_b;  // (I - A)^{-1} B

    std::vector<double> axis(static_cast<std::size_t>(density));
    for (int i = 0; i < density; ++i)
        axis[static_cast<std::size_t>(i)] =
            model.t_min + (model.t_max - model.t_min) * i / (density - 1);

    const auto eval_g = [&](const Vector& t) { return newton_function(model, ws, t, p_c); };

    Vector t(n);
    for (double t0 : axis) {
        for (double t1 : axis) {
            // assemble the probe: gridded driving axes, affine response elsewhere
            t.setConstant(model.ambient);
            t[d0] = t0;
            t[d1] = t1;
            Vector p_total = p_c;
            for (Eigen::Index k = 0; k < ws.rank(); ++k) {
                const auto j = ws.active[static_cast<std::size_t>(k)];
                p_total[j] += leakage_power(model.leakage[static_cast<std::size_t>(j)],
                                            t[ws.driving[static_cast<std::size_t>(k)]]);
            }
            const Vector affine = gain * p_total;
            for (Eigen::Index i = 0; i < n; ++i)
                if (i != d0 && i != d1) t[i] = affine[i];

            try {
                const Vector g = eval_g(t);
                if (g.minCoeff() < model.t_min || g.maxCoeff() > model.t_max)
                    cell.range_contained = false;

                // max-norm of the finite-difference Jacobian of g
                Matrix jg(n, n);
                Vector probe = t;
                for (Eigen::Index k = 0; k < n; ++k) {
                    probe[k] = t[k] + fd_step;
                    const Vector gp = eval_g(probe);
                    probe[k] = t[k] - fd_step;
                    const Vector gm = eval_g(probe);
                    probe[k] = t[k];
                    jg.col(k) = (gp - gm) / (2.0 * fd_step);
                }
                const double norm = jg.cwiseAbs().rowwise().sum().maxCoeff();
                if (norm > cell.max_jacobian_norm) cell.max_jacobian_norm = norm;
            } catch (const std::exception&) {
                cell.singular = true;
                cell.range_contained = false;
            }
        }
    }
    cell.guaranteed = cell.range_contained && !cell.singular && cell.max_jacobian_norm < 1.0;
    return cell;
}

/// Sweeps the power grid; cell order is fixed (cpu outer, gpu inner).
///
/// The two swept resources are the active leakage resources in resource
/// order: the first is the CPU-like axis, the second the GPU-like axis.
[[nodiscard]] inline SweepResult sweep(const ThermalModel& model, const AcceleratedWorkspace& ws,
                                       const SweepSpec& spec) {
    if (ws.rank() != 2)
        throw std::invalid_argument("sweep: needs exactly two active leakage resources");
    if (spec.fixed_powers.size() != model.m())
        throw std::invalid_argument("sweep: fixed_powers must have one entry per resource");
    if (!(spec.cpu_step > 0.0) || !(spec.gpu_step > 0.0))
        throw std::invalid_argument("sweep: steps must be positive");

    SweepResult out;
    out.cpu_resource = ws.active[0];
    out.gpu_resource = ws.active[1];
    for (double p = spec.cpu_min; p <= spec.cpu_max + 1e-12; p += spec.cpu_step)
        out.cpu_values.push_back(p);
    for (double p = spec.gpu_min; p <= spec.gpu_max + 1e-12; p += spec.gpu_step)
        out.gpu_values.push_back(p);

    Vector p_c = spec.fixed_powers;
    for (double pc : out.cpu_values) {
        for (double pg : out.gpu_values) {
            p_c[out.cpu_resource] = pc;
            p_c[out.gpu_resource] = pg;
            CellResult cell =
                check_contraction(model, ws, p_c, spec.temp_grid_density, spec.fd_step);
            cell.p_cpu = pc;
            cell.p_gpu = pg;
            out.cells.push_back(cell);
        }
    }
    return out;
}

/// Indices of guaranteed cells that touch a non-guaranteed 4-neighbor.
[[nodiscard]] inline std::vector<std::size_t> boundary_cells(const SweepResult& sweep_result) {
    const auto nx = sweep_result.cpu_values.size();
    const auto ny = sweep_result.gpu_values.size();
    std::vector<std::size_t> out;
    const auto at = [&](std::size_t ix, std::size_t iy) -> const CellResult& {
        return sweep_result.cells[ix * ny + iy];
    };
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) {
            if (!at(ix, iy).guaranteed) continue;
            const bool edge =
                (ix > 0 && !at(ix - 1, iy).guaranteed) ||
                (ix + 1 < nx && !at(ix + 1, iy).guaranteed) ||
                (iy > 0 && !at(ix, iy - 1).guaranteed) ||
                (iy + 1 < ny && !at(ix, iy + 1).guaranteed);
            if (edge) out.push_back(ix * ny + iy);
        }
    }
    return out;
}

/// Largest total swept power among guaranteed cells.
[[nodiscard]] inline double containment_knee(const SweepResult& sweep_result) {
    double knee = 0.0;
    for (const auto& cell : sweep_result.cells)
        if (cell.guaranteed && cell.p_cpu + cell.p_gpu > knee) knee = cell.p_cpu + cell.p_gpu;
    return knee;
}

}  // namespace thermofix
