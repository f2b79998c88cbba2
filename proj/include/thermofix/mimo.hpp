#pragma once

// =============================================================================
// Multivariate fixed-point search: plain and low-rank accelerated Newton
// =============================================================================
//
// Fixed points solve f(T) = (A - I) T + B P(T) = 0. The Jacobian is
//
//     J(T) = (A - I) + sum_j p2_j * s'_j(T_d(j)) * b_j e_d(j)^T
//
// with one rank-1 term per active leakage resource j (p2_j = V_j kappa1_j,
// b_j = column j of B, d(j) its driving hotspot, s(T) = T^2 exp(kappa2/T)
// and s'(T) = exp(kappa2/T)(2T - kappa2)).
//
// The plain step assembles J and runs a dense LU solve per iteration. The
// accelerated step never forms J: with f1 = (A - I)^{-1} f the step matrix
// factors as I + U diag(s') Vsel, whose inverse is
//
//     I - U (diag(1/s') + Vsel U)^{-1} Vsel
//
// so one step costs a few matrix-vector products against factors that are
// precomputed once per model ((A - I)^{-1}, U, Vsel U) plus the r x r core
// solve, closed-form for r <= 2. With no active leakage the step reduces to
// the affine solution dT = -f1.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermofix/model.hpp"
#include "thermofix/siso.hpp"

namespace thermofix {

struct NewtonConfig {
    double tol = 1e-6;            ///< kelvin, on the max-norm of the step
    int max_iter = 50;
    bool use_acceleration = true;
    bool seed_from_siso = false;  ///< seed from per-hotspot scalar fixed points
};

/// Factors precomputed once per model for the accelerated step.
struct AcceleratedWorkspace {
    Matrix ainv;               ///< (A - I)^{-1}
    Matrix ainv_b;             ///< (A - I)^{-1} B
    Matrix u;                  ///< N x r, columns p2_j * (A - I)^{-1} b_j
    Matrix vu;                 ///< r x r, Vsel * U
    std::vector<int> active;   ///< active resource indices, resource order
    std::vector<int> driving;  ///< driving hotspot per active resource
    Vector p2;                 ///< V_j * kappa1_j per active resource

    [[nodiscard]] Eigen::Index rank() const { return static_cast<Eigen::Index>(active.size()); }
};

/// Builds the workspace; verifies the inverse to 1e-10 before returning it.
[[nodiscard]] inline AcceleratedWorkspace build_workspace(const ThermalModel& model) {
    AcceleratedWorkspace ws;
    const auto n = model.n();
    const Matrix a_minus_i = model.a - Matrix::Identity(n, n);
    Eigen::PartialPivLU<Matrix> lu(a_minus_i);
    ws.ainv = lu.inverse();
    const double residual = (ws.ainv * a_minus_i - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(residual <= 1e-10))
        throw std::runtime_error("build_workspace: (A - I) inverse residual " +
                                 std::to_string(residual) + " exceeds 1e-10");
    ws.ainv_b = ws.ainv * model.b;

    ws.active = model.active_leakage();
    const auto r = static_cast<Eigen::Index>(ws.active.size());
    ws.u.resize(n, r);
    ws.p2.resize(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const auto& lk = model.leakage[static_cast<std::size_t>(ws.active[static_cast<std::size_t>(k)])];
        ws.driving.push_back(lk.driving_hotspot);
        ws.p2[k] = lk.v * lk.kappa1;
        ws.u.col(k) = ws.p2[k] * ws.ainv_b.col(ws.active[static_cast<std::size_t>(k)]);
    }
    ws.vu.resize(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index k = 0; k < r; ++k)
            ws.vu(i, k) = ws.u(ws.driving[static_cast<std::size_t>(i)], k);
    return ws;
}

/// f(T) = (A - I) T + B * total power at T.
[[nodiscard]] inline Vector residual(const ThermalModel& model, const Vector& t, const Vector& p_c) {
    return (model.a - Matrix::Identity(model.n(), model.n())) * t +
           model.b * total_power(model, t, p_c);
}

/// Dense Jacobian of f at T.
[[nodiscard]] inline Matrix jacobian(const ThermalModel& model, const Vector& t) {
    Matrix j = model.a - Matrix::Identity(model.n(), model.n());
    for (std::size_t k = 0; k < model.leakage.size(); ++k) {
        const auto& lk = model.leakage[k];
        if (!lk.active) continue;
        const double slope = leakage_slope(lk, t[lk.driving_hotspot]);
        j.col(lk.driving_hotspot) += model.b.col(static_cast<Eigen::Index>(k)) * slope;
    }
    return j;
}

/// One plain Newton step: solves J dT = -f with dense LU.
///
/// Returns nullopt when the factorization is singular to working precision.
[[nodiscard]] inline std::optional<Vector> newton_step_plain(const ThermalModel& model,
                                                             const Vector& t, const Vector& p_c) {
    const Matrix j = jacobian(model, t);
    Eigen::PartialPivLU<Matrix> lu(j);
    const Vector f = residual(model, t, p_c);
    const Vector dt = lu.solve(-f);
    if (!dt.allFinite()) return std::nullopt;
    if ((j * dt + f).cwiseAbs().maxCoeff() > 1e-6 * (1.0 + f.cwiseAbs().maxCoeff()))
        return std::nullopt;
    return dt;
}

namespace detail {

/// s'(T) per active resource; throws on degenerate (underflowed) slopes.
[[nodiscard]] inline Vector leak_slopes(const ThermalModel& model, const AcceleratedWorkspace& ws,
                                        const Vector& t) {
    Vector s(ws.rank());
    for (Eigen::Index k = 0; k < ws.rank(); ++k) {
        const auto& lk = model.leakage[static_cast<std::size_t>(ws.active[static_cast<std::size_t>(k)])];
        const double td = t[ws.driving[static_cast<std::size_t>(k)]];
        if (!(td > 0.0)) throw std::domain_error("accelerated step: temperature must be positive");
        const double slope = std::exp(lk.kappa2 / td) * (2.0 * td - lk.kappa2);
        if (std::abs(slope) < 1e-300)
            throw std::domain_error("accelerated step: degenerate leakage slope (|s'| < 1e-300)");
        s[k] = slope;
    }
    return s;
}

/// Solves (diag(1/s) + VU) x = rhs; closed-form for r <= 2.
[[nodiscard]] inline std::optional<Vector> core_solve(const Matrix& vu, const Vector& s,
                                                      const Vector& rhs) {
    const auto r = s.size();
    if (r == 1) {
        const double core = 1.0 / s[0] + vu(0, 0);
        if (core == 0.0 || !std::isfinite(core)) return std::nullopt;
        return Vector::Constant(1, rhs[0] / core);
    }
    if (r == 2) {
        const double a = 1.0 / s[0] + vu(0, 0);
        const double b = vu(0, 1);
        const double c = vu(1, 0);
        const double d = 1.0 / s[1] + vu(1, 1);
        const double det = a * d - b * c;
        if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
        Vector x(2);
        x[0] = (d * rhs[0] - b * rhs[1]) / det;
        x[1] = (a * rhs[1] - c * rhs[0]) / det;
        return x;
    }
    Matrix core = vu;
    for (Eigen::Index k = 0; k < r; ++k) core(k, k) += 1.0 / s[k];
    Eigen::PartialPivLU<Matrix> lu(core);
    Vector x = lu.solve(rhs);
    if (!x.allFinite()) return std::nullopt;
    return x;
}

}  // namespace detail

/// One accelerated Newton step via the low-rank inverse update.
///
/// `c1` must be ainv_b * p_c for the p_c in use (constant across a solve).
[[nodiscard]] inline std::optional<Vector> newton_step_accelerated(const ThermalModel& model,
                                                                   const AcceleratedWorkspace& ws,
                                                                   const Vector& t, const Vector& c1) {
    const auto r = ws.rank();
    // f1 = (A - I)^{-1} f = t + c1 + sum_k s_k u_k, with s_k = T_d^2 exp(k2/T_d).
    Vector f1 = t + c1;
    for (Eigen::Index k = 0; k < r; ++k) {
        const auto& lk = model.leakage[static_cast<std::size_t>(ws.active[static_cast<std::size_t>(k)])];
        const double td = t[ws.driving[static_cast<std::size_t>(k)]];
        if (!(td > 0.0)) throw std::domain_error("accelerated step: temperature must be positive");
        f1 += (td * td * std::exp(lk.kappa2 / td)) * ws.u.col(k);
    }
    if (r == 0) return Vector(-f1);

    const Vector s = detail::leak_slopes(model, ws, t);
    Vector vf(r);
    for (Eigen::Index k = 0; k < r; ++k) vf[k] = f1[ws.driving[static_cast<std::size_t>(k)]];
    const auto core = detail::core_solve(ws.vu, s, vf);
    if (!core) return std::nullopt;
    Vector dt = -(f1 - ws.u * (*core));
    if (!dt.allFinite()) return std::nullopt;
    return dt;
}

/// Newton map g(T) = T + dT(T), the function whose contraction properties
/// delimit the guaranteed-convergence region.
[[nodiscard]] inline Vector newton_function(const ThermalModel& model, const AcceleratedWorkspace& ws,
                                            const Vector& t, const Vector& p_c) {
    const Vector c1 = ws.ainv_b * p_c;
    const auto dt = newton_step_accelerated(model, ws, t, c1);
    if (!dt) throw std::runtime_error("newton_function: singular step");
    return t + *dt;
}

struct MimoSolution {
    Vector t_star;                       ///< fixed-point temperatures, kelvin
    std::vector<PowerBreakdown> p_star;  ///< per-resource power at the fixed point
    int iterations = 0;
    double residual_norm = 0.0;          ///< max-norm of f at the returned point
    bool converged = false;
    Vector seed;                         ///< the initial iterate used
    bool out_of_domain = false;          ///< fixed point left [t_min, t_max]
    std::string note;                    ///< failure detail when not converged
};

namespace detail {

/// Per-hotspot scalar seed: stable scalar fixed point where leakage feedback
/// applies, affine response elsewhere, ambient as the safety net.
[[nodiscard]] inline Vector siso_seed(const ThermalModel& model, const AcceleratedWorkspace& ws,
                                      const Vector& p_c) {
    const auto n = model.n();
    const Matrix gain = -ws.ainv_b;  // (I - A)^{-1} B
    Vector seed(n);
    const Vector affine = gain * p_c;
    for (Eigen::Index i = 0; i < n; ++i) {
        seed[i] = affine[i] > 0.0 ? affine[i] : model.ambient;
        const double a_i = model.a.row(i).sum();
        if (!(a_i < 1.0)) continue;
        for (Eigen::Index k = 0; k < ws.rank(); ++k) {
            if (ws.driving[static_cast<std::size_t>(k)] != i) continue;
            const auto j = ws.active[static_cast<std::size_t>(k)];
            const auto& lk = model.leakage[static_cast<std::size_t>(j)];
            // Fold this hotspot's own leakage loop into scalar constants:
            // T = a T + b (P_eff + V k1_eff T^2 e^{k2/T}) reproduces the row's
            // affine gain and its leakage gain G_ij p2_j.
            const double b_i = 1.0 - a_i;  // unit-gain scalar model: theta = 1
            const double p_eff = affine[i];
            const double k1_eff = gain(i, j) * ws.p2[k] / lk.v;
            if (!(p_eff > 0.0) || !(k1_eff > 0.0)) continue;
            try {
                const auto ab = derive_alpha_beta(a_i, b_i, p_eff, lk.v, k1_eff, lk.kappa2);
                const auto ex = existence_test(ab.alpha, ab.beta);
                if (!ex.two_fixed_points) continue;  // keep affine/ambient fallback
                const auto pts = kelvin_fixed_points(ab.alpha, ab.beta, lk.kappa2);
                seed[i] = pts.t_stable;
            } catch (const std::exception&) {
                // keep the affine fallback
            }
        }
    }
    return seed;
}

}  // namespace detail

/// Newton iteration to a fixed point of the power-temperature dynamics.
///
/// Seeds from the ambient vector unless seed_from_siso is set. On a singular
/// step the iteration retries once with the damped affine step -f1/2; a
/// second failure reports converged = false with a condition estimate.
[[nodiscard]] inline MimoSolution solve(const ThermalModel& model, const AcceleratedWorkspace& ws,
                                        const Vector& p_c, const NewtonConfig& config = {}) {
    if (p_c.size() != model.m()) throw std::invalid_argument("solve: power vector size mismatch");
    MimoSolution sol;
    sol.seed = config.seed_from_siso ? detail::siso_seed(model, ws, p_c) : model.ambient_vector();
    Vector t = sol.seed;
    const Vector c1 = ws.ainv_b * p_c;
    bool retried = false;

    for (int it = 0; it < config.max_iter; ++it) {
        std::optional<Vector> dt;
        try {
            dt = config.use_acceleration ? newton_step_accelerated(model, ws, t, c1)
                                         : newton_step_plain(model, t, p_c);
        } catch (const std::domain_error& e) {
            sol.note = e.what();
            break;
        }
        if (!dt) {
            if (retried) {
                const Matrix j = jacobian(model, t);
                const double cond = j.cwiseAbs().rowwise().sum().maxCoeff() *
                                    (ws.ainv.cwiseAbs().rowwise().sum().maxCoeff());
                sol.note = "singular Jacobian after damped retry (condition >= " +
                           std::to_string(cond) + ")";
                break;
            }
            retried = true;
            Vector f1 = ws.ainv * residual(model, t, p_c);
            t += -0.5 * f1;
            sol.iterations = it + 1;
            continue;
        }
        t += *dt;
        sol.iterations = it + 1;
        if (!t.allFinite() || t.minCoeff() <= 0.0) {
            sol.note = "iterate left the positive-temperature region";
            break;
        }
        if (dt->cwiseAbs().maxCoeff() < config.tol) {
            sol.converged = true;
            break;
        }
    }

    sol.t_star = t;
    if (t.allFinite() && t.minCoeff() > 0.0) {
        sol.residual_norm = residual(model, t, p_c).cwiseAbs().maxCoeff();
        sol.p_star = power_vector(model, t, p_c);
        sol.out_of_domain = t.minCoeff() < model.t_min || t.maxCoeff() > model.t_max;
    } else {
        sol.residual_norm = std::numeric_limits<double>::quiet_NaN();
        sol.converged = false;
    }
    return sol;
}

}  // namespace thermofix
