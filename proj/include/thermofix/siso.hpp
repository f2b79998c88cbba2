#pragma once

// =============================================================================
// Scalar fixed-point theory for one hotspot with exponential leakage
// =============================================================================
//
// The scalar model T <- a T + b P(T) with P(T) = P_C + V k1 T^2 exp(k2 / T)
// is analyzed in the auxiliary coordinate t = -k2 / T (dimensionless,
// decreasing in T). Fixed points are the roots of
//
//     F(t) = ln(beta) + ln(t) + ln(1 - alpha t) + t        on (0, 1/alpha)
//
// with alpha = (b / (a - 1)) (P_C / k2) and beta = ((a - 1) / b) / (V k1 k2),
// both positive for a < 1, k2 < 0. F is concave with a single interior
// maximum, so there are either no roots (thermal runaway from every start)
// or two: an unstable root t_u below the maximum and a stable root t_s above
// it. In kelvin the unstable fixed point is the hotter one.
//
// One scalar iteration moves t up exactly where F(t) > 0 and down where
// F(t) < 0 (equivalently kelvin T moves down/up), which is what makes t_u
// the separatrix: starts with t0 < t_u drift to t -> 0 (kelvin runaway),
// starts with t0 > t_u converge to t_s.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace thermofix {

/// alpha/beta pair of the auxiliary fixed-point equation.
template <class Real>
struct AlphaBeta {
    Real alpha;
    Real beta;
};

template <class Real>
struct Existence {
    bool two_fixed_points;  ///< true when roots exist (tangency included)
    bool marginal;          ///< true when the roots coincide (tangency)
    Real t_tilde_m;         ///< location of the maximum of F
    Real beta_crit;         ///< existence threshold on beta
    Real margin;            ///< F(t_tilde_m) = ln(beta) - ln(beta_crit)
};

template <class Real>
struct FixedPointPair {
    Real t_tilde_u;  ///< unstable root, below the maximum
    Real t_tilde_s;  ///< stable root, above the maximum
    bool marginal;   ///< roots coincide at the maximum
};

enum class StartClass { runaway, converges_to_stable };

/// Auxiliary coordinate t = -kappa2 / T for kelvin T > 0, kappa2 < 0.
template <class Real>
[[nodiscard]] Real to_auxiliary(Real t_kelvin, Real kappa2) {
    if (!(t_kelvin > Real(0))) throw std::domain_error("to_auxiliary: temperature must be positive");
    if (!(kappa2 < Real(0))) throw std::domain_error("to_auxiliary: kappa2 must be negative");
    return -kappa2 / t_kelvin;
}

/// Inverse map T = -kappa2 / t.
template <class Real>
[[nodiscard]] Real from_auxiliary(Real t_tilde, Real kappa2) {
    if (!(t_tilde > Real(0))) throw std::domain_error("from_auxiliary: coordinate must be positive");
    if (!(kappa2 < Real(0))) throw std::domain_error("from_auxiliary: kappa2 must be negative");
    return -kappa2 / t_tilde;
}

/// Derives (alpha, beta) from the scalar model constants.
///
/// Requires a < 1, b > 0, p_c > 0, v > 0, kappa1 > 0, kappa2 < 0; violations
/// throw naming the offending constant. Note alpha scales linearly with p_c
/// while beta does not depend on it.
template <class Real>
[[nodiscard]] AlphaBeta<Real> derive_alpha_beta(Real a, Real b, Real p_c, Real v, Real kappa1,
                                                Real kappa2) {
    auto reject = [](const char* what) {
        throw std::invalid_argument(std::string("derive_alpha_beta: sign violation: ") + what);
    };
    if (!(a < Real(1))) reject("a must be < 1");
    if (!(b > Real(0))) reject("b must be > 0");
    if (!(p_c > Real(0))) reject("p_c must be > 0");
    if (!(v > Real(0))) reject("v must be > 0");
    if (!(kappa1 > Real(0))) reject("kappa1 must be > 0");
    if (!(kappa2 < Real(0))) reject("kappa2 must be < 0");
    const Real alpha = (b / (a - Real(1))) * (p_c / kappa2);
    const Real beta = ((a - Real(1)) / b) * (Real(1) / (v * kappa1 * kappa2));
    return {alpha, beta};
}

/// F(t) = ln(beta) + ln(t) + ln(1 - alpha t) + t, with the endpoint policy
/// F -> -infinity within eps = 1e-12 / alpha of either domain edge.
template <class Real>
[[nodiscard]] Real f_fixed_point(Real t_tilde, Real alpha, Real beta) {
    if (!(alpha > Real(0)) || !(beta > Real(0)))
        throw std::domain_error("f_fixed_point: alpha and beta must be positive");
    const Real eps = Real(1e-12) / alpha;
    if (t_tilde <= eps || t_tilde >= Real(1) / alpha - eps)
        return -std::numeric_limits<Real>::infinity();
    using std::log;
    return log(beta) + log(t_tilde) + std::log1p(-alpha * t_tilde) + t_tilde;
}

/// dF/dt = 1/t - alpha/(1 - alpha t) + 1 on the open domain.
template <class Real>
[[nodiscard]] Real f_fixed_point_slope(Real t_tilde, Real alpha) {
    return Real(1) / t_tilde - alpha / (Real(1) - alpha * t_tilde) + Real(1);
}

/// Location of the unique maximum of F on (0, 1/alpha).
template <class Real>
[[nodiscard]] Real t_tilde_maxima(Real alpha) {
    if (!(alpha > Real(0))) throw std::domain_error("t_tilde_maxima: alpha must be positive");
    using std::sqrt;
    const Real half = Real(1) / (Real(2) * alpha);
    return half - Real(1) + sqrt(half * half + Real(1));
}

/// Existence threshold: two fixed points exist iff beta >= beta_critical.
template <class Real>
[[nodiscard]] Real beta_critical(Real alpha) {
    const Real tm = t_tilde_maxima(alpha);
    using std::exp;
    return (Real(2) / tm + Real(1)) * exp(-tm);
}

/// Evaluates the existence test at (alpha, beta).
template <class Real>
[[nodiscard]] Existence<Real> existence_test(Real alpha, Real beta) {
    if (!(alpha > Real(0)) || !(beta > Real(0)))
        throw std::domain_error("existence_test: alpha and beta must be positive");
    const Real tm = t_tilde_maxima(alpha);
    const Real bc = beta_critical(alpha);
    using std::log;
    const Real margin = log(beta) - log(bc);
    const bool marginal = std::abs(margin) <= Real(1e-12);
    return {margin >= Real(0) || marginal, marginal, tm, bc, margin};
}

/// Solves F = 0 on each side of the maximum: bisection (200 iterations,
/// interval tolerance 1e-12) followed by a short damped-Newton polish so the
/// residual lands below 1e-10 even for roots close to the domain edges.
template <class Real>
[[nodiscard]] FixedPointPair<Real> solve_fixed_points(Real alpha, Real beta) {
    const auto ex = existence_test(alpha, beta);
    if (!ex.two_fixed_points)
        throw std::domain_error("solve_fixed_points: no fixed points (beta below critical)");
    if (ex.marginal) return {ex.t_tilde_m, ex.t_tilde_m, true};

    const auto bisect = [&](Real lo, Real hi, bool rising) {
        // F(lo) and F(hi) straddle zero by construction: F -> -inf at both
        // edges and F(t_m) = margin > 0.
        for (int i = 0; i < 200; ++i) {
            const Real mid = (lo + hi) / Real(2);
            const Real fm = f_fixed_point(mid, alpha, beta);
            const bool below = fm < Real(0);
            if (below == rising)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < Real(1e-12)) break;
        }
        Real root = (lo + hi) / Real(2);
        for (int i = 0; i < 8; ++i) {
            const Real fr = f_fixed_point(root, alpha, beta);
            if (std::abs(fr) < Real(1e-13)) break;
            const Real slope = f_fixed_point_slope(root, alpha);
            Real next = root - fr / slope;
            if (!(next > Real(0)) || !(next < Real(1) / alpha)) break;
            root = next;
        }
        return root;
    };

    const Real eps = Real(1e-12) / alpha;
    const Real t_u = bisect(eps * Real(2), ex.t_tilde_m, /*rising=*/true);
    const Real t_s = bisect(ex.t_tilde_m, Real(1) / alpha - eps * Real(2), /*rising=*/false);
    return {t_u, t_s, false};
}

/// Classifies a start t0 in the auxiliary coordinate.
///
/// With no fixed points every start runs away. Otherwise t_u is the
/// separatrix: t0 < t_u runs away (kelvin temperature grows without bound),
/// t0 > t_u converges to the stable root. A start exactly on the separatrix
/// has no defined outcome and is rejected.
template <class Real>
[[nodiscard]] StartClass classify_start(Real alpha, Real beta, Real t_tilde_0) {
    if (!(t_tilde_0 > Real(0)))
        throw std::domain_error("classify_start: start must be positive");
    const auto ex = existence_test(alpha, beta);
    if (!ex.two_fixed_points) return StartClass::runaway;
    const auto roots = solve_fixed_points(alpha, beta);
    if (t_tilde_0 == roots.t_tilde_u)
        throw std::domain_error("classify_start: start lies exactly on the separatrix");
    return t_tilde_0 < roots.t_tilde_u ? StartClass::runaway : StartClass::converges_to_stable;
}

/// Fixed points mapped back to kelvin; the unstable one is hotter.
template <class Real>
struct KelvinFixedPoints {
    Real t_unstable;  ///< hotter
    Real t_stable;    ///< cooler
    bool marginal;
};

template <class Real>
[[nodiscard]] KelvinFixedPoints<Real> kelvin_fixed_points(Real alpha, Real beta, Real kappa2) {
    const auto roots = solve_fixed_points(alpha, beta);
    return {from_auxiliary(roots.t_tilde_u, kappa2), from_auxiliary(roots.t_tilde_s, kappa2),
            roots.marginal};
}

}  // namespace thermofix
