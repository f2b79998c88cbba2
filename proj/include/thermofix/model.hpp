#pragma once

// =============================================================================
// Power-temperature model: leakage law, power composition, thermal step
// =============================================================================
//
// State is a kelvin temperature vector over N hotspots. Dynamics are linear
// in temperature and power, T[k+1] = A T[k] + B P[k], with the nonlinearity
// confined to the leakage component of P: each resource may carry an
// exponential leakage term driven by one hotspot's temperature.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace thermofix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kCelsiusOffset = 273.15;

[[nodiscard]] inline double to_kelvin(double celsius) { return celsius + kCelsiusOffset; }
[[nodiscard]] inline double to_celsius(double kelvin) { return kelvin - kCelsiusOffset; }

/// Exponential leakage parameters for one power resource.
struct LeakageParams {
    double v = 0.0;            ///< supply voltage (volts)
    double kappa1 = 1.0;       ///< technology constant, > 0
    double kappa2 = -1.0;      ///< technology constant (kelvin), < 0
    int driving_hotspot = 0;   ///< index of the hotspot whose temperature drives this term
    bool active = false;       ///< inactive resources contribute no leakage
};

/// One resource's power split at a given operating point.
struct PowerBreakdown {
    double p_c = 0.0;      ///< temperature-independent part (dynamic + constant), watts
    double p_leak = 0.0;   ///< temperature-driven leakage, watts
    double total = 0.0;    ///< p_c + p_leak
};

/// Discrete-time thermal model over N hotspots and M power resources.
struct ThermalModel {
    Matrix a;                                 ///< N x N, symmetric, spectral radius < 1
    Matrix b;                                 ///< N x M, entrywise nonnegative
    std::vector<std::string> hotspot_names;   ///< size N
    std::vector<std::string> resource_names;  ///< size M
    std::vector<LeakageParams> leakage;       ///< size M
    double t_min = 0.0;                       ///< domain floor, kelvin
    double t_max = 0.0;                       ///< domain ceiling, kelvin
    double ambient = 0.0;                     ///< reference start temperature, kelvin
    double sample_period = 0.1;               ///< seconds per step

    [[nodiscard]] Eigen::Index n() const { return a.rows(); }
    [[nodiscard]] Eigen::Index m() const { return b.cols(); }

    /// Indices of resources with active leakage, in resource order.
    [[nodiscard]] std::vector<int> active_leakage() const {
        std::vector<int> out;
        for (std::size_t j = 0; j < leakage.size(); ++j)
            if (leakage[j].active) out.push_back(static_cast<int>(j));
        return out;
    }

    [[nodiscard]] int resource_index(const std::string& name) const {
        for (std::size_t j = 0; j < resource_names.size(); ++j)
            if (resource_names[j] == name) return static_cast<int>(j);
        throw std::invalid_argument("unknown resource name: " + name);
    }

    [[nodiscard]] Vector ambient_vector() const { return Vector::Constant(n(), ambient); }
};

/// Leakage power V * kappa1 * T^2 * exp(kappa2 / T) in watts.
///
/// Calling this on an inactive parameter set is a programming error.
[[nodiscard]] inline double leakage_power(const LeakageParams& p, double t_kelvin) {
    if (!p.active) throw std::logic_error("leakage_power: parameters are inactive");
    if (!(t_kelvin > 0.0)) throw std::domain_error("leakage_power: temperature must be positive kelvin");
    return p.v * p.kappa1 * t_kelvin * t_kelvin * std::exp(p.kappa2 / t_kelvin);
}

/// Temperature derivative of the leakage law: V * kappa1 * exp(kappa2/T) * (2T - kappa2).
///
/// Strictly positive for T > 0 and kappa2 < 0, which is what makes hot fixed
/// points self-reinforcing.
[[nodiscard]] inline double leakage_slope(const LeakageParams& p, double t_kelvin) {
    if (!p.active) throw std::logic_error("leakage_slope: parameters are inactive");
    if (!(t_kelvin > 0.0)) throw std::domain_error("leakage_slope: temperature must be positive kelvin");
    return p.v * p.kappa1 * std::exp(p.kappa2 / t_kelvin) * (2.0 * t_kelvin - p.kappa2);
}

/// Per-resource power at temperature state `t` with configured power `p_c`.
[[nodiscard]] inline std::vector<PowerBreakdown> power_vector(const ThermalModel& model,
                                                              const Vector& t,
                                                              const Vector& p_c) {
    if (t.size() != model.n())
        throw std::invalid_argument("power_vector: temperature vector size mismatch");
    if (p_c.size() != model.m())
        throw std::invalid_argument("power_vector: configured power vector size mismatch");
    for (Eigen::Index i = 0; i < t.size(); ++i)
        if (!(t[i] > 0.0)) throw std::domain_error("power_vector: temperature must be positive kelvin");

    std::vector<PowerBreakdown> out(static_cast<std::size_t>(model.m()));
    for (Eigen::Index j = 0; j < model.m(); ++j) {
        auto& slot = out[static_cast<std::size_t>(j)];
        slot.p_c = p_c[j];
        const auto& lk = model.leakage[static_cast<std::size_t>(j)];
        slot.p_leak = lk.active ? leakage_power(lk, t[lk.driving_hotspot]) : 0.0;
        slot.total = slot.p_c + slot.p_leak;
    }
    return out;
}

/// Total (p_c + leakage) power as a vector, for feeding the thermal step.
[[nodiscard]] inline Vector total_power(const ThermalModel& model, const Vector& t, const Vector& p_c) {
    const auto split = power_vector(model, t, p_c);
    Vector out(model.m());
    for (Eigen::Index j = 0; j < model.m(); ++j) out[j] = split[static_cast<std::size_t>(j)].total;
    return out;
}

/// One thermal step: A * t + B * p, both products exact.
[[nodiscard]] inline Vector step(const ThermalModel& model, const Vector& t, const Vector& p_watts) {
    if (t.size() != model.n()) throw std::invalid_argument("step: temperature vector size mismatch");
    if (p_watts.size() != model.m()) throw std::invalid_argument("step: power vector size mismatch");
    return model.a * t + model.b * p_watts;
}

/// Validates every structural invariant; throws naming the first violation.
inline void validate_model(const ThermalModel& model) {
    const auto n = model.a.rows();
    const auto m = model.b.cols();
    if (n == 0) throw std::runtime_error("model invariant violated: A is empty");
    if (model.a.cols() != n) throw std::runtime_error("model invariant violated: A is not square");
    if (model.b.rows() != n)
        throw std::runtime_error("model invariant violated: B row count does not match A");
    if (static_cast<Eigen::Index>(model.hotspot_names.size()) != n)
        throw std::runtime_error("model invariant violated: hotspot name count does not match A");
    if (static_cast<Eigen::Index>(model.resource_names.size()) != m)
        throw std::runtime_error("model invariant violated: resource name count does not match B");
    if (static_cast<Eigen::Index>(model.leakage.size()) != m)
        throw std::runtime_error("model invariant violated: leakage entry count does not match B");

    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::abs(model.a(i, j) - model.a(j, i)) > 1e-12)
                throw std::runtime_error("model invariant violated: A is not symmetric at (" +
                                         std::to_string(i) + "," + std::to_string(j) + ")");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(model.a);
    const double rho = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(rho < 1.0))
        throw std::runtime_error("model invariant violated: spectral radius of A is " +
                                 std::to_string(rho) + ", must be < 1");

    if ((model.b.array() < 0.0).any())
        throw std::runtime_error("model invariant violated: B has a negative entry");

    for (std::size_t j = 0; j < model.leakage.size(); ++j) {
        const auto& lk = model.leakage[j];
        if (!(lk.kappa1 > 0.0))
            throw std::runtime_error("model invariant violated: leakage kappa1 must be > 0 (resource " +
                                     std::to_string(j) + ")");
        if (!(lk.kappa2 < 0.0))
            throw std::runtime_error("model invariant violated: leakage kappa2 must be < 0 (resource " +
                                     std::to_string(j) + ")");
        if (lk.driving_hotspot < 0 || lk.driving_hotspot >= n)
            throw std::runtime_error("model invariant violated: leakage driving_hotspot out of range (resource " +
                                     std::to_string(j) + ")");
        if (lk.active && !(lk.v > 0.0))
            throw std::runtime_error("model invariant violated: active leakage needs positive voltage (resource " +
                                     std::to_string(j) + ")");
    }

    if (!(model.t_min < model.t_max))
        throw std::runtime_error("model invariant violated: domain floor must be below ceiling");
    if (!(model.t_min > 0.0))
        throw std::runtime_error("model invariant violated: domain floor must be positive kelvin");
    if (!(model.ambient > 0.0))
        throw std::runtime_error("model invariant violated: ambient must be positive kelvin");
    if (!(model.sample_period > 0.0))
        throw std::runtime_error("model invariant violated: sample period must be positive");
}

}  // namespace thermofix
