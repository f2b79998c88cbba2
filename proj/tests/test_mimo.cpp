#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "thermofix/mimo.hpp"
#include "thermofix/model.hpp"
#include "thermofix/model_io.hpp"

using namespace thermofix;

namespace {

ThermalModel bundled() {
    return load_model(std::string(THERMOFIX_DATA_DIR) + "/default_soc.json");
}

/// Random symmetric nonnegative A with row sums rho via symmetric scaling.
Matrix random_retention(std::mt19937_64& rng, Eigen::Index n, double rho) {
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    Matrix s(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) s(i, j) = s(j, i) = unit(rng);
    for (int pass = 0; pass < 80; ++pass) {
        const Vector d = s.rowwise().sum();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                s(i, j) /= std::sqrt(d[i]) * std::sqrt(d[j]);
    }
    return rho * s;
}

ThermalModel random_model(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_dist(2, 6);
    std::uniform_int_distribution<int> m_dist(1, 5);
    std::uniform_real_distribution<double> rho_dist(0.99, 0.9995);
    std::uniform_real_distribution<double> gain_dist(8.0, 25.0);
    std::uniform_real_distribution<double> raw_dist(0.2, 1.0);
    std::uniform_real_distribution<double> volt_dist(0.8, 1.2);
    std::uniform_real_distribution<double> k2_dist(-1100.0, -600.0);
    std::uniform_real_distribution<double> frac_dist(0.02, 0.25);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    ThermalModel m;
    const Eigen::Index n = n_dist(rng);
    const Eigen::Index mm = m_dist(rng);
    m.a = random_retention(rng, n, rho_dist(rng));
    const Matrix lin = (Matrix::Identity(n, n) - m.a).inverse();

    m.b.resize(n, mm);
    for (Eigen::Index j = 0; j < mm; ++j) {
        Vector col(n);
        for (Eigen::Index i = 0; i < n; ++i) col[i] = raw_dist(rng);
        const Vector gain = lin * col;
        m.b.col(j) = col * (gain_dist(rng) / gain.maxCoeff());
    }

    for (Eigen::Index i = 0; i < n; ++i) m.hotspot_names.push_back("h" + std::to_string(i));
    for (Eigen::Index j = 0; j < mm; ++j) m.resource_names.push_back("r" + std::to_string(j));

    for (Eigen::Index j = 0; j < mm; ++j) {
        LeakageParams lk;
        if (coin(rng) < 0.6) {
            const Vector gain = lin * m.b.col(j);
            Eigen::Index drive = 0;
            gain.maxCoeff(&drive);
            lk.active = true;
            lk.v = volt_dist(rng);
            lk.kappa2 = k2_dist(rng);
            const double at350 = 350.0 * 350.0 * std::exp(lk.kappa2 / 350.0);
            lk.kappa1 = frac_dist(rng) / (lk.v * at350);
            lk.driving_hotspot = static_cast<int>(drive);
        }
        m.leakage.push_back(lk);
    }

    m.t_min = 250.0;
    m.t_max = 500.0;
    m.ambient = 297.15;
    m.sample_period = 0.1;
    validate_model(m);
    return m;
}

/// Plant-iteration oracle; nullopt when the trajectory does not settle.
std::optional<Vector> brute_fixed_point(const ThermalModel& m, const Vector& p_c,
                                        long cap = 400'000) {
    Vector t = m.ambient_vector();
    for (long k = 0; k < cap; ++k) {
        const Vector next = step(m, t, total_power(m, t, p_c));
        const double delta = (next - t).cwiseAbs().maxCoeff();
        t = next;
        if (!t.allFinite() || t.maxCoeff() > 600.0) return std::nullopt;
        if (delta < 1e-9) return t;
    }
    return std::nullopt;
}

MimoSolution solve_either_seed(const ThermalModel& m, const AcceleratedWorkspace& ws,
                               const Vector& p_c) {
    MimoSolution sol = solve(m, ws, p_c);
    if (!sol.converged) {
        NewtonConfig cfg;
        cfg.seed_from_siso = true;
        sol = solve(m, ws, p_c, cfg);
    }
    return sol;
}

}  // namespace

TEST_CASE("workspace inverts A - I", "[mimo]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);
    const Matrix a_minus_i = m.a - Matrix::Identity(m.n(), m.n());
    CHECK((ws.ainv * a_minus_i - Matrix::Identity(m.n(), m.n())).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ws.ainv_b - ws.ainv * m.b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ws.rank() == 2);
    CHECK(ws.active == std::vector<int>{1, 3});
    CHECK(ws.driving == std::vector<int>{2, 4});
}

TEST_CASE("plain and accelerated steps agree", "[mimo][property]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> temp(m.t_min, m.t_max);
    std::uniform_real_distribution<double> watts(0.0, 3.0);
    for (int i = 0; i < 500; ++i) {
        Vector t(m.n());
        for (Eigen::Index k = 0; k < m.n(); ++k) t[k] = temp(rng);
        Vector p_c(m.m());
        for (Eigen::Index k = 0; k < m.m(); ++k) p_c[k] = watts(rng);
        const auto plain = newton_step_plain(m, t, p_c);
        const auto accel = newton_step_accelerated(m, ws, t, ws.ainv_b * p_c);
        REQUIRE(plain.has_value());
        REQUIRE(accel.has_value());
        const double scale = plain->cwiseAbs().maxCoeff() + 1e-30;
        CHECK((*plain - *accel).cwiseAbs().maxCoeff() / scale < 1e-8);
    }
}

TEST_CASE("analytic Jacobian matches finite differences", "[mimo][property]") {
    const ThermalModel m = bundled();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> temp(m.t_min + 1.0, m.t_max - 1.0);
    std::uniform_real_distribution<double> watts(0.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        Vector t(m.n());
        for (Eigen::Index k = 0; k < m.n(); ++k) t[k] = temp(rng);
        Vector p_c(m.m());
        for (Eigen::Index k = 0; k < m.m(); ++k) p_c[k] = watts(rng);
        const Matrix jac = jacobian(m, t);
        Matrix fd(m.n(), m.n());
        const double h = 1e-3;
        for (Eigen::Index k = 0; k < m.n(); ++k) {
            Vector tp = t, tm = t;
            tp[k] += h;
            tm[k] -= h;
            fd.col(k) = (residual(m, tp, p_c) - residual(m, tm, p_c)) / (2.0 * h);
        }
        CHECK((jac - fd).cwiseAbs().maxCoeff() / jac.cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("solve finds the bundled idle and loaded fixed points", "[mimo]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);

    Vector idle_p = Vector::Zero(m.m());
    idle_p[m.resource_index("little")] = 0.30;
    idle_p[m.resource_index("mem")] = 1.05;
    const MimoSolution idle = solve(m, ws, idle_p);
    REQUIRE(idle.converged);
    CHECK_FALSE(idle.out_of_domain);
    CHECK(idle.residual_norm < 1e-8);
    // calibrated idle state, kelvin
    CHECK(idle.t_star[0] == Catch::Approx(321.4).margin(5e-3));
    CHECK(idle.t_star[2] == Catch::Approx(322.1).margin(5e-3));
    CHECK(idle.t_star[4] == Catch::Approx(322.9).margin(5e-3));

    Vector load_p = idle_p;
    load_p[m.resource_index("big")] = 0.8;
    load_p[m.resource_index("gpu")] = 0.38;
    const MimoSolution loaded = solve(m, ws, load_p);
    REQUIRE(loaded.converged);
    const auto oracle = brute_fixed_point(m, load_p);
    REQUIRE(oracle.has_value());
    CHECK((loaded.t_star - *oracle).cwiseAbs().maxCoeff() < 1e-4);

    // residual is a true fixed-point residual: T = A T + B P(T)
    const Vector lhs = step(m, loaded.t_star, total_power(m, loaded.t_star, load_p));
    CHECK((lhs - loaded.t_star).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("seeding strategies land on the same fixed point", "[mimo]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);
    Vector p_c(m.m());
    p_c << 0.3, 1.2, 1.05, 0.5;

    const MimoSolution ambient = solve(m, ws, p_c);
    NewtonConfig cfg;
    cfg.seed_from_siso = true;
    const MimoSolution seeded = solve(m, ws, p_c, cfg);
    REQUIRE(ambient.converged);
    REQUIRE(seeded.converged);
    CHECK((ambient.t_star - seeded.t_star).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(seeded.seed.minCoeff() > 0.0);
    CHECK(ambient.seed == m.ambient_vector());
}

TEST_CASE("iteration cap reports non-convergence honestly", "[mimo]") {
    const ThermalModel m = bundled();
    const AcceleratedWorkspace ws = build_workspace(m);
    Vector p_c(m.m());
    p_c << 0.3, 0.8, 1.05, 0.38;
    NewtonConfig cfg;
    cfg.tol = 1e-15;
    cfg.max_iter = 1;
    const MimoSolution sol = solve(m, ws, p_c, cfg);
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations == 1);
}

TEST_CASE("no active leakage reduces to the affine solve", "[mimo]") {
    std::mt19937_64 rng(37);
    ThermalModel m = random_model(rng);
    for (auto& lk : m.leakage) lk.active = false;
    const AcceleratedWorkspace ws = build_workspace(m);
    CHECK(ws.rank() == 0);

    Vector p_c = Vector::Constant(m.m(), 0.4);
    const MimoSolution sol = solve(m, ws, p_c);
    REQUIRE(sol.converged);
    CHECK(sol.iterations <= 2);
    const Matrix lin = (Matrix::Identity(m.n(), m.n()) - m.a).inverse();
    CHECK((sol.t_star - lin * m.b * p_c).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Newton agrees with plant iteration on random models", "[mimo][property]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> watts(0.05, 1.2);
    int checked = 0;
    int attempts = 0;
    while (checked < 10) {
        REQUIRE(++attempts < 200);
        const ThermalModel m = random_model(rng);
        Vector p_c(m.m());
        for (Eigen::Index j = 0; j < m.m(); ++j) p_c[j] = watts(rng);
        const auto oracle = brute_fixed_point(m, p_c);
        if (!oracle) continue;  // runaway configuration, not a fixed-point case
        const AcceleratedWorkspace ws = build_workspace(m);
        const MimoSolution sol = solve_either_seed(m, ws, p_c);
        REQUIRE(sol.converged);
        CHECK((sol.t_star - *oracle).cwiseAbs().maxCoeff() < 1e-4);
        ++checked;
    }
}
