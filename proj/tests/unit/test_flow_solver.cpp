#include "lps/analysis.hpp"
#include "lps/flow_solver.hpp"
#include "lps/log.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace lps;
using oracle::pi;

namespace {

SolverConfig config(int n, double dt, double T, double nu = 0.01) {
    SolverConfig c;
    c.n = n;
    c.dt = dt;
    c.t_final = T;
    c.nu = nu;
    return c;
}

}  // namespace

TEST_CASE("nonlinear term identities") {
    const WaveGrid g(16);
    CHECK(nonlinear_term(SpectralVectorField(g)).max_abs() == 0.0);

    const auto tg = oracle::taylor_green(g, 1.0);
    CHECK(nonlinear_term(tg).max_abs() < 1e-10);

    const auto u = 3.0 * random_solenoidal(g, 4);
    const auto N = nonlinear_term(u);
    const double dot = inner_product(u, N, Pairing::l2());
    CHECK(std::abs(dot) < 1e-10 * norm(u, Pairing::l2()) * norm(N, Pairing::l2()));
    CHECK(divergence_residual(N) < 1e-12);
    CHECK(mean_residual(N) == 0.0);
}

TEST_CASE("linearised term is the derivative of the nonlinear term") {
    const WaveGrid g(16);
    const auto u = random_solenoidal(g, 1);
    const auto v = random_solenoidal(g, 2);
    const double eps = 1e-6;
    const auto fd = (1.0 / (2 * eps)) * (nonlinear_term(u + eps * v) - nonlinear_term(u - eps * v));
    const auto lin = linearized_term(v, u);
    CHECK(norm(fd - lin, Pairing::l2()) < 1e-8 * norm(lin, Pairing::l2()));
}

TEST_CASE("single forward step") {
    const WaveGrid g(16);
    CHECK(step_forward(SpectralVectorField(g), 1e-3, 0.01).max_abs() == 0.0);

    // Tiny-amplitude mode: nonlinearity negligible, pure heat-kernel decay.
    const auto v = oracle::single_mode(g, {1, 2, 0}, {Complex(2e-9, 0.0), Complex(-1e-9, 0.0), 0.0});
    const double dt = 1e-2, nu = 0.01;
    const auto w = step_forward(v, dt, nu);
    const std::size_t idx = *g.index_of({1, 2, 0});
    const double expect = std::exp(-nu * 4 * pi * pi * 5 * dt);
    CHECK(std::abs(w[0][idx].real() / v[0][idx].real() - expect) < 1e-12);

    SpectralVectorField bad = v;
    bad[0][idx] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(step_forward(bad, dt, nu), NumericalAbort);
}

TEST_CASE("Taylor-Green decay") {
    const WaveGrid g(32);
    const auto u0 = oracle::taylor_green(g, 1.0);
    const auto traj = solve_forward(u0, config(32, 1e-4, 0.02));
    const double t = traj.t_final();
    const auto ref = std::exp(-8 * pi * pi * 0.01 * t) * u0;
    CHECK(oracle::relative_l2_error(traj.states.back(), ref) < 1e-6);
    const double K0 = traj.diagnostics.front().K;
    CHECK(traj.diagnostics.back().K == doctest::Approx(K0 * std::exp(-16 * pi * pi * 0.01 * t)).epsilon(1e-6));
}

TEST_CASE("forward trajectory invariants") {
    const WaveGrid g(16);
    SUBCASE("zero data stays zero") {
        const auto traj = solve_forward(SpectralVectorField(g), config(16, 1e-3, 5e-3));
        for (const auto& s : traj.states) CHECK(s.max_abs() == 0.0);
    }
    SUBCASE("random data") {
        const auto u0 = 2.0 * random_solenoidal(g, 9);
        auto cfg = config(16, 1e-3, 2e-2);
        cfg.save_stride = 2;
        const auto traj = solve_forward(u0, cfg);
        REQUIRE(traj.levels() == 11);
        CHECK(traj.times.front() == 0.0);
        CHECK(traj.times.back() == 2e-2);
        for (std::size_t j = 1; j < traj.levels(); ++j) CHECK(traj.times[j] > traj.times[j - 1]);
        for (const auto& s : traj.states) {
            CHECK(divergence_residual(s) < 1e-10);
            CHECK(std::abs(s[0][0]) + std::abs(s[1][0]) + std::abs(s[2][0]) < 1e-14);
        }
    }
    SUBCASE("energy balance on a resolved grid") {
        const WaveGrid g32(32);
        auto cfg = config(32, 5e-4, 1e-2);
        cfg.save_stride = 2;
        const auto audit = audit_energy_balance(solve_forward(2.0 * random_solenoidal(g32, 9), cfg));
        CHECK(audit.residual_rate.size() == 10);
        CHECK(audit.max_residual_rate < 1e-6 * audit.K0);
    }
}

TEST_CASE("solver configuration") {
    auto c = config(16, 1e-3, 2.5e-3);
    c.validate();
    CHECK(c.step_count() == 3);
    CHECK(c.effective_dt() == doctest::Approx(2.5e-3 / 3));
    auto big = config(16, 1.0, 1e-3);
    CHECK(big.step_count() == 1);
    CHECK(big.effective_dt() == 1e-3);
    auto stride = config(16, 1e-3, 5e-3);
    stride.save_stride = 2;
    CHECK_THROWS_AS(stride.validate(), ValidationError);
    CHECK_THROWS_AS(config(15, 1e-3, 1e-2).validate(), ValidationError);
    CHECK_THROWS_AS(config(16, -1.0, 1e-2).validate(), ValidationError);
}

TEST_CASE("CFL guard") {
    const WaveGrid g(16);
    const auto u0 = 1e4 * random_solenoidal(g, 1);
    CHECK_THROWS_AS(solve_forward(u0, config(16, 1e-2, 2e-2)), NumericalAbort);

    int warnings = 0;
    auto old = set_log_sink([&](LogLevel l, std::string_view) { warnings += l == LogLevel::warning; });
    const auto mild = 30.0 * random_solenoidal(g, 1);
    const double c = cfl_number(mild, 1e-3);
    solve_forward(mild, config(16, 1e-3 * 0.7 / c, 1e-3 * 0.7 / c));
    set_log_sink(old);
    CHECK(warnings == 1);
}

TEST_CASE("linearised solver") {
    const WaveGrid g(16);
    const auto u0 = 2.0 * random_solenoidal(g, 3);
    const auto traj = solve_forward(u0, config(16, 5e-4, 1e-2));
    CHECK(solve_linearized(traj, SpectralVectorField(g)).max_abs() == 0.0);

    const auto a = random_solenoidal(g, 4), b = random_solenoidal(g, 5);
    const auto la = solve_linearized(traj, a), lb = solve_linearized(traj, b);
    const auto lab = solve_linearized(traj, 2.0 * a - 0.5 * b);
    const auto combo = 2.0 * la - 0.5 * lb;
    CHECK(norm(lab - combo, Pairing::l2()) < 1e-10 * norm(combo, Pairing::l2()));

    // Nonlinear re-solve oracle: error of the forward quotient shrinks like eps.
    auto fd_error = [&](double eps) {
        const auto up = solve_forward(u0 + eps * a, config(16, 5e-4, 1e-2));
        const auto q = (1.0 / eps) * (up.states.back() - traj.states.back());
        return norm(q - la, Pairing::l2()) / norm(la, Pairing::l2());
    };
    const double e1 = fd_error(1e-3), e2 = fd_error(5e-4);
    CHECK(e1 < 1e-2);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));

    TrajectoryStore empty;
    CHECK_THROWS_AS(solve_linearized(empty, a), ValidationError);
    CHECK_THROWS_AS(solve_linearized(traj, random_solenoidal(WaveGrid(8), 1)), ValidationError);
}

TEST_CASE("Hermite reconstruction is exact for cubic-in-time data") {
    const WaveGrid g(8);
    const auto a = random_solenoidal(g, 1), b = random_solenoidal(g, 2);
    TrajectoryStore t;
    t.times = {0.0, 0.5};
    // u(t) = a t^3 + b, u'(t) = 3 a t^2
    t.states = {b, 0.125 * a + b};
    t.rates = {SpectralVectorField(g), 0.75 * a};
    const auto mid = t.interpolate(0, 0.5);
    const auto exact = (0.25 * 0.25 * 0.25) * a + b;
    CHECK(norm(mid - exact, Pairing::l2()) < 1e-15);
}
