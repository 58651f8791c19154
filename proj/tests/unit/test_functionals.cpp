#include "lps/flow_solver.hpp"
#include "lps/functionals.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace lps;
using oracle::pi;

TEST_CASE("L^q norms of the shear field") {
    const WaveGrid g(16);
    const double A = 1.3;
    const auto u = oracle::shear(g, A);
    CHECK(lq_norm(SpectralVectorField(g), 4.0) == 0.0);
    CHECK(lq_norm(u, 4.0) == doctest::Approx(A * std::pow(3.0 / 8.0, 0.25)).epsilon(1e-13));
    CHECK(lq_norm(u, 2.0) == doctest::Approx(A / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(lq_norm(u, 6.0) == doctest::Approx(A * std::pow(5.0 / 16.0, 1.0 / 6.0)).epsilon(1e-13));
    CHECK(lq_norm(-2.5 * u, 3.0) == doctest::Approx(2.5 * lq_norm(u, 3.0)).epsilon(1e-13));
    CHECK_THROWS_AS(lq_norm(u, 0.5), ValidationError);
}

TEST_CASE("energy and enstrophy") {
    const WaveGrid g(16);
    const double A = 0.8;
    const auto u = oracle::shear(g, A);
    CHECK(kinetic_energy(u) == doctest::Approx(A * A / 4).epsilon(1e-13));
    CHECK(enstrophy(u) == doctest::Approx(pi * pi * A * A).epsilon(1e-13));
    const auto e = componentwise_enstrophy(u);
    CHECK(e[2] == doctest::Approx(pi * pi * A * A).epsilon(1e-13));
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 0.0);
    CHECK(kinetic_energy(SpectralVectorField(g)) == 0.0);
    CHECK(enstrophy(SpectralVectorField(g)) == 0.0);

    const auto r = random_solenoidal(g, 3);
    const auto d = compute_diagnostics(r, 0.0);
    CHECK(d.E == doctest::Approx(d.Ei[0] + d.Ei[1] + d.Ei[2]).epsilon(1e-12));
    CHECK(d.K >= 0.0);
    // Enstrophy equals half the physical-space integral of |curl u|^2.
    const auto w = to_physical(curl(r));
    CHECK(d.E == doctest::Approx(0.5 * oracle::physical_dot(w, w)).epsilon(1e-12));
}

TEST_CASE("energy equation on Taylor-Green at t = 0") {
    const WaveGrid g(16);
    const auto u = oracle::taylor_green(g, 1.0);
    const double nu = 0.01;
    const auto dudt = time_derivative(u, nu);
    // Independent closed forms: K = 1/4, E = 2 pi^2, dK/dt = -16 pi^2 nu K.
    CHECK(kinetic_energy(u) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(enstrophy(u) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
    CHECK(kinetic_energy_rate(u, dudt) == doctest::Approx(-2.0 * nu * enstrophy(u)).epsilon(1e-8));
    CHECK(enstrophy_rate(u, dudt) == doctest::Approx(-16 * pi * pi * nu * enstrophy(u)).epsilon(1e-8));
}

TEST_CASE("checkpoint quadrature") {
    std::vector<double> cubic, odd;
    const double h = 0.1;
    for (int i = 0; i <= 6; ++i) cubic.push_back(std::pow(i * h, 3));
    CHECK(uniform_quadrature(cubic, h) == doctest::Approx(std::pow(0.6, 4) / 4).epsilon(1e-13));
    for (int i = 0; i <= 5; ++i) odd.push_back(std::pow(i * h, 3));
    CHECK(uniform_quadrature(odd, h) == doctest::Approx(std::pow(0.5, 4) / 4).epsilon(1e-13));
    std::vector<double> lin{1.0, 3.0};
    CHECK(uniform_quadrature(lin, 2.0) == 4.0);
    std::vector<double> one{1.0};
    CHECK_THROWS_AS(uniform_quadrature(one, 1.0), ValidationError);
}

TEST_CASE("objective on a Stokes trajectory") {
    const WaveGrid g(16);
    const double A = 1e-3, nu = 0.01, T = 0.05;
    const auto u0 = oracle::shear(g, A);
    SolverConfig c;
    c.n = 16;
    c.dt = 1e-3;
    c.t_final = T;
    c.nu = nu;
    const auto traj = solve_forward(u0, c);
    const double lam = nu * 4 * pi * pi;
    const double phi8 = std::pow(A, 8) * (9.0 / 64.0) * (1 - std::exp(-8 * lam * T)) / (8 * lam * T);
    CHECK(objective_phi(traj, 8.0) == doctest::Approx(phi8).epsilon(1e-8));
    const double b83 = std::pow(A * std::pow(3.0 / 8.0, 0.25), 8.0 / 3.0);
    const double phi83 = b83 * (1 - std::exp(-(8.0 / 3.0) * lam * T)) / ((8.0 / 3.0) * lam * T);
    CHECK(objective_phi(traj, 8.0 / 3.0) == doctest::Approx(phi83).epsilon(1e-8));
    CHECK(objective_phi(solve_forward(SpectralVectorField(g), c), 8.0) == 0.0);

    // Doubling the checkpoint density changes the objective very little.
    c.dt = 5e-4;
    CHECK(objective_phi(solve_forward(u0, c), 8.0) == doctest::Approx(objective_phi(traj, 8.0)).epsilon(1e-6));

    TrajectoryStore single;
    single.times = {0.0};
    single.diagnostics.resize(1);
    CHECK_THROWS_AS(objective_phi(single, 8.0), ValidationError);
}

TEST_CASE("instantaneous L4 rate") {
    const WaveGrid g(32);
    const double nu = 0.01;
    CHECK(instantaneous_l4_rate(SpectralVectorField(g), nu) == 0.0);
    const auto tg = oracle::taylor_green(g, 1.0);
    const double b4 = std::pow(lq_norm(tg, 4.0), 4);
    CHECK(instantaneous_l4_rate(tg, nu) == doctest::Approx(-4.0 * 4 * pi * pi * 2 * nu * b4).epsilon(1e-8));

    const auto u0 = 5.0 * random_solenoidal(g, 8);
    SolverConfig c;
    c.n = 32;
    c.nu = nu;
    c.dt = 2.5e-6;
    c.t_final = 1e-5;
    const auto traj = solve_forward(u0, c);
    const double fd = (std::pow(traj.diagnostics.back().l4_norm, 4) - std::pow(traj.diagnostics.front().l4_norm, 4)) / 1e-5;
    CHECK(instantaneous_l4_rate(u0, nu) == doctest::Approx(fd).epsilon(1e-3));
}
