#include "lps/analysis.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace lps;

namespace {

SolverConfig config(int n, double dt, double T) {
    SolverConfig c;
    c.n = n;
    c.dt = dt;
    c.t_final = T;
    return c;
}

}  // namespace

TEST_CASE("power-law fit") {
    std::vector<Sample> pts;
    for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) pts.emplace_back(x, 3.5 * std::pow(x, 1.25));
    const auto f = fit_power_law(pts);
    CHECK(f.exponent == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.exponent_stderr < 1e-10);
    CHECK(f(10.0) == doctest::Approx(3.5 * std::pow(10.0, 1.25)));

    // Standard error against the textbook formula on perturbed data.
    const double noise[] = {0.01, -0.02, 0.015, 0.0, -0.005};
    std::vector<Sample> noisy;
    double sx = 0, sxx = 0;
    for (int i = 0; i < 5; ++i) {
        const double x = pts[i].first;
        noisy.emplace_back(x, pts[i].second * std::exp(noise[i]));
        sx += std::log(x);
        sxx += std::log(x) * std::log(x);
    }
    const auto fn = fit_power_law(noisy);
    double rss = 0;
    for (const auto& [x, y] : noisy) rss += std::pow(std::log(y) - std::log(fn(x)), 2);
    const double sxx_c = sxx - sx * sx / 5;
    CHECK(fn.exponent_stderr == doctest::Approx(std::sqrt(rss / 3 / sxx_c)).epsilon(1e-10));

    const auto two = fit_power_law({{1.0, 2.0}, {2.0, 8.0}});
    CHECK(two.exponent == doctest::Approx(2.0));
    CHECK(std::isnan(two.exponent_stderr));
    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}}), ValidationError);
    CHECK_THROWS_AS(fit_power_law({{1.0, 1.0}, {2.0, -1.0}}), ValidationError);
    CHECK(regression_sigma(8.0, 4, 2) == doctest::Approx(2.0));
}

TEST_CASE("saturation fit recovers exact parameters") {
    std::vector<Sample> pts;
    for (double T : {0.1, 0.2, 0.4, 0.6, 1.0, 1.5, 2.5}) pts.emplace_back(T, 5.0 - 3.0 * std::exp(-1.7 * T));
    const auto f = fit_saturation(pts);
    CHECK(f.converged);
    CHECK(f.psi == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(f.alpha == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(f.beta == doctest::Approx(1.7).epsilon(1e-8));
    CHECK(f.residual_norm < 1e-8);
    CHECK(f(0.0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK_THROWS_AS(fit_saturation({{1.0, 1.0}, {2.0, 2.0}}), ValidationError);
}

TEST_CASE("blow-up monitor") {
    std::vector<Sample> saturating, exploding;
    for (double T : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        saturating.emplace_back(T, (4.0 - 2.0 * std::exp(-1.3 * T)) / T);
        exploding.emplace_back(T, (T < 2.9 ? 4.0 - 2.0 * std::exp(-1.3 * T) : 12.0) / T);
    }
    CHECK_FALSE(lps_blowup_monitor(saturating).flagged);
    const auto rep = lps_blowup_monitor(exploding);
    CHECK(rep.flagged);
    CHECK(rep.excess > rep.threshold);
    CHECK(rep.tail_convex);

    CHECK_FALSE(lps_blowup_monitor({{1.0, 1.0}, {2.0, 100.0}}).flagged);
    const std::vector<Sample> convex3{{1.0, 1.0}, {2.0, 1.0}, {3.0, 3.0}};
    CHECK(lps_blowup_monitor(convex3).flagged);
    CHECK_FALSE(lps_blowup_monitor({{1.0, 1.0}, {2.0, 0.8}, {3.0, 0.6}}).flagged);
}

TEST_CASE("Stokes shear: ratio, limit and audits") {
    const WaveGrid g(16);
    const double A = 1e-3, nu = 0.01, T = 0.05;
    const double lam = 4 * oracle::pi * oracle::pi * nu;
    const double c = std::pow(3.0 / 8.0, 2.0 / 3.0);
    const auto u0 = oracle::shear(g, A);
    auto cfg = config(16, 1e-3, T);
    cfg.nu = nu;
    const auto traj = solve_forward(u0, cfg);
    const double K0 = A * A / 4;
    const double num = std::pow(A, 8.0 / 3.0) * c * (1 - std::exp(-8 * lam * T / 3)) / (8 * lam / 3);
    const double den = A * A / 2 * (1 - std::exp(-2 * lam * T));
    CHECK(xi_ratio(traj, K0) == doctest::Approx(num / den).epsilon(1e-8));
    const double E0 = oracle::pi * oracle::pi * A * A;
    CHECK(theta_limit(u0, nu) == doctest::Approx(std::pow(A, 8.0 / 3.0) * c / (4 * nu * E0)).epsilon(1e-10));
    CHECK(theta_limit(u0, nu) == doctest::Approx(std::pow(A, 2.0 / 3.0) * c / lam).epsilon(1e-10));
    CHECK_THROWS_AS(xi_ratio(traj, 0.0), ValidationError);

    const auto audit = audit_enstrophy_bounds(traj, nu);
    CHECK(audit.rate_bound_holds);
    CHECK(audit.envelope_holds);
    CHECK(audit.entries.size() == traj.levels());
    CHECK(audit.max_enstrophy == doctest::Approx(E0).epsilon(1e-10));
    CHECK(audit.entries.front().rate_bound ==
          doctest::Approx(27 * E0 * E0 * E0 / (8 * std::pow(oracle::pi, 4) * nu * nu * nu)).epsilon(1e-12));
    CHECK(audit.entries[5].dEdt == doctest::Approx(-2 * lam * audit.entries[5].E).epsilon(1e-5));
    CHECK(audit.blowup_time_bound == doctest::Approx(4 * std::pow(oracle::pi, 4) * nu * nu * nu / (27 * E0 * E0)));
}

TEST_CASE("Gagliardo-Nirenberg ratio") {
    const WaveGrid g(16);
    const double A = 0.7;
    const auto u = oracle::shear(g, A);
    CHECK(audit_gn_inequality(u, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double l4 = A * std::pow(3.0 / 8.0, 0.25), l2 = A / std::sqrt(2.0), grad = oracle::two_pi * A / std::sqrt(2.0);
    CHECK(audit_gn_inequality(u, 4.0) == doctest::Approx(l4 / (std::pow(grad, 0.75) * std::pow(l2, 0.25))).epsilon(1e-12));
    const auto r = random_solenoidal(g, 3);
    CHECK(audit_gn_inequality(3.0 * r, 4.0) == doctest::Approx(audit_gn_inequality(r, 4.0)).epsilon(1e-12));
    CHECK_THROWS_AS(audit_gn_inequality(r, 7.0), ValidationError);
}

TEST_CASE("finite-difference L4 rate") {
    const WaveGrid g(16);
    const double nu = 0.01;
    const auto u0 = oracle::taylor_green(g, 1.0);
    const double exact = instantaneous_l4_rate(u0, nu);
    const double d1 = l4_rate_finite_difference(u0, nu, 1e-4, 1);
    const double d2 = l4_rate_finite_difference(u0, nu, 1e-4, 2);
    CHECK(std::abs(d1 / exact - 1) < 1e-2);
    CHECK(std::abs(d2 / exact - 1) < std::abs(d1 / exact - 1));
    CHECK_THROWS_AS(l4_rate_finite_difference(u0, nu, 1e-4, 3), ValidationError);
}
