#include "lps/log.hpp"
#include "lps/optimizer.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace lps;

namespace {

SolverConfig solver(int n, double dt) {
    SolverConfig c;
    c.n = n;
    c.dt = dt;
    return c;
}

}  // namespace

TEST_CASE("problem table") {
    CHECK(problem_exponent(ProblemKind::problem1) == 8.0);
    CHECK(problem_exponent(ProblemKind::problem3) == doctest::Approx(8.0 / 3.0));
    CHECK(problem_constraint(ProblemKind::problem1) == ConstraintKind::l4_sphere);
    CHECK(problem_constraint(ProblemKind::problem2) == ConstraintKind::h34_dot_sphere);
    CHECK(problem_constraint(ProblemKind::problem3) == ConstraintKind::energy_sphere);
    CHECK(problem_kind_from_string("2") == ProblemKind::problem2);
    CHECK(problem_kind_from_string(to_string(ProblemKind::problem3)) == ProblemKind::problem3);
    CHECK_THROWS_AS(problem_kind_from_string("4"), ValidationError);

    auto p = ProblemSpec::make(ProblemKind::problem2, 2.0, 1e-3, solver(8, 1e-4));
    p.validate();
    CHECK(p.solver_config().t_final == 1e-3);
    p.objective_exponent = 3.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    CHECK_THROWS_AS(ProblemSpec::make(ProblemKind::problem1, 1.0, -1.0).validate(), ValidationError);
    CHECK_THROWS_AS(ProblemSpec::make(ProblemKind::problem1, 0.0, 1.0).validate(), ValidationError);
}

TEST_CASE("branch classification is permutation invariant") {
    CHECK(classify_branch({1.0, 1.0, 1.0}) == "symmetric");
    CHECK(classify_branch({1.0, 0.97, 1.02}) == "symmetric");
    CHECK(classify_branch({1.0, 1.0, 0.01}) == "two-component");
    CHECK(classify_branch({0.01, 1.0, 1.0}) == "two-component");
    CHECK(classify_branch({1.0, 1.0, 0.5}) == "partially-symmetric");
    CHECK(classify_branch({0.5, 1.0, 1.0}) == "partially-symmetric");
    CHECK(classify_branch({1.0, 0.7, 0.4}) == "asymmetric");
    CHECK(classify_branch({0.4, 1.0, 0.7}) == "asymmetric");
}

TEST_CASE("objective evaluation") {
    const WaveGrid g(8);
    const double A = 1e-3, nu = 0.01, T = 0.01;
    auto s = solver(8, 1e-3);
    s.nu = nu;
    const auto prob = ProblemSpec::make(ProblemKind::problem1, 1.0, T, s);
    const double lam = 4 * oracle::pi * oracle::pi * nu;
    const double expected = std::pow(A, 8) * (9.0 / 64.0) * (1 - std::exp(-8 * lam * T)) / (8 * lam * T);
    CHECK(evaluate_objective(oracle::shear(g, A), prob) == doctest::Approx(expected).epsilon(1e-8));

    const auto huge = ProblemSpec::make(ProblemKind::problem2, 1e6, T, s);
    const auto u = retract(random_solenoidal(g, 1), huge.constraint);
    CHECK(std::isinf(arc_objective(u, u, 0.0, huge)));
    CHECK(arc_objective(u, u, 0.0, huge) < 0);
    CHECK(std::isinf(arc_objective(u, -1.0 * u, 1.0, prob)));
}

TEST_CASE("projected ascent keeps iterates on the manifold") {
    const WaveGrid g(8);
    OptimizerOptions opt;
    opt.max_iterations = 6;
    int seen = 0;
    opt.observer = [&](const IterationRecord& r, const SpectralVectorField& u) {
        CHECK(r.iteration == seen++);
        CHECK(divergence_residual(u) < 1e-10);
    };
    for (auto which : {ProblemKind::problem1, ProblemKind::problem2, ProblemKind::problem3}) {
        CAPTURE(to_string(which));
        seen = 0;
        const double value = which == ProblemKind::problem3 ? 1.0 : 3.0;
        const auto prob = ProblemSpec::make(which, value, 2e-3, solver(8, 2.5e-4));
        const auto rep = optimize(prob, random_solenoidal(g, 4), opt);
        REQUIRE(rep.iterations.size() >= 2);
        CHECK(seen == int(rep.iterations.size()));
        for (std::size_t i = 1; i < rep.iterations.size(); ++i) {
            CHECK(rep.iterations[i].objective > rep.iterations[i - 1].objective);
            CHECK(rep.iterations[i].constraint_residual < 1e-10);
            CHECK(rep.iterations[i].tau > 0.0);
        }
        for (std::size_t i = 0; i + 1 < rep.iterations.size(); ++i) CHECK(rep.iterations[i].tangency < 1e-10);
        CHECK(std::abs(constraint_residual(rep.final_u0, prob.constraint)) < 1e-10 * value);
        CHECK(rep.final_objective == doctest::Approx(evaluate_objective(rep.final_u0, prob)).epsilon(1e-12));
        CHECK_FALSE(rep.failed);
        CHECK_FALSE(rep.branch_tag.empty());
    }
}

TEST_CASE("optimizer validates its input") {
    const auto prob = ProblemSpec::make(ProblemKind::problem2, 1.0, 1e-3, solver(8, 1e-4));
    CHECK_THROWS_AS(optimize(prob, random_solenoidal(WaveGrid(16), 1)), ValidationError);
    CHECK_THROWS_AS(optimize(prob, SpectralVectorField(WaveGrid(8))), ValidationError);
}

TEST_CASE("continuation records failures and keeps going") {
    const WaveGrid g(8);
    OptimizerOptions opt;
    opt.max_iterations = 2;
    const auto s = solver(8, 2.5e-4);
    const std::vector<ProblemSpec> family{ProblemSpec::make(ProblemKind::problem2, 2.0, 1e-3, s),
                                          ProblemSpec::make(ProblemKind::problem2, 1e6, 1e-3, s),
                                          ProblemSpec::make(ProblemKind::problem2, 2.0, 2e-3, s)};
    const auto reps = continuation(family, random_solenoidal(g, 2), opt);
    REQUIRE(reps.size() == 3);
    CHECK_FALSE(reps[0].failed);
    CHECK(reps[1].failed);
    CHECK_FALSE(reps[1].reason.empty());
    CHECK_FALSE(reps[2].failed);
    // The third member starts from the first optimum: its initial objective
    // is the T = 2e-3 value of that field.
    CHECK(reps[2].iterations.front().objective ==
          doctest::Approx(evaluate_objective(reps[0].final_u0, family[2])).epsilon(1e-12));
}

TEST_CASE("an aborting guess falls back to the fallback guess") {
    const WaveGrid g(8);
    // Same energy: the random field peaks above the CFL abort, the Taylor-Green vortex does not.
    const auto prob = ProblemSpec::make(ProblemKind::problem3, 2500.0, 2e-3, solver(8, 1e-3));
    const auto bad = random_solenoidal(g, 2);
    const auto good = oracle::taylor_green(g, 1.0);
    auto old = set_log_sink({});
    OptimizerOptions opt;
    opt.max_iterations = 1;
    CHECK_THROWS_AS(optimize(prob, bad, opt), NumericalAbort);
    opt.fallback_guess = good;
    const auto rep = optimize(prob, bad, opt);
    CHECK(rep.restarted);
    CHECK(rep.iterations.front().objective ==
          doctest::Approx(evaluate_objective(retract(good, prob.constraint), prob)).epsilon(1e-12));
    CHECK_FALSE(optimize(prob, good, opt).restarted);
    set_log_sink(old);
}
