#include "lps/optimizer.hpp"

#include "lps/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace lps {

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::problem1: return "problem1";
        case ProblemKind::problem2: return "problem2";
        case ProblemKind::problem3: return "problem3";
    }
    return "problem2";
}

ProblemKind problem_kind_from_string(const std::string& s) {
    if (s == "problem1" || s == "1") return ProblemKind::problem1;
    if (s == "problem2" || s == "2") return ProblemKind::problem2;
    if (s == "problem3" || s == "3") return ProblemKind::problem3;
    throw ValidationError("unknown problem '" + s + "' (expected problem1, problem2 or problem3)");
}

double problem_exponent(ProblemKind k) { return k == ProblemKind::problem3 ? 8.0 / 3.0 : 8.0; }

ConstraintKind problem_constraint(ProblemKind k) {
    switch (k) {
        case ProblemKind::problem1: return ConstraintKind::l4_sphere;
        case ProblemKind::problem2: return ConstraintKind::h34_dot_sphere;
        case ProblemKind::problem3: return ConstraintKind::energy_sphere;
    }
    return ConstraintKind::h34_dot_sphere;
}

ProblemSpec ProblemSpec::make(ProblemKind which, double constraint_value, double T, SolverConfig solver,
                              SobolevConfig sobolev) {
    ProblemSpec p;
    p.which = which;
    p.constraint = {problem_constraint(which), constraint_value};
    p.objective_exponent = problem_exponent(which);
    p.T = T;
    p.solver = solver;
    p.solver.t_final = T;
    p.sobolev = sobolev;
    return p;
}

void ProblemSpec::validate() const {
    constraint.validate();
    sobolev.validate();
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("horizon T must be positive");
    if (constraint.kind != problem_constraint(which)) {
        throw ValidationError("constraint kind does not match " + to_string(which));
    }
    if (objective_exponent != problem_exponent(which)) {
        throw ValidationError("objective exponent does not match " + to_string(which));
    }
    solver_config().validate();
}

SolverConfig ProblemSpec::solver_config() const {
    SolverConfig c = solver;
    c.t_final = T;
    return c;
}

double evaluate_objective(const SpectralVectorField& u0, const ProblemSpec& problem) {
    SolverConfig c = problem.solver_config();
    c.store_states = false;
    return objective_phi(solve_forward(u0, c), problem.objective_exponent);
}

double arc_objective(const SpectralVectorField& u0n, const SpectralVectorField& direction, double tau,
                     const ProblemSpec& problem) {
    try {
        if (tau == 0.0) return evaluate_objective(u0n, problem);
        SpectralVectorField z = u0n;
        z.axpy(tau, direction);
        return evaluate_objective(retract(z, problem.constraint), problem);
    } catch (const NumericalAbort&) {
        return -std::numeric_limits<double>::infinity();
    } catch (const ValidationError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

std::string classify_branch(const std::array<double, 3>& Ei, double threshold) {
    std::array<double, 3> e = Ei;
    std::sort(e.begin(), e.end(), std::greater<>());
    if (!(e[0] > 0.0)) return "symmetric";
    auto close = [&](double a, double b) { return std::abs(a - b) <= threshold * std::max(a, b); };
    if (close(e[0], e[2])) return "symmetric";
    if (e[2] <= threshold * e[0]) return "two-component";
    if (close(e[0], e[1]) || close(e[1], e[2])) return "partially-symmetric";
    return "asymmetric";
}

OptimizationReport optimize(const ProblemSpec& problem, const SpectralVectorField& u0_guess,
                            const OptimizerOptions& options) {
    using clock = std::chrono::steady_clock;
    problem.validate();
    if (u0_guess.grid().n() != problem.solver.n) throw ValidationError("initial guess resolution does not match solver");

    OptimizationReport report;
    report.problem = problem;
    const Pairing h34 = Pairing::h34(problem.sobolev.ell);
    const SolverConfig cfg = problem.solver_config();
    const double p = problem.objective_exponent;

    auto start = clock::now();
    SpectralVectorField u = retract(leray_project(u0_guess), problem.constraint);
    u.set_role(FieldRole::velocity);
    GradientEvaluation ge;
    try {
        ge = evaluate_gradient(u, cfg, p);
    } catch (const NumericalAbort& e) {
        if (!options.fallback_guess) throw;
        log_warning(std::string("initial guess aborted (") + e.what() + "); restarting from the fallback guess");
        u = retract(leray_project(*options.fallback_guess), problem.constraint);
        u.set_role(FieldRole::velocity);
        ge = evaluate_gradient(u, cfg, p);
        report.restarted = true;
    }

    auto residual = [&](const SpectralVectorField& v) {
        return std::abs(constraint_residual(v, problem.constraint)) / problem.constraint.value;
    };

    IterationRecord rec;
    rec.objective = ge.objective;
    rec.constraint_residual = residual(u);
    rec.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    report.iterations.push_back(rec);
    if (options.observer) options.observer(rec, u);

    double prev_tau = 0.0;
    int stall = 0;
    report.reason = "iteration limit";
    for (int it = 1; it <= options.max_iterations; ++it) {
        start = clock::now();
        const SpectralVectorField grad = sobolev_gradient(ge.l2_gradient, problem.sobolev);
        const SpectralVectorField dir = project_tangent(grad, u, problem.constraint, problem.sobolev);
        const double gnorm = norm(dir, h34);
        const double tangency = tangency_residual(dir, u, problem.constraint, problem.sobolev);
        report.iterations.back().gradient_norm = gnorm;
        report.iterations.back().tangency = tangency;
        if (!(gnorm >= options.gradient_tol * norm(u, h34))) {
            report.converged = true;
            report.reason = "projected gradient below tolerance";
            break;
        }
        const double tau0 = prev_tau > 0.0 ? prev_tau : options.tau_init_factor / gnorm;
        const double phi0 = ge.objective;
        const LineSearchResult ls = arc_line_search(
            [&](double tau) { return arc_objective(u, dir, tau, problem); }, phi0, tau0, options.line_search);
        if (!ls.ascent || ls.tau == 0.0) {
            report.converged = true;
            report.reason = "line search found no ascent";
            break;
        }
        SpectralVectorField z = u;
        z.axpy(ls.tau, dir);
        SpectralVectorField next = retract(z, problem.constraint);
        GradientEvaluation ng = evaluate_gradient(next, cfg, p);
        if (!(ng.objective > phi0)) {
            report.converged = true;
            report.reason = "line search found no ascent";
            break;
        }
        const double rel_inc = (ng.objective - phi0) / std::max(std::abs(phi0), std::numeric_limits<double>::min());
        u = std::move(next);
        u.set_role(FieldRole::velocity);
        ge = std::move(ng);
        prev_tau = ls.tau;

        IterationRecord r;
        r.iteration = it;
        r.objective = ge.objective;
        r.tau = ls.tau;
        r.constraint_residual = residual(u);
        r.evaluations = ls.evaluations;
        r.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
        report.iterations.push_back(r);
        if (options.observer) options.observer(r, u);

        stall = rel_inc < options.stall_tol ? stall + 1 : 0;
        if (stall >= options.stall_iterations) {
            report.converged = true;
            report.reason = "relative objective increment below tolerance";
            break;
        }
    }
    report.final_u0 = u;
    report.final_objective = ge.objective;
    report.final_diagnostics = compute_diagnostics(u, 0.0);
    report.branch_tag = classify_branch(report.final_diagnostics.Ei);
    return report;
}

std::vector<OptimizationReport> continuation(const std::vector<ProblemSpec>& problems,
                                             const SpectralVectorField& seed_guess,
                                             const OptimizerOptions& options) {
    std::vector<OptimizationReport> out;
    out.reserve(problems.size());
    SpectralVectorField guess = seed_guess;
    for (const auto& prob : problems) {
        try {
            OptimizerOptions opts = options;
            if (!opts.fallback_guess) opts.fallback_guess = seed_guess;
            out.push_back(optimize(prob, guess, opts));
            guess = out.back().final_u0;
        } catch (const std::exception& e) {
            OptimizationReport failed;
            failed.problem = prob;
            failed.failed = true;
            failed.reason = std::string("failed: ") + e.what();
            std::ostringstream os;
            os << "continuation member T=" << prob.T << " constraint=" << prob.constraint.value << " " << failed.reason;
            log_warning(os.str());
            out.push_back(std::move(failed));
        }
    }
    return out;
}

}  // namespace lps
