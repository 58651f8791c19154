#pragma once

#include "lps/adjoint.hpp"
#include "lps/flow_solver.hpp"
#include "lps/line_search.hpp"
#include "lps/manifold.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lps {

enum class ProblemKind { problem1, problem2, problem3 };

std::string to_string(ProblemKind k);
ProblemKind problem_kind_from_string(const std::string& s);

/// Objective exponent and constraint sphere of each problem:
/// 1 -> (8, L4 sphere), 2 -> (8, Hdot3/4 sphere), 3 -> (8/3, energy sphere).
double problem_exponent(ProblemKind k);
ConstraintKind problem_constraint(ProblemKind k);

struct ProblemSpec {
    ProblemKind which = ProblemKind::problem2;
    ConstraintSpec constraint;
    double objective_exponent = 8.0;
    double T = 1e-3;
    SolverConfig solver;
    SobolevConfig sobolev;

    /// Builds a consistent spec; solver.t_final is set to T.
    static ProblemSpec make(ProblemKind which, double constraint_value, double T, SolverConfig solver = {},
                            SobolevConfig sobolev = {});
    void validate() const;
    /// Solver configuration with t_final forced to T.
    SolverConfig solver_config() const;
};

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0;
    double tau = 0.0;
    double gradient_norm = 0.0;
    double constraint_residual = 0.0;
    double tangency = 0.0;
    int evaluations = 0;
    double wall_seconds = 0.0;
};

struct OptimizerOptions {
    int max_iterations = 500;
    double stall_tol = 1e-6;
    int stall_iterations = 3;
    double gradient_tol = 1e-8;
    double tau_init_factor = 1e-3;
    LineSearchOptions line_search;
    /// Starting point used instead when the guess itself aborts the forward solve.
    std::optional<SpectralVectorField> fallback_guess;
    /// Called with every accepted iterate (and iteration 0).
    std::function<void(const IterationRecord&, const SpectralVectorField&)> observer;
};

struct OptimizationReport {
    ProblemSpec problem;
    std::vector<IterationRecord> iterations;
    SpectralVectorField final_u0;
    double final_objective = 0.0;
    DiagnosticsRecord final_diagnostics;
    bool converged = false;
    bool failed = false;
    /// The guess aborted and the run started from OptimizerOptions::fallback_guess.
    bool restarted = false;
    std::string reason;
    std::string branch_tag;
};

/// Objective at retract(u0n + tau * direction); -infinity if the forward solve aborts.
double arc_objective(const SpectralVectorField& u0n, const SpectralVectorField& direction, double tau,
                     const ProblemSpec& problem);

/// Objective of an initial condition (one forward solve, no states kept).
double evaluate_objective(const SpectralVectorField& u0, const ProblemSpec& problem);

/// Projected Sobolev-gradient ascent with arc line search.
OptimizationReport optimize(const ProblemSpec& problem, const SpectralVectorField& u0_guess,
                            const OptimizerOptions& options = {});

/// Runs the family in order, seeding each member with the previous optimum
/// (falling back to seed_guess when that optimum aborts the new member's
/// forward solve). A failing member is recorded (failed = true) and the family continues.
std::vector<OptimizationReport> continuation(const std::vector<ProblemSpec>& problems,
                                             const SpectralVectorField& seed_guess,
                                             const OptimizerOptions& options = {});

/// Symmetry tag from componentwise enstrophies (permutation invariant,
/// relative threshold): "symmetric", "two-component", "partially-symmetric"
/// or "asymmetric".
std::string classify_branch(const std::array<double, 3>& Ei, double threshold = 0.05);

}  // namespace lps
