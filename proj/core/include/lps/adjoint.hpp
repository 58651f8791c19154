#pragma once

#include "lps/flow_solver.hpp"

#include <vector>

namespace lps {

enum class StageInterpolation { piecewise_linear, cubic_hermite };

struct AdjointConfig {
    /// Exponent p of the objective (1/T) int ||u||_L4^p: 8 for Phi_T, 8/3 for Psi_T.
    double p = 8.0;
    const TrajectoryStore* forward = nullptr;
    StageInterpolation interpolation = StageInterpolation::cubic_hermite;

    void validate() const;
};

/// (p/T) ||u||_L4^{p-4} |u|^2 u, de-aliased but not projected.
SpectralVectorField adjoint_source(const SpectralVectorField& u, double p, double T);

/// Marches the adjoint system backwards from u*(T) = 0 and returns u*(0), the
/// L2 gradient of the objective. With `history`, u* at every checkpoint is
/// stored in forward-time order.
SpectralVectorField solve_adjoint(const AdjointConfig& cfg, std::vector<SpectralVectorField>* history = nullptr);

struct GradientEvaluation {
    double objective = 0.0;
    SpectralVectorField l2_gradient;
    TrajectoryStore trajectory;
};

/// Forward solve, objective and adjoint in one call.
GradientEvaluation evaluate_gradient(const SpectralVectorField& u0, const SolverConfig& cfg, double p,
                                     StageInterpolation interp = StageInterpolation::cubic_hermite);

/// Tangent-linear directional derivative int_0^T <f(t), u'(t)> dt of the objective
/// along u0p, from the linearised solve and checkpoint quadrature.
double tangent_linear_derivative(const TrajectoryStore& traj, const SpectralVectorField& u0p, double p);

}  // namespace lps
