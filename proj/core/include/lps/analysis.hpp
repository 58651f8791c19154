#pragma once

#include "lps/flow_solver.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lps {

using Sample = std::pair<double, double>;

struct PowerLawFit {
    double prefactor = 0.0;
    double prefactor_stderr = 0.0;
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;

    double operator()(double x) const;
};

/// y = c x^a by linear least squares on (log x, log y). Throws ValidationError
/// for fewer than two points or nonpositive data. Standard errors are NaN for two points.
PowerLawFit fit_power_law(const std::vector<Sample>& points);

/// g(T) = psi - alpha exp(-beta T).
struct SaturationFit {
    double psi = 0.0, alpha = 0.0, beta = 0.0;
    double psi_stderr = 0.0, alpha_stderr = 0.0, beta_stderr = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;

    double operator()(double T) const;
};

/// Levenberg-Marquardt fit from psi = max y, alpha = psi - min y,
/// beta = 1/median T. Needs three points; converged = false after 200 iterations.
SaturationFit fit_saturation(const std::vector<Sample>& points, int max_iterations = 200);

/// int_0^T ||u||_L4^{8/3} dt / (2 K0 - ||u(T)||_L2^2). Throws ValidationError
/// when the denominator is not positive.
double xi_ratio(const TrajectoryStore& traj, double K0);
/// ||u0||_L4^{8/3} / (2 nu ||curl u0||_L2^2), the T -> 0 limit of xi_ratio.
double theta_limit(const SpectralVectorField& u0, double nu);

struct EnstrophyAuditEntry {
    double t = 0.0;
    double E = 0.0;
    double dEdt = 0.0;
    double rate_bound = 0.0;
    /// rate_bound - dEdt
    double rate_margin = 0.0;
    /// Finite-time envelope E0 / sqrt(1 - 27 E0^2 t/(4 pi^4 nu^3)); +inf past t0.
    double envelope = 0.0;
};

struct EnstrophyAudit {
    std::vector<EnstrophyAuditEntry> entries;
    double min_rate_margin = 0.0;
    double max_enstrophy = 0.0;
    double blowup_time_bound = 0.0;
    bool rate_bound_holds = true;
    bool envelope_holds = true;
};

/// Checks dE/dt <= 27 E^3 / (8 pi^4 nu^3) (centred differences, one-sided at
/// the ends) and E(t) against its integrated envelope.
EnstrophyAudit audit_enstrophy_bounds(const TrajectoryStore& traj, double nu);

/// ||u||_Lp / (||grad u||_L2^a ||u||_L2^{1-a}), a = 3(p-2)/(2p), p in [2, 6].
double audit_gn_inequality(const SpectralVectorField& u, double p);

struct EnergyBalanceAudit {
    /// |K_{j+1} - K_j + 2 nu int E dt| / h over each checkpoint interval.
    std::vector<double> residual_rate;
    double max_residual_rate = 0.0;
    double K0 = 0.0;
};

/// Energy equation residual with a Hermite-corrected trapezoid in time
/// (uses the stored rates for dE/dt at the checkpoints).
EnergyBalanceAudit audit_energy_balance(const TrajectoryStore& traj);

struct BlowupReport {
    bool flagged = false;
    std::string reason;
    double excess = 0.0;
    double threshold = 0.0;
    bool tail_convex = false;
    bool used_fit = false;
    SaturationFit fit;
};

/// Heuristic singularity flag on (T, max Phi_T) data: T Phi_T at the largest
/// horizon exceeds the saturation fit of the remaining points by three fit
/// standard errors while the tail grows convexly. Five or more points use
/// the fit; three or four points only the convexity test; fewer never flag.
BlowupReport lps_blowup_monitor(std::vector<Sample> family);

/// Finite-difference estimate of d/dt ||u||_L4^4 at t = 0 from short forward
/// solves: order 1 uses u(delta), order 2 uses u(delta) and u(2 delta).
double l4_rate_finite_difference(const SpectralVectorField& u0, double nu, double delta, int order = 1,
                                 int substeps = 4);

/// Sample standard error helper exposed for reporting: sqrt(rss/(n-k)).
double regression_sigma(double rss, std::size_t n, std::size_t k);

}  // namespace lps
