#pragma once

#include "lps/spectral.hpp"

#include <array>
#include <span>
#include <vector>

namespace lps {

class TrajectoryStore;

/// Scalar diagnostics of one velocity state. Enstrophies carry the 1/2
/// factor, so E == E1 + E2 + E3.
struct DiagnosticsRecord {
    double t = 0.0;
    double K = 0.0;
    double E = 0.0;
    std::array<double, 3> Ei{};
    double l4_norm = 0.0;
    double l2_norm = 0.0;
    double h34_seminorm = 0.0;
    double max_velocity = 0.0;
};

/// (int |u|^q dx)^{1/q} by uniform-weight quadrature on the collocation grid.
double lq_norm(const SpectralVectorField& u, double q);
double lq_norm(const PhysicalVectorField& u, double q);

/// 1/2 ||u||_L2^2.
double kinetic_energy(const SpectralVectorField& u);
/// 1/2 ||curl u||_L2^2.
double enstrophy(const SpectralVectorField& u);
std::array<double, 3> componentwise_enstrophy(const SpectralVectorField& u);

DiagnosticsRecord compute_diagnostics(const SpectralVectorField& u, double t);

/// Time derivative of the enstrophy given the state and its time derivative.
double enstrophy_rate(const SpectralVectorField& u, const SpectralVectorField& dudt);
/// Time derivative of the kinetic energy given the state and its time derivative.
double kinetic_energy_rate(const SpectralVectorField& u, const SpectralVectorField& dudt);

/// Composite Simpson quadrature over uniformly spaced samples. An odd number
/// of intervals closes with the 3/8 rule; one interval uses the trapezoid.
double uniform_quadrature(std::span<const double> values, double h);

/// (1/T) int_0^T ||u||_L4^p dt over the checkpoints of a trajectory.
double objective_phi(const TrajectoryStore& traj, double p);
/// Same integrand over a bare series of L4 norms at uniform spacing h.
double objective_from_l4(std::span<const double> l4, double h, double p);

/// d/dt ||u||_L4^4 at t = 0 for Navier-Stokes data u0 (divergence-free),
/// i.e. 4 int |u|^2 u . (-P(u.grad u) + nu Lap u) dx.
double instantaneous_l4_rate(const SpectralVectorField& u0, double nu);

}  // namespace lps
