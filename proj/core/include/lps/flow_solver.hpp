#pragma once

#include "lps/errors.hpp"
#include "lps/functionals.hpp"
#include "lps/spectral.hpp"

#include <functional>
#include <vector>

namespace lps {

struct SolverConfig {
    double nu = 0.01;
    double dt = 5e-4;
    double t_final = 0.01;
    int n = 32;
    int save_stride = 1;
    /// dt * max|u| * n above this is reported as a warning.
    double cfl_warn = 0.5;
    /// ... and above this the run aborts as unstable.
    double cfl_abort = 1.0;
    /// Relative kinetic-energy growth over one step that counts as an
    /// under-resolved (aliasing-driven) solve and aborts; negative disables.
    double energy_growth_abort = 1e-10;
    /// When false only diagnostics are kept (objective evaluations).
    bool store_states = true;

    /// Number of steps after shrinking dt so that t_final is an integer multiple.
    int step_count() const;
    double effective_dt() const;
    void validate() const;
};

/// Checkpointed forward solution. states[j] and rates[j] (du/dt) live at times[j].
class TrajectoryStore {
public:
    SolverConfig config;
    std::vector<double> times;
    std::vector<SpectralVectorField> states;
    std::vector<SpectralVectorField> rates;
    std::vector<DiagnosticsRecord> diagnostics;

    std::size_t levels() const { return times.size(); }
    bool has_states() const { return !states.empty() && states.size() == times.size(); }
    double interval() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
    double t_final() const { return times.empty() ? 0.0 : times.back(); }
    const WaveGrid& grid() const { return states.front().grid(); }

    /// Cubic Hermite reconstruction inside interval [t_j, t_{j+1}], theta in [0,1].
    SpectralVectorField interpolate(std::size_t j, double theta) const;
};

/// -P(filter(u . grad u)): projected, de-aliased advection with pressure eliminated.
SpectralVectorField nonlinear_term(const SpectralVectorField& u);
/// -P(filter(u' . grad u + u . grad u')).
SpectralVectorField linearized_term(const SpectralVectorField& up, const SpectralVectorField& u);
/// nonlinear_term(u) + nu Lap u.
SpectralVectorField time_derivative(const SpectralVectorField& u, double nu);

/// Per-mode integrating factors exp(-nu (2 pi |k|)^2 h) for h and h/2.
class DecayFactors {
public:
    DecayFactors(const WaveGrid& g, double nu, double h);
    void apply_full(SpectralVectorField& v) const { apply(v, full_); }
    void apply_half(SpectralVectorField& v) const { apply(v, half_); }

private:
    static void apply(SpectralVectorField& v, const std::vector<double>& f);
    std::vector<double> full_;
    std::vector<double> half_;
};

/// Integrating-factor RK4 step for du/dt = L u + G(u, stage) with L the
/// diagonal decay encoded in `decay`. `explicit_term(v, stage)` is called
/// with stage 0 (start), 1 and 2 (midpoint), 3 (end). `first` optionally
/// supplies G at stage 0.
SpectralVectorField if_rk4_step(const SpectralVectorField& u, double h, const DecayFactors& decay,
                                const std::function<SpectralVectorField(const SpectralVectorField&, int)>& explicit_term,
                                const SpectralVectorField* first = nullptr);

/// One forward Navier-Stokes step. Throws NumericalAbort on non-finite output.
SpectralVectorField step_forward(const SpectralVectorField& u, double dt, double nu);

/// Integrates the forward system over [0, cfg.t_final], recording checkpoints
/// every save_stride steps. Throws NumericalAbort on instability.
TrajectoryStore solve_forward(const SpectralVectorField& u0, const SolverConfig& cfg);

/// Integrates the linearised system around `traj` from u0p, marching between
/// checkpoints with the background reconstructed at stage times. If `history`
/// is given, u' at every checkpoint is appended to it.
SpectralVectorField solve_linearized(const TrajectoryStore& traj, const SpectralVectorField& u0p,
                                     std::vector<SpectralVectorField>* history = nullptr);

/// dt * max|u| * n for the state u.
double cfl_number(const SpectralVectorField& u, double dt);

}  // namespace lps
