#include "lps/adjoint.hpp"

#include <cmath>
#include <optional>

namespace lps {

namespace {

double l4_of(const PhysicalVectorField& u) { return lq_norm(u, 4.0); }

SpectralVectorField source_from_physical(const PhysicalVectorField& u, double p, double T) {
    const WaveGrid& g = u[0].grid;
    const double b = l4_of(u);
    if (b == 0.0) return SpectralVectorField(g);
    const double scale = (p / T) * std::pow(b, p - 4.0);
    PhysicalVectorField w{PhysicalField(g), PhysicalField(g), PhysicalField(g)};
    for (std::size_t i = 0; i < u[0].values.size(); ++i) {
        const double m = u[0].values[i] * u[0].values[i] + u[1].values[i] * u[1].values[i] +
                         u[2].values[i] * u[2].values[i];
        for (int c = 0; c < 3; ++c) w[c].values[i] = scale * m * u[c].values[i];
    }
    return dealias_filter(to_spectral(w));
}

// Forward quantities needed at one adjoint stage time.
struct StageData {
    PhysicalVectorField u;
    SpectralVectorField f;
};

StageData make_stage(const SpectralVectorField& u, double p, double T) {
    StageData s;
    s.u = to_physical(u);
    s.f = source_from_physical(s.u, p, T);
    return s;
}

// P(A(u, v) + f) with A_i = u_j (d_j w_i + d_i w_j) and w = filter(v); the
// filter sits where the transpose of the forward de-aliasing puts it.
SpectralVectorField adjoint_rhs(const SpectralVectorField& v, const StageData& s) {
    const WaveGrid& g = v.grid();
    const SpectralVectorField w = dealias_filter(v);
    std::array<PhysicalVectorField, 3> dw;  // dw[i][j] = d_j w_i
    for (int i = 0; i < 3; ++i) dw[i] = to_physical(gradient(w[i]));
    PhysicalVectorField a{PhysicalField(g), PhysicalField(g), PhysicalField(g)};
    const std::size_t np = g.physical_size();
    for (std::size_t p = 0; p < np; ++p) {
        const double u[3] = {s.u[0].values[p], s.u[1].values[p], s.u[2].values[p]};
        for (int i = 0; i < 3; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 3; ++j) acc += u[j] * (dw[i][j].values[p] + dw[j][i].values[p]);
            a[i].values[p] = acc;
        }
    }
    SpectralVectorField out = to_spectral(a);
    out += s.f;
    out = leray_project(out);
    out.set_role(FieldRole::adjoint);
    return out;
}

SpectralVectorField midpoint_state(const TrajectoryStore& traj, std::size_t j, StageInterpolation mode) {
    if (mode == StageInterpolation::cubic_hermite) return traj.interpolate(j, 0.5);
    SpectralVectorField m = traj.states[j];
    m += traj.states[j + 1];
    m *= 0.5;
    return m;
}

}  // namespace

void AdjointConfig::validate() const {
    if (!(p > 0.0)) throw ValidationError("objective exponent must be positive");
    if (!forward) throw ValidationError("adjoint requires a forward trajectory");
    if (!forward->has_states() || forward->levels() < 2) {
        throw ValidationError("adjoint requires stored forward checkpoints");
    }
    if (interpolation == StageInterpolation::cubic_hermite && forward->rates.size() != forward->states.size()) {
        throw ValidationError("cubic Hermite reconstruction requires stored rates");
    }
}

SpectralVectorField adjoint_source(const SpectralVectorField& u, double p, double T) {
    if (!(T > 0.0)) throw ValidationError("time horizon must be positive");
    SpectralVectorField f = source_from_physical(to_physical(u), p, T);
    f.set_role(FieldRole::unspecified);
    return f;
}

SpectralVectorField solve_adjoint(const AdjointConfig& cfg, std::vector<SpectralVectorField>* history) {
    cfg.validate();
    const TrajectoryStore& traj = *cfg.forward;
    const double T = traj.t_final();
    const double h = traj.interval();
    const std::size_t levels = traj.levels();
    const WaveGrid& g = traj.grid();
    const DecayFactors decay(g, traj.config.nu, h);

    SpectralVectorField v(g, FieldRole::adjoint);
    std::vector<SpectralVectorField> rev;
    if (history) rev.push_back(v);

    std::optional<StageData> end = make_stage(traj.states[levels - 1], cfg.p, T);
    for (std::size_t step = 0; step + 1 < levels; ++step) {
        const std::size_t j = levels - 2 - step;  // forward interval [t_j, t_{j+1}]
        const StageData mid = make_stage(midpoint_state(traj, j, cfg.interpolation), cfg.p, T);
        StageData start = make_stage(traj.states[j], cfg.p, T);
        const StageData* bg[4] = {&*end, &mid, &mid, &start};
        v = if_rk4_step(v, h, decay, [&](const SpectralVectorField& x, int stage) { return adjoint_rhs(x, *bg[stage]); });
        if (!v.all_finite()) throw NumericalAbort("adjoint solve became non-finite");
        v.set_role(FieldRole::adjoint);
        if (history) rev.push_back(v);
        end = std::move(start);
    }
    if (history) history->assign(rev.rbegin(), rev.rend());
    return v;
}

GradientEvaluation evaluate_gradient(const SpectralVectorField& u0, const SolverConfig& cfg, double p,
                                     StageInterpolation interp) {
    GradientEvaluation out;
    SolverConfig c = cfg;
    c.store_states = true;
    out.trajectory = solve_forward(u0, c);
    out.objective = objective_phi(out.trajectory, p);
    AdjointConfig ac{p, &out.trajectory, interp};
    out.l2_gradient = solve_adjoint(ac);
    out.l2_gradient.set_role(FieldRole::gradient);
    return out;
}

double tangent_linear_derivative(const TrajectoryStore& traj, const SpectralVectorField& u0p, double p) {
    std::vector<SpectralVectorField> up;
    solve_linearized(traj, u0p, &up);
    const double T = traj.t_final();
    std::vector<double> integrand(up.size());
    for (std::size_t j = 0; j < up.size(); ++j) {
        integrand[j] = inner_product(adjoint_source(traj.states[j], p, T), up[j], Pairing::l2());
    }
    return uniform_quadrature(integrand, traj.interval());
}

}  // namespace lps
