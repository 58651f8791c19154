#include "lps/flow_solver.hpp"

#include "lps/log.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lps {

namespace {

// Symmetric tensor components in the order xx, yy, zz, xy, xz, yz.
constexpr int kSym[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};

// Returns -P(filter(div T)) for the symmetric tensor T given in physical space.
SpectralVectorField projected_divergence(std::array<PhysicalField, 6>& tensor, const WaveGrid& g) {
    std::array<SpectralScalarField, 6> t;
    for (int c = 0; c < 6; ++c) t[c] = to_spectral(tensor[c]);
    SpectralVectorField out(g);
    const int n = g.n();
    const auto& filter = dealias_table(g);
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        if (kx == -n / 2 || ky == -n / 2 || kz == n / 2) return;
        const double k[3] = {double(kx), double(ky), double(kz)};
        const double m = filter[idx];
        for (int i = 0; i < 3; ++i) {
            Complex s = 0.0;
            for (int j = 0; j < 3; ++j) s += k[j] * t[kSym[i][j]][idx];
            out[i][idx] = Complex(0.0, kTwoPi) * s * m;
        }
    });
    out = leray_project(out);
    out *= -1.0;
    return out;
}

}  // namespace

// Config -----------------------------------------------------------------------

int SolverConfig::step_count() const {
    if (dt >= t_final) return 1;
    return std::max(1, int(std::ceil(t_final / dt - 1e-9)));
}

double SolverConfig::effective_dt() const { return t_final / step_count(); }

void SolverConfig::validate() const {
    if (!(nu > 0.0)) throw ValidationError("viscosity must be positive");
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    if (!(t_final > 0.0)) throw ValidationError("time horizon must be positive");
    if (n < 4 || n % 2 != 0) throw ValidationError("resolution must be an even integer >= 4");
    if (save_stride < 1) throw ValidationError("save stride must be >= 1");
    if (step_count() % save_stride != 0) {
        std::ostringstream os;
        os << "step count " << step_count() << " is not a multiple of save stride " << save_stride;
        throw ValidationError(os.str());
    }
}

// Trajectory -------------------------------------------------------------------

SpectralVectorField TrajectoryStore::interpolate(std::size_t j, double theta) const {
    if (!has_states() || rates.size() != states.size() || j + 1 >= states.size()) {
        throw ValidationError("trajectory has no stored interval for interpolation");
    }
    const double h = times[j + 1] - times[j];
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    SpectralVectorField out = states[j];
    out *= h00;
    out.axpy(h10 * h, rates[j]);
    out.axpy(h01, states[j + 1]);
    out.axpy(h11 * h, rates[j + 1]);
    out.set_role(FieldRole::velocity);
    return out;
}

// Right-hand sides -------------------------------------------------------------

SpectralVectorField nonlinear_term(const SpectralVectorField& u) {
    const WaveGrid& g = u.grid();
    const PhysicalVectorField up = to_physical(u);
    std::array<PhysicalField, 6> tensor;
    for (auto& t : tensor) t = PhysicalField(g);
    const std::size_t np = g.physical_size();
    for (std::size_t p = 0; p < np; ++p) {
        const double a = up[0].values[p], b = up[1].values[p], c = up[2].values[p];
        tensor[0].values[p] = a * a;
        tensor[1].values[p] = b * b;
        tensor[2].values[p] = c * c;
        tensor[3].values[p] = a * b;
        tensor[4].values[p] = a * c;
        tensor[5].values[p] = b * c;
    }
    return projected_divergence(tensor, g);
}

SpectralVectorField linearized_term(const SpectralVectorField& up, const SpectralVectorField& u) {
    const WaveGrid& g = u.grid();
    if (up.grid() != g) throw ValidationError("trajectory/grid mismatch");
    const PhysicalVectorField p1 = to_physical(up);
    const PhysicalVectorField p0 = to_physical(u);
    std::array<PhysicalField, 6> tensor;
    for (auto& t : tensor) t = PhysicalField(g);
    const std::size_t np = g.physical_size();
    for (std::size_t p = 0; p < np; ++p) {
        const double a = p0[0].values[p], b = p0[1].values[p], c = p0[2].values[p];
        const double x = p1[0].values[p], y = p1[1].values[p], z = p1[2].values[p];
        tensor[0].values[p] = 2 * a * x;
        tensor[1].values[p] = 2 * b * y;
        tensor[2].values[p] = 2 * c * z;
        tensor[3].values[p] = a * y + b * x;
        tensor[4].values[p] = a * z + c * x;
        tensor[5].values[p] = b * z + c * y;
    }
    return projected_divergence(tensor, g);
}

SpectralVectorField time_derivative(const SpectralVectorField& u, double nu) {
    SpectralVectorField r = nonlinear_term(u);
    r.axpy(nu, laplacian(u));
    return r;
}

// Time stepping ----------------------------------------------------------------

DecayFactors::DecayFactors(const WaveGrid& g, double nu, double h)
    : full_(g.spectral_size()), half_(g.spectral_size()) {
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        const double lam = nu * kTwoPi * kTwoPi * double(kx * kx + ky * ky + kz * kz);
        full_[idx] = std::exp(-lam * h);
        half_[idx] = std::exp(-0.5 * lam * h);
    });
}

void DecayFactors::apply(SpectralVectorField& v, const std::vector<double>& f) {
    for (int c = 0; c < 3; ++c) {
        auto coeffs = v[c].coeffs();
        for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] *= f[i];
    }
}

SpectralVectorField if_rk4_step(const SpectralVectorField& u, double h, const DecayFactors& decay,
                                const std::function<SpectralVectorField(const SpectralVectorField&, int)>& explicit_term,
                                const SpectralVectorField* first) {
    const SpectralVectorField a = first ? *first : explicit_term(u, 0);

    SpectralVectorField eu_half = u;
    decay.apply_half(eu_half);
    SpectralVectorField eu_full = u;
    decay.apply_full(eu_full);

    SpectralVectorField u1 = u;
    u1.axpy(0.5 * h, a);
    decay.apply_half(u1);
    const SpectralVectorField b = explicit_term(u1, 1);

    SpectralVectorField u2 = eu_half;
    u2.axpy(0.5 * h, b);
    const SpectralVectorField c = explicit_term(u2, 2);

    SpectralVectorField ec = c;
    decay.apply_half(ec);
    SpectralVectorField u3 = eu_full;
    u3.axpy(h, ec);
    const SpectralVectorField d = explicit_term(u3, 3);

    SpectralVectorField ea = a;
    decay.apply_full(ea);
    SpectralVectorField bc = b + c;
    decay.apply_half(bc);

    SpectralVectorField out = eu_full;
    out.axpy(h / 6.0, ea);
    out.axpy(h / 3.0, bc);
    out.axpy(h / 6.0, d);
    out.set_role(u.role());
    return out;
}

SpectralVectorField step_forward(const SpectralVectorField& u, double dt, double nu) {
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    const DecayFactors decay(u.grid(), nu, dt);
    SpectralVectorField out =
        if_rk4_step(u, dt, decay, [](const SpectralVectorField& v, int) { return nonlinear_term(v); });
    if (!out.all_finite()) throw NumericalAbort("non-finite velocity after forward step");
    return out;
}

double cfl_number(const SpectralVectorField& u, double dt) {
    const PhysicalVectorField p = to_physical(u);
    double vmax = 0.0;
    for (std::size_t i = 0; i < p[0].values.size(); ++i) {
        const double s = p[0].values[i] * p[0].values[i] + p[1].values[i] * p[1].values[i] +
                         p[2].values[i] * p[2].values[i];
        vmax = std::max(vmax, s);
    }
    return dt * std::sqrt(vmax) * u.grid().n();
}

TrajectoryStore solve_forward(const SpectralVectorField& u0, const SolverConfig& cfg) {
    cfg.validate();
    if (u0.grid().n() != cfg.n) throw ValidationError("initial condition resolution does not match solver");
    if (!u0.all_finite()) throw NumericalAbort("non-finite initial condition");

    const int steps = cfg.step_count();
    const double dt = cfg.effective_dt();
    const WaveGrid& g = u0.grid();
    const DecayFactors decay(g, cfg.nu, dt);

    TrajectoryStore traj;
    traj.config = cfg;
    traj.config.dt = dt;
    const std::size_t levels = std::size_t(steps / cfg.save_stride) + 1;
    traj.times.reserve(levels);
    traj.diagnostics.reserve(levels);
    if (cfg.store_states) {
        traj.states.reserve(levels);
        traj.rates.reserve(levels);
    }

    auto check_cfl = [&](const DiagnosticsRecord& d) {
        const double c = dt * d.max_velocity * cfg.n;
        if (c > cfg.cfl_abort) {
            std::ostringstream os;
            os << "CFL number " << c << " exceeds abort bound " << cfg.cfl_abort << " at t=" << d.t;
            throw NumericalAbort(os.str());
        }
        return c;
    };

    SpectralVectorField u = u0;
    u.set_role(FieldRole::velocity);
    SpectralVectorField a = nonlinear_term(u);

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.diagnostics.push_back(compute_diagnostics(u, t));
        if (cfg.store_states) {
            traj.states.push_back(u);
            SpectralVectorField r = a;
            r.axpy(cfg.nu, laplacian(u));
            traj.rates.push_back(std::move(r));
        }
    };

    record(0.0);
    const double c0 = check_cfl(traj.diagnostics.back());
    if (c0 > cfg.cfl_warn) {
        std::ostringstream os;
        os << "initial CFL estimate " << c0 << " exceeds safety bound " << cfg.cfl_warn;
        log_warning(os.str());
    }

    double K = traj.diagnostics.back().K;
    for (int s = 1; s <= steps; ++s) {
        u = if_rk4_step(u, dt, decay, [](const SpectralVectorField& v, int) { return nonlinear_term(v); }, &a);
        if (!u.all_finite()) {
            std::ostringstream os;
            os << "forward solve became non-finite at step " << s << " (t=" << s * dt << ")";
            throw NumericalAbort(os.str());
        }
        const double Knew = kinetic_energy(u);
        if (cfg.energy_growth_abort >= 0.0 && Knew > K * (1.0 + cfg.energy_growth_abort)) {
            std::ostringstream os;
            os << "kinetic energy grew by a relative " << (Knew - K) / K << " at step " << s << " (t=" << s * dt
               << "); the solution is under-resolved";
            throw NumericalAbort(os.str());
        }
        K = Knew;
        a = nonlinear_term(u);
        if (s % cfg.save_stride == 0) {
            record(s == steps ? cfg.t_final : s * dt);
            check_cfl(traj.diagnostics.back());
        }
    }
    return traj;
}

SpectralVectorField solve_linearized(const TrajectoryStore& traj, const SpectralVectorField& u0p,
                                     std::vector<SpectralVectorField>* history) {
    if (!traj.has_states() || traj.rates.size() != traj.states.size() || traj.levels() < 2) {
        throw ValidationError("linearised solve needs a complete stored trajectory");
    }
    if (u0p.grid() != traj.grid()) throw ValidationError("trajectory/grid mismatch");

    const double h = traj.interval();
    const DecayFactors decay(traj.grid(), traj.config.nu, h);
    SpectralVectorField v = u0p;
    v.set_role(FieldRole::perturbation);
    if (history) {
        history->clear();
        history->push_back(v);
    }
    for (std::size_t j = 0; j + 1 < traj.levels(); ++j) {
        const SpectralVectorField mid = traj.interpolate(j, 0.5);
        const SpectralVectorField* bg[4] = {&traj.states[j], &mid, &mid, &traj.states[j + 1]};
        v = if_rk4_step(v, h, decay,
                        [&](const SpectralVectorField& w, int stage) { return linearized_term(w, *bg[stage]); });
        if (!v.all_finite()) throw NumericalAbort("linearised solve became non-finite");
        if (history) history->push_back(v);
    }
    return v;
}

}  // namespace lps
