#include "lps/functionals.hpp"

#include "lps/errors.hpp"
#include "lps/flow_solver.hpp"

#include <algorithm>
#include <cmath>

namespace lps {

namespace {

double magnitude_sq(const PhysicalVectorField& u, std::size_t p) {
    return u[0].values[p] * u[0].values[p] + u[1].values[p] * u[1].values[p] + u[2].values[p] * u[2].values[p];
}

// Vorticity component c of mode idx: 2 pi i (k x u_hat)_c.
Complex vorticity_mode(const SpectralVectorField& u, std::size_t idx, int c, int kx, int ky, int kz) {
    const double k[3] = {double(kx), double(ky), double(kz)};
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    return Complex(0.0, kTwoPi) * (k[a] * u[b][idx] - k[b] * u[a][idx]);
}

}  // namespace

double lq_norm(const PhysicalVectorField& u, double q) {
    if (!(q >= 1.0)) throw ValidationError("L^q norm requires q >= 1");
    const std::size_t np = u[0].values.size();
    if (np == 0) return 0.0;
    double s = 0.0;
    if (q == 4.0) {
        for (std::size_t p = 0; p < np; ++p) {
            const double m = magnitude_sq(u, p);
            s += m * m;
        }
    } else if (q == 2.0) {
        for (std::size_t p = 0; p < np; ++p) s += magnitude_sq(u, p);
    } else {
        for (std::size_t p = 0; p < np; ++p) s += std::pow(magnitude_sq(u, p), 0.5 * q);
    }
    return std::pow(s / double(np), 1.0 / q);
}

double lq_norm(const SpectralVectorField& u, double q) {
    if (!(q >= 1.0)) throw ValidationError("L^q norm requires q >= 1");
    return lq_norm(to_physical(u), q);
}

double kinetic_energy(const SpectralVectorField& u) { return 0.5 * inner_product(u, u, Pairing::l2()); }

std::array<double, 3> componentwise_enstrophy(const SpectralVectorField& u) {
    std::array<double, 3> e{};
    for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, double w) {
        for (int c = 0; c < 3; ++c) e[c] += w * std::norm(vorticity_mode(u, idx, c, kx, ky, kz));
    });
    for (auto& x : e) x *= 0.5;
    return e;
}

double enstrophy(const SpectralVectorField& u) {
    const auto e = componentwise_enstrophy(u);
    return e[0] + e[1] + e[2];
}

DiagnosticsRecord compute_diagnostics(const SpectralVectorField& u, double t) {
    DiagnosticsRecord d;
    d.t = t;
    d.K = kinetic_energy(u);
    d.Ei = componentwise_enstrophy(u);
    d.E = d.Ei[0] + d.Ei[1] + d.Ei[2];
    const PhysicalVectorField up = to_physical(u);
    double s4 = 0.0, s2 = 0.0, vmax = 0.0;
    const std::size_t np = up[0].values.size();
    for (std::size_t p = 0; p < np; ++p) {
        const double m = magnitude_sq(up, p);
        s2 += m;
        s4 += m * m;
        vmax = std::max(vmax, m);
    }
    d.l4_norm = std::pow(s4 / double(np), 0.25);
    d.l2_norm = std::sqrt(s2 / double(np));
    d.h34_seminorm = norm(u, Pairing::h34_dot());
    d.max_velocity = std::sqrt(vmax);
    return d;
}

double enstrophy_rate(const SpectralVectorField& u, const SpectralVectorField& dudt) {
    double s = 0.0;
    for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, double w) {
        for (int c = 0; c < 3; ++c) {
            s += w * std::real(vorticity_mode(u, idx, c, kx, ky, kz) *
                               std::conj(vorticity_mode(dudt, idx, c, kx, ky, kz)));
        }
    });
    return s;
}

double kinetic_energy_rate(const SpectralVectorField& u, const SpectralVectorField& dudt) {
    return inner_product(u, dudt, Pairing::l2());
}

double uniform_quadrature(std::span<const double> f, double h) {
    if (f.size() < 2) throw ValidationError("quadrature needs at least two samples");
    const std::size_t intervals = f.size() - 1;
    if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
    std::size_t simpson_end = intervals;
    double tail = 0.0;
    if (intervals % 2 == 1) {
        simpson_end = intervals - 3;
        const std::size_t a = simpson_end;
        tail = 3.0 * h / 8.0 * (f[a] + 3.0 * f[a + 1] + 3.0 * f[a + 2] + f[a + 3]);
    }
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
    return h / 3.0 * s + tail;
}

double objective_from_l4(std::span<const double> l4, double h, double p) {
    if (l4.size() < 2) throw ValidationError("objective needs at least two checkpoints");
    std::vector<double> integrand(l4.size());
    std::transform(l4.begin(), l4.end(), integrand.begin(), [p](double v) { return std::pow(v, p); });
    const double T = h * double(l4.size() - 1);
    return uniform_quadrature(integrand, h) / T;
}

double objective_phi(const TrajectoryStore& traj, double p) {
    if (traj.levels() < 2) throw ValidationError("objective needs at least two checkpoints");
    std::vector<double> l4(traj.levels());
    for (std::size_t j = 0; j < l4.size(); ++j) l4[j] = traj.diagnostics[j].l4_norm;
    return objective_from_l4(l4, traj.interval(), p);
}

double instantaneous_l4_rate(const SpectralVectorField& u0, double nu) {
    const PhysicalVectorField u = to_physical(u0);
    const PhysicalVectorField r = to_physical(time_derivative(u0, nu));
    const std::size_t np = u[0].values.size();
    double s = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const double m = magnitude_sq(u, p);
        s += m * (u[0].values[p] * r[0].values[p] + u[1].values[p] * r[1].values[p] + u[2].values[p] * r[2].values[p]);
    }
    return 4.0 * s / double(np);
}

}  // namespace lps
