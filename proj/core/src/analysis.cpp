#include "lps/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double regression_sigma(double rss, std::size_t n, std::size_t k) {
    if (n <= k) return kNaN;
    return std::sqrt(std::max(0.0, rss) / double(n - k));
}

// Power law ---------------------------------------------------------------------

double PowerLawFit::operator()(double x) const { return prefactor * std::pow(x, exponent); }

PowerLawFit fit_power_law(const std::vector<Sample>& points) {
    if (points.size() < 2) throw ValidationError("power-law fit needs at least two points");
    const std::size_t n = points.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = points[i];
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
            throw ValidationError("power-law fit needs positive finite data");
        }
        lx[i] = std::log(x);
        ly[i] = std::log(y);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw ValidationError("power-law fit needs at least two distinct x values");
    PowerLawFit f;
    f.points = n;
    f.exponent = sxy / sxx;
    const double intercept = my - f.exponent * mx;
    f.prefactor = std::exp(intercept);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - intercept - f.exponent * lx[i];
        rss += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    const double s = regression_sigma(rss, n, 2);
    f.exponent_stderr = s / std::sqrt(sxx);
    const double intercept_se = s * std::sqrt(1.0 / double(n) + mx * mx / sxx);
    f.prefactor_stderr = f.prefactor * intercept_se;
    return f;
}

// Saturation ----------------------------------------------------------------------

double SaturationFit::operator()(double T) const { return psi - alpha * std::exp(-beta * T); }

SaturationFit fit_saturation(const std::vector<Sample>& points, int max_iterations) {
    if (points.size() < 3) throw ValidationError("saturation fit needs at least three points");
    const std::size_t n = points.size();
    Eigen::VectorXd t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[Eigen::Index(i)] = points[i].first;
        y[Eigen::Index(i)] = points[i].second;
        if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second)) {
            throw ValidationError("saturation fit needs finite data");
        }
    }
    std::vector<double> ts(t.data(), t.data() + n);
    std::sort(ts.begin(), ts.end());
    const double median = n % 2 ? ts[n / 2] : 0.5 * (ts[n / 2 - 1] + ts[n / 2]);
    if (!(median > 0.0)) throw ValidationError("saturation fit needs positive horizons");

    Eigen::Vector3d x(y.maxCoeff(), y.maxCoeff() - y.minCoeff(), 1.0 / median);
    auto residual = [&](const Eigen::Vector3d& q) {
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < Eigen::Index(n); ++i) r[i] = y[i] - (q[0] - q[1] * std::exp(-q[2] * t[i]));
        return r;
    };
    auto jacobian = [&](const Eigen::Vector3d& q) {
        // Derivatives of the model (not the residual).
        Eigen::MatrixXd J(n, 3);
        for (Eigen::Index i = 0; i < Eigen::Index(n); ++i) {
            const double e = std::exp(-q[2] * t[i]);
            J(i, 0) = 1.0;
            J(i, 1) = -e;
            J(i, 2) = q[1] * t[i] * e;
        }
        return J;
    };

    SaturationFit fit;
    Eigen::VectorXd r = residual(x);
    double cost = r.squaredNorm();
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    double lambda = 1e-3;
    int it = 0;
    for (; it < max_iterations; ++it) {
        if (std::sqrt(cost) <= 1e-15 * scale * std::sqrt(double(n))) {
            fit.converged = true;
            break;
        }
        const Eigen::MatrixXd J = jacobian(x);
        const Eigen::Matrix3d A = J.transpose() * J;
        const Eigen::Vector3d g = J.transpose() * r;
        if (g.norm() <= 1e-15 * scale * scale) {
            fit.converged = true;
            break;
        }
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::Matrix3d D = A;
            for (int k = 0; k < 3; ++k) D(k, k) += lambda * std::max(A(k, k), 1e-300);
            const Eigen::Vector3d step = D.ldlt().solve(g);
            const Eigen::Vector3d xn = x + step;
            if (!step.allFinite() || !(xn[2] > 0.0)) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::VectorXd rn = residual(xn);
            const double cn = rn.squaredNorm();
            if (cn <= cost) {
                const double rel_step = step.norm() / (x.norm() + 1e-300);
                x = xn;
                r = rn;
                const double dc = cost - cn;
                cost = cn;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (rel_step < 1e-14 || dc <= 1e-30 * scale * scale) fit.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            // No damping level reduces the cost: a stationary point at working precision.
            fit.converged = true;
            break;
        }
        if (fit.converged) {
            ++it;
            break;
        }
    }
    fit.iterations = it;
    fit.psi = x[0];
    fit.alpha = x[1];
    fit.beta = x[2];
    fit.residual_norm = std::sqrt(cost);
    const double s = regression_sigma(cost, n, 3);
    const Eigen::MatrixXd J = jacobian(x);
    const Eigen::Matrix3d cov = (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
    auto se = [&](int k) { return std::isnan(s) ? kNaN : s * std::sqrt(std::max(0.0, cov(k, k))); };
    fit.psi_stderr = se(0);
    fit.alpha_stderr = se(1);
    fit.beta_stderr = se(2);
    return fit;
}

// Estimates -----------------------------------------------------------------------

double xi_ratio(const TrajectoryStore& traj, double K0) {
    if (traj.levels() < 2) throw ValidationError("xi ratio needs at least two checkpoints");
    const double numerator = objective_phi(traj, 8.0 / 3.0) * traj.t_final();
    const double l2T = traj.diagnostics.back().l2_norm;
    const double denominator = 2.0 * K0 - l2T * l2T;
    if (!(denominator > 0.0)) throw ValidationError("xi ratio undefined: no energy was dissipated");
    return numerator / denominator;
}

double theta_limit(const SpectralVectorField& u0, double nu) {
    const double E = enstrophy(u0);
    const double K = kinetic_energy(u0);
    if (!(E > 1e-14 * std::max(K, 1e-300))) throw ValidationError("theta undefined: initial enstrophy vanishes");
    return std::pow(lq_norm(u0, 4.0), 8.0 / 3.0) / (4.0 * nu * E);
}

EnstrophyAudit audit_enstrophy_bounds(const TrajectoryStore& traj, double nu) {
    EnstrophyAudit a;
    const std::size_t m = traj.levels();
    if (m == 0) return a;
    const double pi4 = std::pow(std::numbers::pi, 4);
    const double c6 = 27.0 / (8.0 * pi4 * nu * nu * nu);
    const double c7 = 27.0 / (4.0 * pi4 * nu * nu * nu);
    const double E0 = traj.diagnostics[0].E;
    a.blowup_time_bound = E0 > 0.0 ? 1.0 / (c7 * E0 * E0) : std::numeric_limits<double>::infinity();
    a.min_rate_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        EnstrophyAuditEntry e;
        e.t = traj.times[j];
        e.E = traj.diagnostics[j].E;
        if (m >= 2) {
            const std::size_t lo = j == 0 ? 0 : j - 1;
            const std::size_t hi = j + 1 == m ? m - 1 : j + 1;
            e.dEdt = (traj.diagnostics[hi].E - traj.diagnostics[lo].E) / (traj.times[hi] - traj.times[lo]);
        }
        e.rate_bound = c6 * e.E * e.E * e.E;
        e.rate_margin = e.rate_bound - e.dEdt;
        const double arg = 1.0 - c7 * E0 * E0 * e.t;
        e.envelope = arg > 0.0 ? E0 / std::sqrt(arg) : std::numeric_limits<double>::infinity();
        a.min_rate_margin = std::min(a.min_rate_margin, e.rate_margin);
        a.max_enstrophy = std::max(a.max_enstrophy, e.E);
        if (e.rate_margin < 0.0) a.rate_bound_holds = false;
        if (e.E > e.envelope * (1.0 + 1e-12)) a.envelope_holds = false;
        a.entries.push_back(e);
    }
    return a;
}

double audit_gn_inequality(const SpectralVectorField& u, double p) {
    if (!(p >= 2.0 && p <= 6.0)) throw ValidationError("Gagliardo-Nirenberg audit needs p in [2, 6]");
    const double l2 = norm(u, Pairing::l2());
    if (!(l2 > 0.0)) throw ValidationError("Gagliardo-Nirenberg audit of the zero field");
    double grad2 = 0.0;
    for_each_mode(u.grid(), [&](std::size_t idx, int kx, int ky, int kz, double w) {
        const double k2 = kTwoPi * kTwoPi * double(kx * kx + ky * ky + kz * kz);
        grad2 += w * k2 * (std::norm(u[0][idx]) + std::norm(u[1][idx]) + std::norm(u[2][idx]));
    });
    const double alpha = 3.0 * (p - 2.0) / (2.0 * p);
    const double denom = std::pow(std::sqrt(grad2), alpha) * std::pow(l2, 1.0 - alpha);
    return lq_norm(u, p) / denom;
}

EnergyBalanceAudit audit_energy_balance(const TrajectoryStore& traj) {
    if (!traj.has_states() || traj.rates.size() != traj.states.size() || traj.levels() < 2) {
        throw ValidationError("energy audit needs stored states and rates");
    }
    const double nu = traj.config.nu;
    EnergyBalanceAudit a;
    a.K0 = traj.diagnostics[0].K;
    std::vector<double> dE(traj.levels());
    for (std::size_t j = 0; j < dE.size(); ++j) dE[j] = enstrophy_rate(traj.states[j], traj.rates[j]);
    for (std::size_t j = 0; j + 1 < traj.levels(); ++j) {
        const double h = traj.times[j + 1] - traj.times[j];
        const double E0 = traj.diagnostics[j].E, E1 = traj.diagnostics[j + 1].E;
        const double integral = 0.5 * h * (E0 + E1) + h * h / 12.0 * (dE[j] - dE[j + 1]);
        const double r = std::abs(traj.diagnostics[j + 1].K - traj.diagnostics[j].K + 2.0 * nu * integral) / h;
        a.residual_rate.push_back(r);
        a.max_residual_rate = std::max(a.max_residual_rate, r);
    }
    return a;
}

BlowupReport lps_blowup_monitor(std::vector<Sample> family) {
    BlowupReport rep;
    std::sort(family.begin(), family.end());
    const std::size_t n = family.size();
    if (n < 3) {
        rep.reason = "fewer than three horizons";
        return rep;
    }
    std::vector<double> y(n), T(n);
    for (std::size_t i = 0; i < n; ++i) {
        T[i] = family[i].first;
        y[i] = family[i].first * family[i].second;
    }
    const double s_last = (y[n - 1] - y[n - 2]) / (T[n - 1] - T[n - 2]);
    const double s_prev = (y[n - 2] - y[n - 3]) / (T[n - 2] - T[n - 3]);
    rep.tail_convex = s_last > 0.0 && s_last > s_prev * (1.0 + 1e-6);
    if (n >= 5) {
        std::vector<Sample> head;
        for (std::size_t i = 0; i + 1 < n; ++i) head.emplace_back(T[i], y[i]);
        rep.fit = fit_saturation(head);
        const bool usable = rep.fit.converged && rep.fit.psi > 0.0 && rep.fit.alpha > 0.0 && rep.fit.beta > 0.0;
        if (usable) {
            rep.used_fit = true;
            double sigma = regression_sigma(rep.fit.residual_norm * rep.fit.residual_norm, head.size(), 3);
            if (std::isfinite(rep.fit.psi_stderr)) sigma = std::max(sigma, rep.fit.psi_stderr);
            if (!std::isfinite(sigma)) sigma = 0.0;
            rep.threshold = 3.0 * std::max(sigma, 1e-9 * std::abs(y[n - 1]));
            rep.excess = y[n - 1] - std::max(rep.fit(T[n - 1]), rep.fit.psi);
            rep.flagged = rep.excess > rep.threshold && rep.tail_convex;
            rep.reason = rep.flagged ? "growth exceeds saturation fit" : "consistent with saturation";
            return rep;
        }
    }
    rep.flagged = rep.tail_convex;
    rep.reason = rep.flagged ? "convex tail growth" : "no convex tail growth";
    return rep;
}

double l4_rate_finite_difference(const SpectralVectorField& u0, double nu, double delta, int order, int substeps) {
    if (!(delta > 0.0)) throw ValidationError("finite-difference step must be positive");
    if (order != 1 && order != 2) throw ValidationError("finite-difference order must be 1 or 2");
    if (substeps < 1) throw ValidationError("substeps must be positive");
    SolverConfig cfg;
    cfg.nu = nu;
    cfg.n = u0.grid().n();
    cfg.dt = delta / substeps;
    cfg.t_final = order * delta;
    cfg.save_stride = substeps;
    cfg.store_states = false;
    const TrajectoryStore traj = solve_forward(u0, cfg);
    auto q4 = [&](std::size_t j) { return std::pow(traj.diagnostics[j].l4_norm, 4); };
    if (order == 1) return (q4(1) - q4(0)) / delta;
    return (4.0 * q4(1) - q4(2) - 3.0 * q4(0)) / (2.0 * delta);
}

}  // namespace lps
