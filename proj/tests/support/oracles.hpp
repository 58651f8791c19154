#pragma once

// Reference computations shared by the test suites: closed-form fields,
// a naive DFT and direct physical-space quadrature.

#include "lps/spectral.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

using lps::Complex;
using lps::PhysicalField;
using lps::PhysicalVectorField;
using lps::SpectralScalarField;
using lps::SpectralVectorField;
using lps::WaveGrid;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

using ScalarFn = std::function<double(double, double, double)>;

inline PhysicalField sample(const WaveGrid& g, const ScalarFn& f) {
    PhysicalField p(g);
    const int n = g.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) p.values[g.physical_index(i, j, l)] = f(double(i) / n, double(j) / n, double(l) / n);
    return p;
}

inline SpectralScalarField scalar(const WaveGrid& g, const ScalarFn& f) { return lps::to_spectral(sample(g, f)); }

inline SpectralVectorField vector(const WaveGrid& g, const ScalarFn& fx, const ScalarFn& fy, const ScalarFn& fz,
                                  lps::FieldRole role = lps::FieldRole::velocity) {
    return lps::to_spectral(PhysicalVectorField{sample(g, fx), sample(g, fy), sample(g, fz)}, role);
}

inline double zero(double, double, double) { return 0.0; }

/// u = (A sin(2 pi y), 0, 0)
inline SpectralVectorField shear(const WaveGrid& g, double A) {
    return vector(g, [A](double, double y, double) { return A * std::sin(two_pi * y); }, zero, zero);
}

/// 2D Taylor-Green vortex (A sin 2pi x cos 2pi y, -A cos 2pi x sin 2pi y, 0).
inline SpectralVectorField taylor_green(const WaveGrid& g, double A) {
    return vector(
        g, [A](double x, double y, double) { return A * std::sin(two_pi * x) * std::cos(two_pi * y); },
        [A](double x, double y, double) { return -A * std::cos(two_pi * x) * std::sin(two_pi * y); }, zero);
}

/// Taylor-Green advected by a uniform velocity (U, 0, 0) at time t: exact Navier-Stokes solution.
inline SpectralVectorField advected_taylor_green(const WaveGrid& g, double A, double U, double nu, double t) {
    const double a = A * std::exp(-8.0 * pi * pi * nu * t);
    return vector(
        g, [=](double x, double y, double) { return U + a * std::sin(two_pi * (x - U * t)) * std::cos(two_pi * y); },
        [=](double x, double y, double) { return -a * std::cos(two_pi * (x - U * t)) * std::sin(two_pi * y); }, zero);
}

/// Naive forward DFT coefficient n^-3 sum f(x) exp(-2 pi i k.x).
inline Complex naive_coefficient(const PhysicalField& f, int kx, int ky, int kz) {
    const WaveGrid& g = f.grid;
    const int n = g.n();
    Complex s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                const double ph = -two_pi * (double(kx) * i + double(ky) * j + double(kz) * l) / n;
                s += f.values[g.physical_index(i, j, l)] * Complex(std::cos(ph), std::sin(ph));
            }
    return s / double(n * n * n);
}

/// Physical-space L2 inner product by direct quadrature.
inline double physical_dot(const PhysicalVectorField& a, const PhysicalVectorField& b) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a[c].values.size(); ++i) s += a[c].values[i] * b[c].values[i];
    return s / double(a[0].values.size());
}

inline double relative_l2_error(const SpectralVectorField& a, const SpectralVectorField& ref) {
    const auto pa = lps::to_physical(a);
    const auto pr = lps::to_physical(ref);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < pa[c].values.size(); ++i) {
            const double d = pa[c].values[i] - pr[c].values[i];
            num += d * d;
            den += pr[c].values[i] * pr[c].values[i];
        }
    return std::sqrt(num / den);
}

/// Single Fourier mode v_hat(k) = amp (and its conjugate at -k) for a real field.
inline SpectralVectorField single_mode(const WaveGrid& g, std::array<int, 3> k, std::array<Complex, 3> amp) {
    SpectralVectorField v(g);
    auto idx = g.index_of(k);
    if (!idx) {
        k = {-k[0], -k[1], -k[2]};
        for (auto& a : amp) a = std::conj(a);
        idx = g.index_of(k);
    }
    for (int c = 0; c < 3; ++c) v[c][*idx] = amp[c];
    if (k[2] == 0) {
        auto mirror = g.index_of({-k[0], -k[1], 0});
        if (mirror && *mirror != *idx)
            for (int c = 0; c < 3; ++c) v[c][*mirror] = std::conj(amp[c]);
    }
    return v;
}

}  // namespace oracle
