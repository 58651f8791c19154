#include "lps/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>

namespace lps {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class FftPlans {
public:
    explicit FftPlans(int n) : n_(n) {
        const std::size_t nr = std::size_t(n) * n * n;
        const std::size_t nc = std::size_t(n) * n * (n / 2 + 1);
        real_ = fftw_alloc_real(nr);
        cplx_ = fftw_alloc_complex(nc);
        if (!real_ || !cplx_) throw std::bad_alloc();
        std::lock_guard lock(planner_mutex());
        r2c_ = fftw_plan_dft_r2c_3d(n, n, n, real_, cplx_, FFTW_ESTIMATE);
        c2r_ = fftw_plan_dft_c2r_3d(n, n, n, cplx_, real_, FFTW_ESTIMATE);
        if (!r2c_ || !c2r_) throw std::runtime_error("FFTW plan creation failed");
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(r2c_);
        fftw_destroy_plan(c2r_);
        fftw_free(real_);
        fftw_free(cplx_);
    }

    void inverse(std::span<const Complex> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(cplx_));
        fftw_execute(c2r_);
        std::copy(real_, real_ + out.size(), out.begin());
    }

    void forward(std::span<const double> in, std::span<Complex> out) {
        std::copy(in.begin(), in.end(), real_);
        fftw_execute(r2c_);
        const double scale = 1.0 / (double(n_) * n_ * n_);
        const auto* c = reinterpret_cast<const Complex*>(cplx_);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = c[i] * scale;
    }

private:
    int n_;
    double* real_ = nullptr;
    fftw_complex* cplx_ = nullptr;
    fftw_plan r2c_ = nullptr;
    fftw_plan c2r_ = nullptr;
};

FftPlans& plans_for(int n) {
    thread_local std::map<int, std::unique_ptr<FftPlans>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlans>(n);
    return *slot;
}

// Per-size mode tables shared by all threads; entries are never erased.
template <class Fn>
const std::vector<double>& cached_table(std::map<int, std::unique_ptr<std::vector<double>>>& cache, std::mutex& m,
                                        const WaveGrid& g, Fn&& value) {
    std::lock_guard lock(m);
    auto& slot = cache[g.n()];
    if (!slot) {
        slot = std::make_unique<std::vector<double>>(g.spectral_size());
        for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) { (*slot)[idx] = value(kx, ky, kz); });
    }
    return *slot;
}

void require_same_grid(const WaveGrid& a, const WaveGrid& b) {
    if (a != b) throw std::invalid_argument("grid size mismatch");
}

}  // namespace

WaveGrid::WaveGrid(int n) : n_(n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("grid size must be a positive even integer");
}

std::optional<std::size_t> WaveGrid::index_of(std::array<int, 3> k) const {
    const int h = n_ / 2;
    for (int c : k) {
        if (c < -h || c > h) return std::nullopt;
    }
    if (k[2] < 0) return std::nullopt;
    auto wrap = [&](int c) { return c < 0 ? c + n_ : (c == h ? h : c); };
    return spectral_index(wrap(k[0]), wrap(k[1]), k[2]);
}

// Scalar field arithmetic ----------------------------------------------------

SpectralScalarField& SpectralScalarField::operator+=(const SpectralScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SpectralScalarField& SpectralScalarField::operator-=(const SpectralScalarField& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SpectralScalarField& SpectralScalarField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

SpectralVectorField::SpectralVectorField(const WaveGrid& g, FieldRole role)
    : comp_{SpectralScalarField(g), SpectralScalarField(g), SpectralScalarField(g)}, role_(role) {}

SpectralVectorField& SpectralVectorField::operator+=(const SpectralVectorField& o) {
    for (int c = 0; c < 3; ++c) comp_[c] += o.comp_[c];
    return *this;
}

SpectralVectorField& SpectralVectorField::operator-=(const SpectralVectorField& o) {
    for (int c = 0; c < 3; ++c) comp_[c] -= o.comp_[c];
    return *this;
}

SpectralVectorField& SpectralVectorField::operator*=(double s) {
    for (auto& c : comp_) c *= s;
    return *this;
}

SpectralVectorField& SpectralVectorField::axpy(double a, const SpectralVectorField& x) {
    require_same_grid(grid(), x.grid());
    for (int c = 0; c < 3; ++c) {
        auto dst = comp_[c].coeffs();
        auto src = x.comp_[c].coeffs();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
    }
    return *this;
}

double SpectralVectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : comp_) {
        for (const auto& v : c.coeffs()) {
            const double a = std::abs(v);
            if (!(a <= m)) m = a;  // NaN sticks
        }
    }
    return m;
}

bool SpectralVectorField::all_finite() const {
    for (const auto& c : comp_) {
        for (const auto& v : c.coeffs()) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        }
    }
    return true;
}

SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b) { return a += b; }
SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b) { return a -= b; }
SpectralVectorField operator*(double s, SpectralVectorField a) { return a *= s; }

// Transforms -------------------------------------------------------------------

PhysicalField to_physical(const SpectralScalarField& f) {
    PhysicalField out(f.grid());
    plans_for(f.grid().n()).inverse(f.coeffs(), out.values);
    return out;
}

PhysicalVectorField to_physical(const SpectralVectorField& f) {
    return {to_physical(f[0]), to_physical(f[1]), to_physical(f[2])};
}

SpectralScalarField to_spectral(const PhysicalField& f) {
    if (f.values.size() != f.grid.physical_size()) throw std::invalid_argument("sample count does not match grid");
    SpectralScalarField out(f.grid);
    plans_for(f.grid.n()).forward(f.values, out.coeffs());
    return out;
}

SpectralVectorField to_spectral(const PhysicalVectorField& f, FieldRole role) {
    require_same_grid(f[0].grid, f[1].grid);
    require_same_grid(f[0].grid, f[2].grid);
    SpectralVectorField out(f[0].grid, role);
    for (int c = 0; c < 3; ++c) out[c] = to_spectral(f[c]);
    return out;
}

// Operators --------------------------------------------------------------------

SpectralVectorField gradient(const SpectralScalarField& f) {
    const WaveGrid& g = f.grid();
    SpectralVectorField out(g);
    const int n = g.n();
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        if (kx == -n / 2 || ky == -n / 2 || kz == n / 2) return;
        const Complex ik(0.0, kTwoPi);
        out[0][idx] = ik * double(kx) * f[idx];
        out[1][idx] = ik * double(ky) * f[idx];
        out[2][idx] = ik * double(kz) * f[idx];
    });
    return out;
}

SpectralScalarField divergence(const SpectralVectorField& v) {
    const WaveGrid& g = v.grid();
    SpectralScalarField out(g);
    const int n = g.n();
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        if (kx == -n / 2 || ky == -n / 2 || kz == n / 2) return;
        out[idx] = Complex(0.0, kTwoPi) * (double(kx) * v[0][idx] + double(ky) * v[1][idx] + double(kz) * v[2][idx]);
    });
    return out;
}

SpectralVectorField curl(const SpectralVectorField& v) {
    const WaveGrid& g = v.grid();
    SpectralVectorField out(g);
    const int n = g.n();
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        if (kx == -n / 2 || ky == -n / 2 || kz == n / 2) return;
        const Complex ik(0.0, kTwoPi);
        out[0][idx] = ik * (double(ky) * v[2][idx] - double(kz) * v[1][idx]);
        out[1][idx] = ik * (double(kz) * v[0][idx] - double(kx) * v[2][idx]);
        out[2][idx] = ik * (double(kx) * v[1][idx] - double(ky) * v[0][idx]);
    });
    return out;
}

SpectralVectorField laplacian(const SpectralVectorField& v) {
    SpectralVectorField out = v;
    for_each_mode(v.grid(), [&](std::size_t idx, int kx, int ky, int kz, double) {
        const double m = -kTwoPi * kTwoPi * double(kx * kx + ky * ky + kz * kz);
        for (int c = 0; c < 3; ++c) out[c][idx] *= m;
    });
    return out;
}

SpectralVectorField fractional_laplacian(const SpectralVectorField& z, double s) {
    if (s == 0.0) return z;
    if (s < 0.0) {
        if (std::abs(z[0][0]) + std::abs(z[1][0]) + std::abs(z[2][0]) != 0.0) {
            throw std::domain_error("negative fractional power of a field with nonzero mean");
        }
    }
    SpectralVectorField out = z;
    for_each_mode(z.grid(), [&](std::size_t idx, int kx, int ky, int kz, double) {
        const double k2 = double(kx * kx + ky * ky + kz * kz);
        const double m = k2 == 0.0 ? 0.0 : std::pow(k2, 0.5 * s);
        for (int c = 0; c < 3; ++c) out[c][idx] *= m;
    });
    return out;
}

SpectralVectorField leray_project(const SpectralVectorField& v) {
    const WaveGrid& g = v.grid();
    SpectralVectorField out(g, v.role());
    const int n = g.n();
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        if (kx == -n / 2 || ky == -n / 2 || kz == n / 2) return;
        const double k2 = double(kx * kx + ky * ky + kz * kz);
        if (k2 == 0.0) return;
        const Complex a = v[0][idx], b = v[1][idx], c = v[2][idx];
        const Complex kdotv = (double(kx) * a + double(ky) * b + double(kz) * c) / k2;
        out[0][idx] = a - double(kx) * kdotv;
        out[1][idx] = b - double(ky) * kdotv;
        out[2][idx] = c - double(kz) * kdotv;
    });
    return out;
}

double dealias_multiplier(const WaveGrid& g, int kx, int ky, int kz) {
    const double kinf = double(std::max({std::abs(kx), std::abs(ky), std::abs(kz)}));
    const double r = kinf / (0.5 * g.n());
    return std::exp(-36.0 * std::pow(r, 36));
}

const std::vector<double>& dealias_table(const WaveGrid& g) {
    static std::map<int, std::unique_ptr<std::vector<double>>> cache;
    static std::mutex m;
    return cached_table(cache, m, g, [&](int kx, int ky, int kz) { return dealias_multiplier(g, kx, ky, kz); });
}

const std::vector<double>& k32_table(const WaveGrid& g) {
    static std::map<int, std::unique_ptr<std::vector<double>>> cache;
    static std::mutex m;
    return cached_table(cache, m, g, [](int kx, int ky, int kz) { return std::pow(double(kx * kx + ky * ky + kz * kz), 0.75); });
}

SpectralScalarField dealias_filter(const SpectralScalarField& f) {
    SpectralScalarField out = f;
    const auto& m = dealias_table(f.grid());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] *= m[i];
    return out;
}

SpectralVectorField dealias_filter(const SpectralVectorField& v) {
    SpectralVectorField out = v;
    const auto& m = dealias_table(v.grid());
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < m.size(); ++i) out[c][i] *= m[i];
    }
    return out;
}

// Pairings ---------------------------------------------------------------------

double sobolev_symbol(double ell, int kx, int ky, int kz) {
    const double k = std::sqrt(double(kx * kx + ky * ky + kz * kz));
    return 1.0 + std::pow(ell, 1.5) * std::pow(k, 1.5);
}

double inner_product(const SpectralScalarField& a, const SpectralScalarField& b) {
    require_same_grid(a.grid(), b.grid());
    double sum = 0.0;
    for_each_mode(a.grid(), [&](std::size_t idx, int, int, int, double w) {
        sum += w * (a[idx].real() * b[idx].real() + a[idx].imag() * b[idx].imag());
    });
    return sum;
}

double inner_product(const SpectralVectorField& a, const SpectralVectorField& b, Pairing p) {
    require_same_grid(a.grid(), b.grid());
    const double ell32 = std::pow(p.ell, 1.5);
    const auto& k32 = k32_table(a.grid());
    double sum = 0.0;
    for_each_mode(a.grid(), [&](std::size_t idx, int, int, int, double w) {
        double local = 0.0;
        for (int c = 0; c < 3; ++c) {
            local += a[c][idx].real() * b[c][idx].real() + a[c][idx].imag() * b[c][idx].imag();
        }
        if (local == 0.0) return;
        double m = 1.0;
        switch (p.kind) {
            case PairingKind::l2: break;
            case PairingKind::h34_dot: m = k32[idx]; break;
            case PairingKind::h34: m = 1.0 + ell32 * k32[idx]; break;
            case PairingKind::l2_weighted: m = 1.0 / (1.0 + ell32 * k32[idx]); break;
        }
        sum += w * m * local;
    });
    return sum;
}

double norm(const SpectralVectorField& a, Pairing p) { return std::sqrt(std::max(0.0, inner_product(a, a, p))); }

double divergence_residual(const SpectralVectorField& v) {
    double worst = 0.0;
    double scale = 0.0;
    for_each_mode(v.grid(), [&](std::size_t idx, int kx, int ky, int kz, double) {
        const double kn = std::sqrt(double(kx * kx + ky * ky + kz * kz));
        const Complex d = double(kx) * v[0][idx] + double(ky) * v[1][idx] + double(kz) * v[2][idx];
        if (kn > 0.0) worst = std::max(worst, std::abs(d) / kn);
        for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(v[c][idx]));
    });
    return scale == 0.0 ? 0.0 : worst / scale;
}

double mean_residual(const SpectralVectorField& v) {
    const double scale = v.max_abs();
    if (scale == 0.0) return 0.0;
    return std::sqrt(std::norm(v[0][0]) + std::norm(v[1][0]) + std::norm(v[2][0])) / scale;
}

SpectralVectorField random_solenoidal(const WaveGrid& g, unsigned long long seed, double kmax) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    PhysicalVectorField noise{PhysicalField(g), PhysicalField(g), PhysicalField(g)};
    for (auto& comp : noise) {
        for (auto& x : comp.values) x = normal(rng);
    }
    SpectralVectorField v = to_spectral(noise, FieldRole::velocity);
    for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz, double) {
        const double k = std::sqrt(double(kx * kx + ky * ky + kz * kz));
        const double m = (k <= kmax) ? std::exp(-k) : 0.0;
        for (int c = 0; c < 3; ++c) v[c][idx] *= m;
    });
    v = leray_project(v);
    const double nrm = norm(v, Pairing::l2());
    if (nrm == 0.0) throw std::runtime_error("random field has no admissible modes");
    v *= 1.0 / nrm;
    v.set_role(FieldRole::velocity);
    return v;
}

std::string to_string(FieldRole r) {
    switch (r) {
        case FieldRole::unspecified: return "unspecified";
        case FieldRole::velocity: return "velocity";
        case FieldRole::adjoint: return "adjoint";
        case FieldRole::perturbation: return "perturbation";
        case FieldRole::gradient: return "gradient";
    }
    return "unspecified";
}

}  // namespace lps
