#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lps {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Integer wavevector lattice of an n^3 periodic grid on the unit cube.
///
/// Spectral data use the real-to-complex half layout: indices (i, j, l) with
/// i, j in [0, n) and l in [0, n/2]. The integer wavenumber of index i is i
/// for i < n/2 and i - n otherwise, so components lie in [-n/2, n/2 - 1]
/// (the z component is non-negative and -k is implied by Hermitian symmetry).
class WaveGrid {
public:
    WaveGrid() = default;
    explicit WaveGrid(int n);

    int n() const { return n_; }
    int nz_half() const { return n_ / 2 + 1; }
    std::size_t physical_size() const { return std::size_t(n_) * n_ * n_; }
    std::size_t spectral_size() const { return std::size_t(n_) * n_ * nz_half(); }

    int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }

    std::size_t spectral_index(int i, int j, int l) const {
        return (std::size_t(i) * n_ + j) * nz_half() + l;
    }
    std::size_t physical_index(int i, int j, int l) const {
        return (std::size_t(i) * n_ + j) * n_ + l;
    }

    /// Index of the stored coefficient for wavevector k, if it is stored
    /// directly (k_z >= 0). Components must lie in [-n/2, n/2].
    std::optional<std::size_t> index_of(std::array<int, 3> k) const;

    /// Multiplicity of a stored half-spectrum mode in the full spectrum
    /// (1 on the l = 0 and l = n/2 planes, 2 otherwise).
    double weight(int l) const { return (l == 0 || l == n_ / 2) ? 1.0 : 2.0; }

    /// True if any component sits at the Nyquist wavenumber n/2.
    bool is_nyquist(int i, int j, int l) const {
        return i == n_ / 2 || j == n_ / 2 || l == n_ / 2;
    }

    friend bool operator==(const WaveGrid&, const WaveGrid&) = default;

private:
    int n_ = 0;
};

/// Visits every stored mode as fn(index, kx, ky, kz, weight).
template <class Fn>
void for_each_mode(const WaveGrid& g, Fn&& fn) {
    const int n = g.n();
    const int nzh = g.nz_half();
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        const int kx = g.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const int ky = g.wavenumber(j);
            for (int l = 0; l < nzh; ++l, ++idx) {
                fn(idx, kx, ky, l, g.weight(l));
            }
        }
    }
}

/// Samples of a real scalar field on the n^3 collocation grid x = (i, j, l)/n.
struct PhysicalField {
    WaveGrid grid;
    std::vector<double> values;

    PhysicalField() = default;
    explicit PhysicalField(const WaveGrid& g) : grid(g), values(g.physical_size(), 0.0) {}
};

using PhysicalVectorField = std::array<PhysicalField, 3>;

/// Fourier coefficients f_hat(k) = n^-3 sum_x f(x) exp(-2 pi i k.x) in half layout.
class SpectralScalarField {
public:
    SpectralScalarField() = default;
    explicit SpectralScalarField(const WaveGrid& g) : grid_(g), coeffs_(g.spectral_size()) {}

    const WaveGrid& grid() const { return grid_; }
    std::span<Complex> coeffs() { return coeffs_; }
    std::span<const Complex> coeffs() const { return coeffs_; }
    Complex& operator[](std::size_t i) { return coeffs_[i]; }
    const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

    SpectralScalarField& operator+=(const SpectralScalarField& o);
    SpectralScalarField& operator-=(const SpectralScalarField& o);
    SpectralScalarField& operator*=(double s);

private:
    WaveGrid grid_;
    std::vector<Complex> coeffs_;
};

enum class FieldRole { unspecified, velocity, adjoint, perturbation, gradient };

/// Three-component field sharing one grid.
class SpectralVectorField {
public:
    SpectralVectorField() = default;
    explicit SpectralVectorField(const WaveGrid& g, FieldRole role = FieldRole::unspecified);

    const WaveGrid& grid() const { return comp_[0].grid(); }
    SpectralScalarField& operator[](int c) { return comp_[c]; }
    const SpectralScalarField& operator[](int c) const { return comp_[c]; }

    FieldRole role() const { return role_; }
    void set_role(FieldRole r) { role_ = r; }

    SpectralVectorField& operator+=(const SpectralVectorField& o);
    SpectralVectorField& operator-=(const SpectralVectorField& o);
    SpectralVectorField& operator*=(double s);
    /// this += a * x
    SpectralVectorField& axpy(double a, const SpectralVectorField& x);

    /// Largest coefficient magnitude; non-finite values propagate.
    double max_abs() const;
    bool all_finite() const;

private:
    std::array<SpectralScalarField, 3> comp_;
    FieldRole role_ = FieldRole::unspecified;
};

SpectralVectorField operator+(SpectralVectorField a, const SpectralVectorField& b);
SpectralVectorField operator-(SpectralVectorField a, const SpectralVectorField& b);
SpectralVectorField operator*(double s, SpectralVectorField a);

// Transforms -----------------------------------------------------------------

/// Inverse transform to collocation samples. Plans are cached per thread.
PhysicalField to_physical(const SpectralScalarField& f);
PhysicalVectorField to_physical(const SpectralVectorField& f);
/// Forward transform with 1/n^3 normalisation.
SpectralScalarField to_spectral(const PhysicalField& f);
SpectralVectorField to_spectral(const PhysicalVectorField& f, FieldRole role = FieldRole::unspecified);

// Linear operators -----------------------------------------------------------

/// Componentwise spectral derivative: result[j] = d f / d x_j (multiplier 2 pi i k_j).
SpectralVectorField gradient(const SpectralScalarField& f);
SpectralScalarField divergence(const SpectralVectorField& v);
SpectralVectorField curl(const SpectralVectorField& v);
/// Laplacian with physical wavenumbers, multiplier -(2 pi |k|)^2.
SpectralVectorField laplacian(const SpectralVectorField& v);

/// Multiplies mode k by |k|^s on the integer lattice. Throws std::domain_error
/// for s < 0 when the mean mode is nonzero.
SpectralVectorField fractional_laplacian(const SpectralVectorField& z, double s);

/// v - grad Lap^-1 div v - mean(v): divergence-free, zero-mean part of v.
SpectralVectorField leray_project(const SpectralVectorField& v);

/// Multiplier exp(-36 (|k|_inf / (n/2))^36).
double dealias_multiplier(const WaveGrid& g, int kx, int ky, int kz);
/// dealias_multiplier for every stored mode, in storage order (cached per size).
const std::vector<double>& dealias_table(const WaveGrid& g);
/// |k|^{3/2} for every stored mode, in storage order (cached per size).
const std::vector<double>& k32_table(const WaveGrid& g);
SpectralScalarField dealias_filter(const SpectralScalarField& f);
SpectralVectorField dealias_filter(const SpectralVectorField& v);

// Inner products -------------------------------------------------------------

enum class PairingKind { l2, h34_dot, h34, l2_weighted };

/// Bilinear pairing on the unit cube. h34 is <a,b>_L2 + ell^{3/2} <a,b>_{Hdot3/4};
/// l2_weighted weights mode k by 1/(1 + ell^{3/2} |k|^{3/2}).
struct Pairing {
    PairingKind kind = PairingKind::l2;
    double ell = 2.0;

    static Pairing l2() { return {PairingKind::l2, 0.0}; }
    static Pairing h34_dot() { return {PairingKind::h34_dot, 0.0}; }
    static Pairing h34(double ell) { return {PairingKind::h34, ell}; }
    static Pairing l2_weighted(double ell) { return {PairingKind::l2_weighted, ell}; }
};

double inner_product(const SpectralVectorField& a, const SpectralVectorField& b, Pairing p);
double inner_product(const SpectralScalarField& a, const SpectralScalarField& b);
double norm(const SpectralVectorField& a, Pairing p);

/// Sobolev symbol 1 + ell^{3/2} |k|^{3/2}.
double sobolev_symbol(double ell, int kx, int ky, int kz);

// Invariant checks -------------------------------------------------------------

/// max_k |k . v_hat(k)| / max_k |v_hat(k)| (0 for the zero field).
double divergence_residual(const SpectralVectorField& v);
/// |v_hat(0)| relative to the largest coefficient.
double mean_residual(const SpectralVectorField& v);

/// Random divergence-free, zero-mean field with modes |k| <= kmax and
/// amplitude spectrum proportional to exp(-|k|), normalised to unit L2 norm.
SpectralVectorField random_solenoidal(const WaveGrid& g, unsigned long long seed, double kmax = 4.0);

std::string to_string(FieldRole r);

}  // namespace lps
