#include "lps/manifold.hpp"

#include "lps/functionals.hpp"

#include <cmath>
#include <limits>

namespace lps {

namespace {

SpectralVectorField cubic_density(const SpectralVectorField& z) {
    const PhysicalVectorField u = to_physical(z);
    const WaveGrid& g = z.grid();
    PhysicalVectorField w{PhysicalField(g), PhysicalField(g), PhysicalField(g)};
    for (std::size_t i = 0; i < u[0].values.size(); ++i) {
        const double m = u[0].values[i] * u[0].values[i] + u[1].values[i] * u[1].values[i] +
                         u[2].values[i] * u[2].values[i];
        for (int c = 0; c < 3; ++c) w[c].values[i] = m * u[c].values[i];
    }
    return dealias_filter(to_spectral(w));
}

}  // namespace

void ConstraintSpec::validate() const {
    if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError("constraint value must be positive");
}

void SobolevConfig::validate() const {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw ValidationError("Sobolev length scale must be positive");
    if (s != 0.75) throw ValidationError("only the H^{3/4} Sobolev exponent is supported");
}

std::string to_string(ConstraintKind k) {
    switch (k) {
        case ConstraintKind::l4_sphere: return "l4";
        case ConstraintKind::h34_dot_sphere: return "h34";
        case ConstraintKind::energy_sphere: return "energy";
    }
    return "h34";
}

ConstraintKind constraint_kind_from_string(const std::string& s) {
    if (s == "l4") return ConstraintKind::l4_sphere;
    if (s == "h34") return ConstraintKind::h34_dot_sphere;
    if (s == "energy") return ConstraintKind::energy_sphere;
    throw ValidationError("unknown constraint kind '" + s + "' (expected l4, h34 or energy)");
}

double constraint_value(const SpectralVectorField& u0, const ConstraintSpec& spec) {
    switch (spec.kind) {
        case ConstraintKind::l4_sphere: return lq_norm(u0, 4.0);
        case ConstraintKind::h34_dot_sphere: return norm(u0, Pairing::h34_dot());
        case ConstraintKind::energy_sphere: return kinetic_energy(u0);
    }
    return 0.0;
}

double constraint_residual(const SpectralVectorField& u0, const ConstraintSpec& spec) {
    return constraint_value(u0, spec) - spec.value;
}

SpectralVectorField sobolev_gradient(const SpectralVectorField& gL2, const SobolevConfig& cfg) {
    SpectralVectorField out = gL2;
    for_each_mode(gL2.grid(), [&](std::size_t idx, int kx, int ky, int kz, double) {
        const double m = (kx == 0 && ky == 0 && kz == 0) ? 0.0 : 1.0 / sobolev_symbol(cfg.ell, kx, ky, kz);
        for (int c = 0; c < 3; ++c) out[c][idx] *= m;
    });
    out.set_role(FieldRole::gradient);
    return out;
}

SpectralVectorField constraint_gradient(const SpectralVectorField& u0, const ConstraintSpec& spec,
                                        const SobolevConfig& cfg) {
    switch (spec.kind) {
        case ConstraintKind::l4_sphere: return sobolev_gradient(cubic_density(u0), cfg);
        case ConstraintKind::h34_dot_sphere: return sobolev_gradient(fractional_laplacian(u0, 1.5), cfg);
        case ConstraintKind::energy_sphere: return sobolev_gradient(u0, cfg);
    }
    return SpectralVectorField(u0.grid());
}

SpectralVectorField project_tangent(const SpectralVectorField& z, const SpectralVectorField& point,
                                    const ConstraintSpec& spec, const SobolevConfig& cfg) {
    const Pairing h34 = Pairing::h34(cfg.ell);
    const SpectralVectorField gF = constraint_gradient(point, spec, cfg);
    const SpectralVectorField dir = spec.kind == ConstraintKind::l4_sphere ? leray_project(gF) : gF;
    const double denom = inner_product(dir, gF, h34);
    const double scale = norm(gF, h34);
    if (!(denom > 1e-28 * scale * scale) || !std::isfinite(denom)) {
        throw NumericalAbort("degenerate constraint gradient");
    }
    SpectralVectorField out = z;
    out.axpy(-inner_product(z, gF, h34) / denom, dir);
    out.set_role(z.role());
    return out;
}

double tangency_residual(const SpectralVectorField& z, const SpectralVectorField& point,
                         const ConstraintSpec& spec, const SobolevConfig& cfg) {
    const Pairing h34 = Pairing::h34(cfg.ell);
    const SpectralVectorField gF = constraint_gradient(point, spec, cfg);
    const double nz = norm(z, h34), ng = norm(gF, h34);
    if (nz == 0.0 || ng == 0.0) return 0.0;
    return std::abs(inner_product(z, gF, h34)) / (nz * ng);
}

SpectralVectorField retract(const SpectralVectorField& z, const ConstraintSpec& spec) {
    spec.validate();
    const double v = constraint_value(z, spec);
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("cannot retract the zero field");
    const double scale = spec.kind == ConstraintKind::energy_sphere ? std::sqrt(spec.value / v) : spec.value / v;
    SpectralVectorField out = z;
    out *= scale;
    return out;
}

}  // namespace lps
