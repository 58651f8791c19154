#pragma once

#include "lps/errors.hpp"
#include "lps/spectral.hpp"

#include <string>

namespace lps {

enum class ConstraintKind { l4_sphere, h34_dot_sphere, energy_sphere };

/// ||u0||_L4 = B, ||u0||_{Hdot3/4} = S or 1/2 ||u0||_L2^2 = K0.
struct ConstraintSpec {
    ConstraintKind kind = ConstraintKind::h34_dot_sphere;
    double value = 1.0;

    static ConstraintSpec l4(double B) { return {ConstraintKind::l4_sphere, B}; }
    static ConstraintSpec h34_dot(double S) { return {ConstraintKind::h34_dot_sphere, S}; }
    static ConstraintSpec energy(double K0) { return {ConstraintKind::energy_sphere, K0}; }

    void validate() const;
};

struct SobolevConfig {
    double ell = 2.0;
    double s = 0.75;

    void validate() const;
};

std::string to_string(ConstraintKind k);
ConstraintKind constraint_kind_from_string(const std::string& s);

double constraint_value(const SpectralVectorField& u0, const ConstraintSpec& spec);
double constraint_residual(const SpectralVectorField& u0, const ConstraintSpec& spec);

/// Riesz representer in H^{3/4}: divides mode k by 1 + ell^{3/2}|k|^{3/2} and drops k = 0.
SpectralVectorField sobolev_gradient(const SpectralVectorField& gL2, const SobolevConfig& cfg);

/// H^{3/4} representer of the differential of the constraint function at u0.
/// Its normalisation is arbitrary; only its direction enters the geometry.
SpectralVectorField constraint_gradient(const SpectralVectorField& u0, const ConstraintSpec& spec,
                                        const SobolevConfig& cfg);

/// Removes the component of z along the constraint gradient at `point`
/// (orthogonal in H^{3/4} for the Hdot3/4 and energy spheres; the oblique
/// projection with the Leray-projected gradient for the L4 sphere).
/// Throws NumericalAbort if the normalising pairing vanishes.
SpectralVectorField project_tangent(const SpectralVectorField& z, const SpectralVectorField& point,
                                    const ConstraintSpec& spec, const SobolevConfig& cfg);

/// |<z, grad F(point)>_{H3/4}| / (||z|| ||grad F||), 0 for z = 0.
double tangency_residual(const SpectralVectorField& z, const SpectralVectorField& point,
                         const ConstraintSpec& spec, const SobolevConfig& cfg);

/// Rescales z onto the constraint sphere. Throws ValidationError for z = 0.
SpectralVectorField retract(const SpectralVectorField& z, const ConstraintSpec& spec);

}  // namespace lps
