#pragma once

#include "nsdp/galerkin.hpp"
#include "nsdp/spectral_field.hpp"

namespace nsdp {

/// Radius R of the admissible control ball M_R.
class SaturationBound {
public:
    explicit SaturationBound(double radius);
    double value() const { return radius_; }

private:
    double radius_;
};

/// Saturated Hamiltonian: |p|^2/2 for |p| <= R, R|p| - R^2/2 beyond.
double F_value(const SpectralField& p, SaturationBound R);
/// Same, from the Euclidean norm |p| alone.
double F_of_norm(double p_norm, SaturationBound R);

/// D_p F: p inside the ball, R p/|p| outside.
SpectralField DpF(const SpectralField& p, SaturationBound R);

/// (Bz)_k = lambda_k^{-gamma} z_k.
SpectralField apply_B(const GalerkinSystem& sys, const SpectralField& z);
/// B is self-adjoint, so B^* = B.
SpectralField apply_B_star(const GalerkinSystem& sys, const SpectralField& w);

/// Optimal feedback z* = -D_pF(B^* u_x). |z*| <= R always.
SpectralField feedback_control(const GalerkinSystem& sys, const SpectralField& grad_u,
                               SaturationBound R);

}  // namespace nsdp
