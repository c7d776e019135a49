#include "nsdp/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

namespace nsdp {

SaturationBound::SaturationBound(double radius) : radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("SaturationBound: R must be positive and finite");
    }
}

double F_of_norm(double p_norm, SaturationBound R) {
    const double r = R.value();
    if (p_norm <= r) return 0.5 * p_norm * p_norm;
    return r * p_norm - 0.5 * r * r;
}

double F_value(const SpectralField& p, SaturationBound R) { return F_of_norm(norm(p), R); }

SpectralField DpF(const SpectralField& p, SaturationBound R) {
    const double n = norm(p);
    if (n <= R.value()) return p;
    SpectralField out = p * (R.value() / n);
    // Rounding can leave |out| an ulp above R; admissibility is checked exactly.
    while (norm(out) > R.value()) out *= (1.0 - 0x1p-52);
    return out;
}

SpectralField apply_B(const GalerkinSystem& sys, const SpectralField& z) {
    if (z.dim() != sys.dim()) throw std::invalid_argument("apply_B: dimension mismatch");
    SpectralField out(z.dim());
    for (std::size_t k = 0; k < z.dim(); ++k) out[k] = sys.control_spectrum()[k] * z[k];
    return out;
}

SpectralField apply_B_star(const GalerkinSystem& sys, const SpectralField& w) {
    return apply_B(sys, w);
}

SpectralField feedback_control(const GalerkinSystem& sys, const SpectralField& grad_u,
                               SaturationBound R) {
    return -1.0 * DpF(apply_B_star(sys, grad_u), R);
}

}  // namespace nsdp
