#include "nsdp/spectral_field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsdp {

bool SpectralField::is_finite() const {
    for (double c : coeffs_) {
        if (!std::isfinite(c)) return false;
    }
    return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
    require_same_dim(*this, other, "SpectralField::operator+=");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
    require_same_dim(*this, other, "SpectralField::operator-=");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }
SpectralField operator*(SpectralField a, double s) { return a *= s; }

double dot(const SpectralField& x, const SpectralField& y) {
    require_same_dim(x, y, "dot");
    double acc = 0.0;
    for (std::size_t k = 0; k < x.dim(); ++k) acc += x[k] * y[k];
    return acc;
}

double norm_sq(const SpectralField& x) { return dot(x, x); }

double norm(const SpectralField& x) { return std::sqrt(norm_sq(x)); }

void require_same_dim(const SpectralField& x, const SpectralField& y, const char* what) {
    if (x.dim() != y.dim()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(x.dim()) + " vs " + std::to_string(y.dim()) +
                                    ")");
    }
}

}  // namespace nsdp
