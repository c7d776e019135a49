#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nsdp {

/// Coefficients of a velocity field against the orthonormal eigenbasis {e_k}
/// of the truncated Stokes operator. Norms that need the spectrum of -A live
/// in galerkin.hpp; this type only knows the Euclidean (H) structure.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(std::size_t dim) : coeffs_(dim, 0.0) {}
    explicit SpectralField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}
    SpectralField(std::initializer_list<double> coeffs) : coeffs_(coeffs) {}

    std::size_t dim() const { return coeffs_.size(); }
    bool empty() const { return coeffs_.empty(); }

    double& operator[](std::size_t k) { return coeffs_[k]; }
    double operator[](std::size_t k) const { return coeffs_[k]; }

    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }
    const std::vector<double>& values() const { return coeffs_; }

    /// True when every coefficient is finite.
    bool is_finite() const;

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double s);

    bool operator==(const SpectralField&) const = default;

private:
    std::vector<double> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
SpectralField operator*(SpectralField a, double s);

/// H inner product (x, y).
double dot(const SpectralField& x, const SpectralField& y);
/// |x|^2 in H.
double norm_sq(const SpectralField& x);
/// |x| in H.
double norm(const SpectralField& x);

/// Throws std::invalid_argument when the dimensions differ.
void require_same_dim(const SpectralField& x, const SpectralField& y, const char* what);

}  // namespace nsdp
