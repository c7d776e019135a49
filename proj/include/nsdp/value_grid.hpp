#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nsdp/galerkin.hpp"
#include "nsdp/spectral_field.hpp"

namespace nsdp {

enum class DriftScheme {
    Upwind,  // first-order upwind everywhere
    Hybrid,  // central where the cell Peclet number |v| h / q <= 1, upwind elsewhere
};

const char* to_string(DriftScheme s);
DriftScheme drift_scheme_from_string(const std::string& name);

/// Discretization of the truncated box in mode space and of [0, T].
struct GridSpec {
    std::size_t points_per_axis = 41;   // odd, >= 3
    std::vector<double> half_widths;    // per mode; empty -> box_sigmas * stationary sd
    double box_sigmas = 4.0;
    double dt = 0.0;                    // explicit march step; 0 -> cfl_safety * dt_max
    double cfl_safety = 0.5;
    std::size_t time_slices = 40;       // stored slices are t_n = n T / time_slices
    DriftScheme drift = DriftScheme::Hybrid;
};

/// L_k = box_sigmas * sqrt(q_k / (2 lambda_k)), from the nominal covariance.
std::vector<double> default_half_widths(const GalerkinSystem& sys, double box_sigmas);

/// Tensor grid [-L_1, L_1] x ... x [-L_m, L_m] with n points per axis.
class BoxGrid {
public:
    BoxGrid() = default;
    BoxGrid(std::vector<double> half_widths, std::size_t points_per_axis);

    std::size_t dims() const { return half_widths_.size(); }
    std::size_t points_per_axis() const { return n_; }
    std::size_t node_count() const { return node_count_; }
    double half_width(std::size_t k) const { return half_widths_[k]; }
    const std::vector<double>& half_widths() const { return half_widths_; }
    double spacing(std::size_t k) const { return spacing_[k]; }
    double coordinate(std::size_t k, std::size_t i) const {
        return -half_widths_[k] + static_cast<double>(i) * spacing_[k];
    }
    std::size_t stride(std::size_t k) const { return strides_[k]; }

    std::vector<std::size_t> multi_index(std::size_t flat) const;
    std::size_t axis_index(std::size_t flat, std::size_t k) const {
        return (flat / strides_[k]) % n_;
    }
    SpectralField node_point(std::size_t flat) const;
    bool contains(const SpectralField& x) const;

    /// Multilinear interpolation of nodal data. Beyond the faces the edge cell's
    /// linear form is continued (matching the zero-second-derivative closure).
    double interpolate(std::span<const double> nodal, const SpectralField& x) const;
    /// Multilinear interpolation with coordinates clamped to the box.
    double interpolate_clamped(std::span<const double> nodal, const SpectralField& x) const;

private:
    double interpolate_impl(std::span<const double> nodal, const SpectralField& x,
                            bool clamp) const;

    std::vector<double> half_widths_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t n_ = 0;
    std::size_t node_count_ = 0;
};

/// u(t_n, node) on stored time slices, forward time from u(0, .) = phi.
class ValueGrid {
public:
    ValueGrid() = default;
    ValueGrid(BoxGrid box, std::vector<double> times);

    const BoxGrid& box() const { return box_; }
    std::size_t dims() const { return box_.dims(); }
    const std::vector<double>& times() const { return times_; }
    std::size_t slice_count() const { return times_.size(); }
    double horizon() const { return times_.back(); }

    std::span<double> slice(std::size_t s);
    std::span<const double> slice(std::size_t s) const;

    /// Spatial interpolation on slice s (linear continuation beyond faces).
    double value(std::size_t s, const SpectralField& x) const;
    /// Space-time interpolation, linear in t between slices, t clamped to [0, T].
    double value_at(double t, const SpectralField& x) const;

    /// March metadata.
    double march_dt = 0.0;
    std::size_t march_steps = 0;
    DriftScheme drift = DriftScheme::Hybrid;

private:
    BoxGrid box_;
    std::vector<double> times_;
    std::vector<double> data_;
};

/// grad u on every slice and node: central differences inside, second-order
/// one-sided differences at the faces.
class GradientField {
public:
    GradientField() = default;
    GradientField(BoxGrid box, std::vector<double> times);

    const BoxGrid& box() const { return box_; }
    const std::vector<double>& times() const { return times_; }
    std::size_t dims() const { return box_.dims(); }

    /// Component k on slice s as a nodal array.
    std::span<double> component(std::size_t s, std::size_t k);
    std::span<const double> component(std::size_t s, std::size_t k) const;

    SpectralField at_node(std::size_t s, std::size_t node) const;

    /// Multilinear in space (constant beyond faces), linear in time. Sets
    /// *outside to true when x lies outside the box.
    SpectralField interpolate(double t, const SpectralField& x, bool* outside = nullptr) const;

private:
    BoxGrid box_;
    std::vector<double> times_;
    std::vector<double> data_;  // [slice][component][node]
};

GradientField gradient(const ValueGrid& v);

/// Central/one-sided gradient of one nodal array.
void nodal_gradient(const BoxGrid& box, std::span<const double> nodal, std::size_t axis,
                    std::span<double> out);

/// Bracketing slices and weight for time t: value = (1-w) * s0 + w * s1.
struct TimeBracket {
    std::size_t s0 = 0;
    std::size_t s1 = 0;
    double w = 0.0;
};
TimeBracket bracket_time(const std::vector<double>& times, double t);

}  // namespace nsdp
