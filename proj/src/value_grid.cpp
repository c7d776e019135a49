#include "nsdp/value_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsdp {

const char* to_string(DriftScheme s) {
    return s == DriftScheme::Upwind ? "upwind" : "hybrid";
}

DriftScheme drift_scheme_from_string(const std::string& name) {
    if (name == "upwind") return DriftScheme::Upwind;
    if (name == "hybrid") return DriftScheme::Hybrid;
    throw std::invalid_argument("unknown drift scheme '" + name + "'");
}

std::vector<double> default_half_widths(const GalerkinSystem& sys, double box_sigmas) {
    if (!(box_sigmas > 0.0)) throw std::invalid_argument("box_sigmas must be positive");
    std::vector<double> out(sys.dim());
    for (std::size_t k = 0; k < sys.dim(); ++k) {
        out[k] = box_sigmas * std::sqrt(sys.q_spectrum()[k] / (2.0 * sys.lambdas()[k]));
    }
    return out;
}

BoxGrid::BoxGrid(std::vector<double> half_widths, std::size_t points_per_axis)
    : half_widths_(std::move(half_widths)), n_(points_per_axis) {
    if (half_widths_.empty()) throw std::invalid_argument("BoxGrid: need at least one axis");
    if (n_ < 3 || n_ % 2 == 0) {
        throw std::invalid_argument("BoxGrid: points_per_axis must be odd and >= 3");
    }
    const std::size_t m = half_widths_.size();
    spacing_.resize(m);
    strides_.resize(m);
    node_count_ = 1;
    for (std::size_t k = m; k-- > 0;) {
        if (!(half_widths_[k] > 0.0) || !std::isfinite(half_widths_[k])) {
            throw std::invalid_argument("BoxGrid: half widths must be positive");
        }
        spacing_[k] = 2.0 * half_widths_[k] / static_cast<double>(n_ - 1);
        strides_[k] = node_count_;
        node_count_ *= n_;
    }
}

std::vector<std::size_t> BoxGrid::multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(dims());
    for (std::size_t k = 0; k < dims(); ++k) idx[k] = axis_index(flat, k);
    return idx;
}

SpectralField BoxGrid::node_point(std::size_t flat) const {
    SpectralField x(dims());
    for (std::size_t k = 0; k < dims(); ++k) x[k] = coordinate(k, axis_index(flat, k));
    return x;
}

bool BoxGrid::contains(const SpectralField& x) const {
    for (std::size_t k = 0; k < dims(); ++k) {
        if (std::abs(x[k]) > half_widths_[k]) return false;
    }
    return true;
}

double BoxGrid::interpolate_impl(std::span<const double> nodal, const SpectralField& x,
                                 bool clamp) const {
    const std::size_t m = dims();
    std::size_t base = 0;
    double frac[3] = {0.0, 0.0, 0.0};
    std::size_t step[3] = {0, 0, 0};
    for (std::size_t k = 0; k < m; ++k) {
        double s = (x[k] + half_widths_[k]) / spacing_[k];
        if (clamp) s = std::clamp(s, 0.0, static_cast<double>(n_ - 1));
        const double cell = std::clamp(std::floor(s), 0.0, static_cast<double>(n_ - 2));
        const auto i0 = static_cast<std::size_t>(cell);
        frac[k] = s - cell;
        base += i0 * strides_[k];
        step[k] = strides_[k];
    }
    double acc = 0.0;
    const std::size_t corners = std::size_t{1} << m;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = base;
        for (std::size_t k = 0; k < m; ++k) {
            if (c & (std::size_t{1} << k)) {
                w *= frac[k];
                idx += step[k];
            } else {
                w *= 1.0 - frac[k];
            }
        }
        acc += w * nodal[idx];
    }
    return acc;
}

double BoxGrid::interpolate(std::span<const double> nodal, const SpectralField& x) const {
    if (dims() > 3) throw std::invalid_argument("BoxGrid::interpolate: m <= 3 only");
    return interpolate_impl(nodal, x, false);
}

double BoxGrid::interpolate_clamped(std::span<const double> nodal, const SpectralField& x) const {
    if (dims() > 3) throw std::invalid_argument("BoxGrid::interpolate: m <= 3 only");
    return interpolate_impl(nodal, x, true);
}

TimeBracket bracket_time(const std::vector<double>& times, double t) {
    TimeBracket b;
    if (times.size() == 1 || t <= times.front()) return b;
    if (t >= times.back()) {
        b.s0 = b.s1 = times.size() - 1;
        return b;
    }
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    b.s1 = static_cast<std::size_t>(it - times.begin());
    b.s0 = b.s1 - 1;
    b.w = (t - times[b.s0]) / (times[b.s1] - times[b.s0]);
    return b;
}

ValueGrid::ValueGrid(BoxGrid box, std::vector<double> times)
    : box_(std::move(box)), times_(std::move(times)) {
    if (times_.empty()) throw std::invalid_argument("ValueGrid: need at least one time slice");
    data_.assign(times_.size() * box_.node_count(), 0.0);
}

std::span<double> ValueGrid::slice(std::size_t s) {
    return std::span<double>(data_).subspan(s * box_.node_count(), box_.node_count());
}

std::span<const double> ValueGrid::slice(std::size_t s) const {
    return std::span<const double>(data_).subspan(s * box_.node_count(), box_.node_count());
}

double ValueGrid::value(std::size_t s, const SpectralField& x) const {
    return box_.interpolate(slice(s), x);
}

double ValueGrid::value_at(double t, const SpectralField& x) const {
    const TimeBracket b = bracket_time(times_, t);
    const double v0 = value(b.s0, x);
    if (b.s0 == b.s1 || b.w == 0.0) return v0;
    return (1.0 - b.w) * v0 + b.w * value(b.s1, x);
}

void nodal_gradient(const BoxGrid& box, std::span<const double> nodal, std::size_t axis,
                    std::span<double> out) {
    const std::size_t n = box.points_per_axis();
    const std::size_t st = box.stride(axis);
    const double h = box.spacing(axis);
    for (std::size_t node = 0; node < box.node_count(); ++node) {
        const std::size_t i = box.axis_index(node, axis);
        double g;
        if (i == 0) {
            g = (-3.0 * nodal[node] + 4.0 * nodal[node + st] - nodal[node + 2 * st]) / (2.0 * h);
        } else if (i == n - 1) {
            g = (3.0 * nodal[node] - 4.0 * nodal[node - st] + nodal[node - 2 * st]) / (2.0 * h);
        } else {
            g = (nodal[node + st] - nodal[node - st]) / (2.0 * h);
        }
        out[node] = g;
    }
}

GradientField::GradientField(BoxGrid box, std::vector<double> times)
    : box_(std::move(box)), times_(std::move(times)) {
    data_.assign(times_.size() * box_.dims() * box_.node_count(), 0.0);
}

std::span<double> GradientField::component(std::size_t s, std::size_t k) {
    const std::size_t n = box_.node_count();
    return std::span<double>(data_).subspan((s * box_.dims() + k) * n, n);
}

std::span<const double> GradientField::component(std::size_t s, std::size_t k) const {
    const std::size_t n = box_.node_count();
    return std::span<const double>(data_).subspan((s * box_.dims() + k) * n, n);
}

SpectralField GradientField::at_node(std::size_t s, std::size_t node) const {
    SpectralField g(dims());
    for (std::size_t k = 0; k < dims(); ++k) g[k] = component(s, k)[node];
    return g;
}

SpectralField GradientField::interpolate(double t, const SpectralField& x, bool* outside) const {
    if (outside) *outside = !box_.contains(x);
    const TimeBracket b = bracket_time(times_, t);
    SpectralField g(dims());
    for (std::size_t k = 0; k < dims(); ++k) {
        double v = box_.interpolate_clamped(component(b.s0, k), x);
        if (b.s0 != b.s1 && b.w != 0.0) {
            v = (1.0 - b.w) * v + b.w * box_.interpolate_clamped(component(b.s1, k), x);
        }
        g[k] = v;
    }
    return g;
}

GradientField gradient(const ValueGrid& v) {
    GradientField g(v.box(), v.times());
    for (std::size_t s = 0; s < v.slice_count(); ++s) {
        for (std::size_t k = 0; k < v.dims(); ++k) {
            nodal_gradient(v.box(), v.slice(s), k, g.component(s, k));
        }
    }
    return g;
}

}  // namespace nsdp
