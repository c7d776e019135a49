#pragma once

// Reference computations that share no code path with the library.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "nsdp/galerkin.hpp"

namespace oracle {

/// Physical-space evaluation of one torus mode and its gradient.
struct ModeSample {
    std::array<double, 3> value{};
    std::array<std::array<double, 3>, 3> grad{};  // grad[c][d] = d_d value_c
};

inline double mode_norm(int space_dim) {
    // Orthonormal in L2 of [0, 2pi]^d.
    if (space_dim == 1) return 1.0 / std::sqrt(std::numbers::pi);
    return std::sqrt(2.0) / std::pow(2.0 * std::numbers::pi, 0.5 * space_dim);
}

inline ModeSample sample_mode(const nsdp::TorusMode& e, int space_dim, const std::array<double, 3>& xi) {
    double arg = 0.0;
    for (int d = 0; d < space_dim; ++d) arg += e.wavevector[d] * xi[d];
    const bool is_cos = e.phase == nsdp::TorusMode::Phase::Cos;
    const double f = is_cos ? std::cos(arg) : std::sin(arg);
    const double df = is_cos ? -std::sin(arg) : std::cos(arg);
    const double n = mode_norm(space_dim);
    ModeSample s;
    for (int c = 0; c < 3; ++c) {
        s.value[c] = n * e.polarization[c] * f;
        for (int d = 0; d < 3; ++d) s.grad[c][d] = n * e.polarization[c] * e.wavevector[d] * df;
    }
    return s;
}

/// T[i][j][k] by the trapezoid rule on an N^d periodic grid. Exact for trig
/// polynomials of degree < N per axis. In 1D the form is (x y' + (x y)') / 3;
/// otherwise ((e_i . grad) e_j, e_k).
inline std::vector<double> structure_tensor(const nsdp::GalerkinSystem& sys, int N) {
    const std::size_t m = sys.dim();
    const int d = sys.space_dim();
    std::vector<double> out(m * m * m, 0.0);
    const double h = 2.0 * std::numbers::pi / N;
    const double cell = std::pow(h, d);
    const int nz = d == 3 ? N : 1;
    const int ny = d >= 2 ? N : 1;
    std::vector<ModeSample> s(m);
    for (int a = 0; a < N; ++a) {
        for (int b = 0; b < ny; ++b) {
            for (int c = 0; c < nz; ++c) {
                const std::array<double, 3> xi{a * h, b * h, c * h};
                for (std::size_t k = 0; k < m; ++k) s[k] = sample_mode(sys.modes()[k], d, xi);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < m; ++j) {
                        std::array<double, 3> conv{};
                        if (d == 1) {
                            const double x = s[i].value[0], dx = s[i].grad[0][0];
                            const double y = s[j].value[0], dy = s[j].grad[0][0];
                            conv[0] = (x * dy + (dx * y + x * dy)) / 3.0;
                        } else {
                            for (int q = 0; q < 3; ++q) {
                                for (int r = 0; r < 3; ++r) conv[q] += s[i].value[r] * s[j].grad[q][r];
                            }
                        }
                        for (std::size_t k = 0; k < m; ++k) {
                            double v = 0.0;
                            for (int q = 0; q < 3; ++q) v += conv[q] * s[k].value[q];
                            out[(i * m + j) * m + k] += cell * v;
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// Scalar Riccati p' = -2 l p - 2 b^2 p^2 + M, p(0) = N, in closed form.
/// With a = 2 b^2, roots of a p^2 + 2 l p - M are p_+ > 0 > p_-.
inline double scalar_riccati(double l, double b, double M, double N, double t) {
    const double a = 2.0 * b * b;
    if (a == 0.0) {
        // Linear: p = M/(2l) + (N - M/(2l)) e^{-2 l t}.
        return M / (2.0 * l) + (N - M / (2.0 * l)) * std::exp(-2.0 * l * t);
    }
    const double disc = std::sqrt(l * l + a * M);
    const double pp = (-l + disc) / a;
    const double pm = (-l - disc) / a;
    // (p - pp) / (p - pm) decays like e^{-2 disc t}.
    const double c = (N - pp) / (N - pm) * std::exp(-2.0 * disc * t);
    return (pp - c * pm) / (1.0 - c);
}

/// rho(t) = q int_0^t p(s) ds by composite Simpson on a fine grid.
inline double scalar_riccati_rho(double l, double b, double M, double N, double q, double t) {
    const int n = 2000;
    const double h = t / n;
    double acc = scalar_riccati(l, b, M, N, 0.0) + scalar_riccati(l, b, M, N, t);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * scalar_riccati(l, b, M, N, i * h);
    return q * acc * h / 3.0;
}

/// sup over a Cartesian grid of the R-ball of -(p, z) - |z|^2 / 2 (m = 1 or 2).
/// `spacing` receives the grid step.
inline double legendre_brute_force(const std::vector<double>& p, double R, std::size_t points,
                                   double* spacing = nullptr) {
    double best = -INFINITY;
    if (p.size() == 1) {
        const double h = 2.0 * R / static_cast<double>(points - 1);
        if (spacing) *spacing = h;
        for (std::size_t i = 0; i < points; ++i) {
            const double z = -R + h * static_cast<double>(i);
            best = std::max(best, -p[0] * z - 0.5 * z * z);
        }
        return best;
    }
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(points * 4.0 / std::numbers::pi)));
    const double h = 2.0 * R / static_cast<double>(side - 1);
    if (spacing) *spacing = h;
    for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
            const double z0 = -R + h * static_cast<double>(i);
            const double z1 = -R + h * static_cast<double>(j);
            if (z0 * z0 + z1 * z1 > R * R) continue;
            best = std::max(best, -p[0] * z0 - p[1] * z1 - 0.5 * (z0 * z0 + z1 * z1));
        }
    }
    return best;
}

/// E[xi^n] for xi ~ N(0, 1).
inline double normal_moment(int n) {
    if (n % 2) return 0.0;
    double v = 1.0;
    for (int k = n - 1; k > 1; k -= 2) v *= k;
    return v;
}

}  // namespace oracle
