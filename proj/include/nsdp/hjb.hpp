#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdp/cost.hpp"
#include "nsdp/galerkin.hpp"
#include "nsdp/hamiltonian.hpp"
#include "nsdp/ou.hpp"
#include "nsdp/value_grid.hpp"

namespace nsdp {

/// The explicit march would be unstable at the requested step.
class StabilityError : public std::runtime_error {
public:
    StabilityError(const std::string& msg, double max_dt)
        : std::runtime_error(msg), max_dt_(max_dt) {}
    double max_dt() const { return max_dt_; }

private:
    double max_dt_;
};

/// Picard iteration for the mild form did not reach the tolerance.
class PicardDivergence : public std::runtime_error {
public:
    PicardDivergence(const std::string& msg, std::vector<double> history)
        : std::runtime_error(msg), history_(std::move(history)) {}
    const std::vector<double>& residual_history() const { return history_; }

private:
    std::vector<double> history_;
};

struct GridSolveReport {
    double dt_max = 0.0;         // stability bound at the start of the march
    double dt = 0.0;             // step actually used
    std::size_t steps = 0;
    std::size_t nonmonotone_events = 0;  // node-steps with a negative neighbour weight
};

/// Explicit forward march of
///   u_t = 1/2 Tr[Q u_xx] + (Ax + b_m(x), u_x) - F(B^* u_x) + Phi,  u(0) = phi
/// on the truncated box (m <= 3). Diffusion by central second differences,
/// drift per `grid.drift`, Hamiltonian with central gradients, and a
/// zero-second-derivative ghost closure at the faces.
ValueGrid solve_hjb_grid(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                         double T, const GridSpec& grid, GridSolveReport* report = nullptr);

/// Largest stable explicit step, 1 / sum_k [q_k/h_k^2 + (max|v_k| + b_k min(R, G_k))/h_k],
/// where G_k bounds |b_k d_k u| over the box.
double grid_stability_limit(const GalerkinSystem& sys, const BoxGrid& box, SaturationBound R,
                            const std::vector<double>& grad_bounds);

/// The stability bound solve_hjb_grid starts from, with G_k estimated as
/// 2 (max|b_k d_k phi| + T max|b_k d_k Phi|) on the box.
double grid_initial_dt_max(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                           double T, const GridSpec& grid);

struct PicardOptions {
    std::size_t max_iter = 50;
    double tol = 1e-6;
    std::size_t quadrature_order = 16;
};

struct MildSolveResult {
    ValueGrid value;
    std::vector<double> residual_history;  // sup-node change per iteration
    std::size_t iterations = 0;
    /// True when the residuals decrease monotonically after the first iteration.
    bool monotone_contraction = true;
};

/// Picard iteration of the mild form through the OU semigroup:
///   u(t) = R_t phi + int_0^t R_{t-s}[(b(.), u_x(s)) - F(B^* u_x(s)) + Phi] ds
/// on the grid's stored time slices (trapezoid in s, Gauss-Hermite for R).
/// Throws PicardDivergence when max_iter is reached first.
MildSolveResult solve_hjb_mild(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                               double T, const GridSpec& grid, const PicardOptions& picard = {});

struct MonteCarloSpec {
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
};

/// Feynman-Kac representation of u(t, x) using the uncontrolled nonlinear flow
/// Y and the killing weight exp(-K int |AY|^2):
///   S_t phi + int S_{t-s}(K |A.|^2 u(s)) - int S_{t-s} F(B^* u_x(s)) + int S_{t-s} Phi,
/// with u, u_x read from `value_prev`. Throws when every weight underflows.
Estimate feynman_kac_value(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                           double K, double t, const SpectralField& x, const MonteCarloSpec& mc,
                           const ValueGrid& value_prev);
Estimate feynman_kac_value(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                           double K, double t, const SpectralField& x, const MonteCarloSpec& mc,
                           const ValueGrid& value_prev, const GradientField& grad_prev);

/// K = 2 * c_b * max |u_x| over the probe states, c_b from the bilinear estimate.
double default_killing_rate(const GalerkinSystem& sys, const GradientField& grad,
                            const std::vector<SpectralField>& probes, std::uint64_t seed);

struct BoundsReport {
    bool applicable = true;     // false for unbounded (quadratic) costs
    bool holds = true;
    double worst_slack = 0.0;   // min over nodes of the distance to either barrier
    std::size_t violations = 0;
    std::size_t worst_slice = 0;
    std::size_t worst_node = 0;
    double worst_value = 0.0;
};

/// Checks 0 <= u(t_n, node) <= |phi|_0 + t_n |Phi|_0 everywhere.
BoundsReport assert_value_bounds(const ValueGrid& v, const CostSpec& cost);

/// Quadratic ansatz u(t,x) = x^T P(t) x + rho(t) for the unsaturated problem with
/// b = 0 and quadratic costs:
///   P' = -Lambda P - P Lambda - 2 P B^2 P + M,  P(0) = N,   rho' = Tr[Q P].
/// Integrated with classical RK4 on a fine fixed step.
class RiccatiSolution {
public:
    RiccatiSolution(const GalerkinSystem& sys, std::vector<double> M, std::vector<double> N,
                    double T, double step = 1e-4);

    std::size_t dims() const { return m_; }
    double horizon() const { return T_; }
    /// P(t), m x m row-major.
    std::vector<double> P(double t) const;
    double rho(double t) const;
    double value(double t, const SpectralField& x) const;
    /// u_x = 2 P(t) x.
    SpectralField gradient(double t, const SpectralField& x) const;

private:
    std::vector<double> state_at(double t) const;  // [P..., rho]
    std::vector<double> rhs(const std::vector<double>& s) const;

    std::size_t m_;
    double T_;
    double step_;
    std::vector<double> lambda_;
    std::vector<double> b2_;
    std::vector<double> q_;
    std::vector<double> M_;
    std::vector<std::vector<double>> states_;
};

}  // namespace nsdp
