#pragma once

#include <limits>
#include <string>
#include <vector>

#include "nsdp/galerkin.hpp"
#include "nsdp/spectral_field.hpp"

namespace nsdp {

enum class CostKind { Constant, SaturatedEnstrophy, RationalEnstrophy, Quadratic };

const char* to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& name);

/// One nonnegative cost functional on P_m H.
///
///   constant(c)              : c
///   saturated_enstrophy(M)   : min(E(x), M)
///   rational_enstrophy(M)    : E(x) / (1 + E(x)/M)
///   quadratic(matrix)        : x^T M x  (unbounded; oracle mode only)
///
/// where E(x) = sum_k w_k x_k^2 with w_k = |curl e_k|^2.
class CostTerm {
public:
    static CostTerm constant(double c);
    static CostTerm saturated_enstrophy(const GalerkinSystem& sys, double cap);
    static CostTerm rational_enstrophy(const GalerkinSystem& sys, double cap);
    /// `matrix` is m x m row-major and must be symmetric.
    static CostTerm quadratic(std::size_t m, std::vector<double> matrix);
    static CostTerm quadratic_diagonal(const std::vector<double>& diag);

    double operator()(const SpectralField& x) const;

    CostKind kind() const { return kind_; }
    bool bounded() const { return kind_ != CostKind::Quadratic; }
    /// |.|_0; +inf for quadratic terms.
    double sup() const;
    double parameter() const { return param_; }
    double scale() const { return scale_; }
    double shift() const { return shift_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& matrix() const { return matrix_; }

    /// Same term scaled pointwise by s > 0.
    CostTerm scaled(double s) const;
    /// Same term shifted pointwise by delta >= 0 (turns into a sum).
    CostTerm shifted(double delta) const;

private:
    CostKind kind_ = CostKind::Constant;
    double param_ = 0.0;   // constant value or cap M
    double scale_ = 1.0;
    double shift_ = 0.0;
    std::vector<double> weights_;
    std::vector<double> matrix_;
};

/// Running cost Phi and terminal cost phi with their sup-norms.
struct CostSpec {
    CostTerm running;
    CostTerm terminal;

    double sup_Phi() const { return running.sup(); }
    double sup_phi() const { return terminal.sup(); }
    bool bounded() const { return running.bounded() && terminal.bounded(); }
};

/// Bounded enstrophy-type cost with caps M (running) and M_terminal.
CostSpec make_bounded_cost(const GalerkinSystem& sys, CostKind kind, double cap,
                           double terminal_cap);

}  // namespace nsdp
