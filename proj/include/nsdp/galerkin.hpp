#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdp/spectral_field.hpp"

namespace nsdp {

/// Raised when hypothesis parameters are malformed or (for strict construction)
/// violate the standing assumptions. Carries every violation name at once.
class HypothesisError : public std::invalid_argument {
public:
    HypothesisError(const std::string& msg, std::vector<std::string> violations)
        : std::invalid_argument(msg), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Exponents of the standing assumptions on Q and B.
///
///   g     : trace regularity, Tr[(-A)^{1+g} Q] < inf
///   r     : inverse covariance bound |Q^{-1/2}x| <= c_r |(-A)^r x|, r in (1, 3/2)
///   gamma : smoothing of the control operator, B : H -> D((-A)^gamma)
///
/// The constructor accepts any gamma >= 0 so that degenerate oracle
/// configurations (B = I) can be built; `strict` additionally demands
/// gamma > 1 - epsilon.
struct HypothesisParams {
    double g = 0.1;
    double r = 1.4;
    double gamma = 1.0;

    HypothesisParams() = default;
    HypothesisParams(double g_, double r_, double gamma_);

    static HypothesisParams strict(double g_, double r_, double gamma_);

    /// epsilon = (3 - 2r) / 2, in (0, 1/2) whenever r in (1, 3/2).
    double epsilon() const { return (3.0 - 2.0 * r) / 2.0; }
};

/// One real divergence-free trigonometric mode a * f(k . xi) on [0, 2 pi]^d,
/// f in {cos, sin}. For space_dim == 1 the mode is the scalar sin(k xi).
struct TorusMode {
    enum class Phase { Cos, Sin };
    std::array<int, 3> wavevector{0, 0, 0};
    std::array<double, 3> polarization{0.0, 0.0, 0.0};
    Phase phase = Phase::Cos;
    double lambda = 0.0;
};

struct SystemOptions {
    bool bilinear = true;
    bool noise = true;
};

/// The truncated model: A = -diag(lambda), b_m through the structure tensor
/// T[i][j][k] = (b(e_i, e_j), e_k), Q = diag(q), B = diag(lambda^{-gamma}).
/// Immutable after construction.
class GalerkinSystem {
public:
    GalerkinSystem(int space_dim, std::vector<TorusMode> modes, HypothesisParams hyp,
                   std::vector<double> tensor, SystemOptions options);

    std::size_t dim() const { return modes_.size(); }
    int space_dim() const { return space_dim_; }
    const HypothesisParams& hyp() const { return hyp_; }
    const SystemOptions& options() const { return options_; }
    bool bilinear_enabled() const { return options_.bilinear; }
    bool noise_enabled() const { return options_.noise; }

    const std::vector<TorusMode>& modes() const { return modes_; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    /// Nominal covariance spectrum q_k = lambda_k^{-2r}, independent of the noise flag.
    const std::vector<double>& q_spectrum() const { return q_; }
    /// Covariance actually driving the dynamics (zero when noise is disabled).
    double q_effective(std::size_t k) const { return options_.noise ? q_[k] : 0.0; }
    /// Diagonal of B (= B^*): lambda_k^{-gamma}.
    const std::vector<double>& control_spectrum() const { return control_; }
    /// Per-mode enstrophy weight |curl e_k|^2 integrated over the torus.
    const std::vector<double>& curl_weights() const { return curl_; }

    double tensor(std::size_t i, std::size_t j, std::size_t k) const {
        return tensor_[(i * dim() + j) * dim() + k];
    }
    const std::vector<double>& tensor_data() const { return tensor_; }

    GalerkinSystem with_options(SystemOptions options) const;
    GalerkinSystem with_bilinear(bool enabled) const;
    GalerkinSystem with_noise(bool enabled) const;

    /// Same modes and tensor, different exponents (re-derives q and B).
    GalerkinSystem with_hypothesis(HypothesisParams hyp) const;

private:
    int space_dim_;
    std::vector<TorusMode> modes_;
    HypothesisParams hyp_;
    std::vector<double> tensor_;
    SystemOptions options_;
    std::vector<double> lambdas_;
    std::vector<double> q_;
    std::vector<double> control_;
    std::vector<double> curl_;
};

/// Builds the torus surrogate with the `mode_budget` lowest divergence-free
/// modes (ties broken deterministically), the exact structure tensor and the
/// covariance q_k = lambda_k^{-2r}.
GalerkinSystem build_torus_system(std::size_t mode_budget, int space_dim,
                                  HypothesisParams hyp = {}, SystemOptions options = {});

/// Exact value of the triple product integral
///   int_{[0,2pi]^d} f1(k1.xi) f2(k2.xi) f3(k3.xi) dxi,  f in {cos, sin}, scaled by `sign`.
double triple_trig_integral(int space_dim, const std::array<int, 3>& k1, TorusMode::Phase f1,
                            const std::array<int, 3>& k2, TorusMode::Phase f2,
                            const std::array<int, 3>& k3, TorusMode::Phase f3);

/// b(x, y)_k = sum_{i,j} T[i][j][k] x_i y_j. Ignores the bilinear flag.
SpectralField bilinear(const GalerkinSystem& sys, const SpectralField& x, const SpectralField& y);

/// b_m(x) = b(x, x) when the nonlinearity is enabled, zero otherwise.
SpectralField nonlinear_term(const GalerkinSystem& sys, const SpectralField& x);

/// ((-A)^s x)_k = lambda_k^s x_k.
SpectralField apply_fractional(const GalerkinSystem& sys, double s, const SpectralField& x);

/// (Ax)_k = -lambda_k x_k.
SpectralField apply_A(const GalerkinSystem& sys, const SpectralField& x);

/// ||x||^2 = sum lambda_k x_k^2.
double norm_v_sq(const GalerkinSystem& sys, const SpectralField& x);
/// |Ax|^2 = sum lambda_k^2 x_k^2.
double norm_a_sq(const GalerkinSystem& sys, const SpectralField& x);
/// |(-A)^s x|^2.
double fractional_norm_sq(const GalerkinSystem& sys, double s, const SpectralField& x);

struct HypothesisReport {
    bool passed = true;
    std::vector<std::string> violations;

    double epsilon = 0.0;
    bool r_in_range = true;
    bool gamma_ok = true;
    double gamma_threshold = 0.0;

    /// Partial sums of sum_k lambda_k^{1+g} q_k.
    std::vector<double> trace_partial_sums;
    double trace_exponent = 0.0;          // 1 + g - 2r
    double summability_threshold = 0.0;   // -space_dim / 2
    bool tail_decreasing = true;
    bool summable = true;

    /// max relative gap between |Q^{-1/2}x| and |(-A)^r x| over probe fields.
    double q_inverse_identity_error = 0.0;
};

HypothesisReport validate_hypotheses(const GalerkinSystem& sys);

/// Empirical sup of |(b(x,y), (-A)^{1/2} z)| / (|Ax| |Ay| |z|) over random
/// Gaussian x, y with z chosen as the maximizer (-A)^{1/2} b(x,y).
double estimate_bilinear_constant(const GalerkinSystem& sys, std::size_t n_samples,
                                  std::uint64_t seed);

}  // namespace nsdp
