#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nsdp/galerkin.hpp"
#include "nsdp/rng.hpp"
#include "nsdp/spectral_field.hpp"

namespace nsdp {

/// Law of Z(t, x) for dZ = AZ dt + Q^{1/2} dW: Gaussian with mean
/// mean_decay (.) x and independent per-mode variances.
struct OUTransition {
    double t = 0.0;
    std::vector<double> mean_decay;  // e^{-lambda_k t}
    std::vector<double> variance;    // q_k (1 - e^{-2 lambda_k t}) / (2 lambda_k)
};

/// Exact transition over time t >= 0. Uses v_k ~ q_k t when lambda_k t < 1e-8.
OUTransition ou_transition(const GalerkinSystem& sys, double t);

/// Mean of Z(t, x): e^{tA} x.
SpectralField ou_mean(const OUTransition& tr, const SpectralField& x);

/// One exact draw of Z(t, x).
SpectralField sample_ou(const GalerkinSystem& sys, const SpectralField& x, double t, Rng& rng);
SpectralField sample_ou(const OUTransition& tr, const SpectralField& x, Rng& rng);

/// Z on an increasing time grid starting at 0, Z(0) = 0, built from exact
/// per-step transitions (zero initial condition per increment).
std::vector<SpectralField> stochastic_convolution_path(const GalerkinSystem& sys,
                                                       const std::vector<double>& time_grid,
                                                       Rng& rng);

using TestFunction = std::function<double(const SpectralField&)>;

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// R_t f(x) = E[f(Z(t, x))] by Monte Carlo over exact OU samples.
Estimate apply_R(const GalerkinSystem& sys, const TestFunction& f, double t,
                 const SpectralField& x, std::size_t n_samples, Rng& rng);

/// R_t f(x) by tensorized Gauss-Hermite quadrature (m <= 3); std_error = 0.
Estimate apply_R_quadrature(const GalerkinSystem& sys, const TestFunction& f, double t,
                            const SpectralField& x, std::size_t order = 16);

}  // namespace nsdp
