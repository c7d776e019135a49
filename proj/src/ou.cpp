#include "nsdp/ou.hpp"

#include <cmath>
#include <stdexcept>

#include "nsdp/gauss_hermite.hpp"
#include "nsdp/stats.hpp"

namespace nsdp {

OUTransition ou_transition(const GalerkinSystem& sys, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("ou_transition: time must be finite and nonnegative");
    }
    OUTransition tr;
    tr.t = t;
    const std::size_t m = sys.dim();
    tr.mean_decay.resize(m);
    tr.variance.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = sys.lambdas()[k];
        const double q = sys.q_effective(k);
        const double lt = lam * t;
        tr.mean_decay[k] = std::exp(-lt);
        if (lt < 1e-8) {
            tr.variance[k] = q * t;
        } else {
            tr.variance[k] = -q * std::expm1(-2.0 * lt) / (2.0 * lam);
        }
    }
    return tr;
}

SpectralField ou_mean(const OUTransition& tr, const SpectralField& x) {
    if (x.dim() != tr.mean_decay.size()) throw std::invalid_argument("ou_mean: dimension mismatch");
    SpectralField out(x.dim());
    for (std::size_t k = 0; k < x.dim(); ++k) out[k] = tr.mean_decay[k] * x[k];
    return out;
}

SpectralField sample_ou(const OUTransition& tr, const SpectralField& x, Rng& rng) {
    SpectralField out = ou_mean(tr, x);
    for (std::size_t k = 0; k < x.dim(); ++k) {
        const double xi = standard_normal(rng);
        out[k] += std::sqrt(tr.variance[k]) * xi;
    }
    return out;
}

SpectralField sample_ou(const GalerkinSystem& sys, const SpectralField& x, double t, Rng& rng) {
    return sample_ou(ou_transition(sys, t), x, rng);
}

std::vector<SpectralField> stochastic_convolution_path(const GalerkinSystem& sys,
                                                       const std::vector<double>& time_grid,
                                                       Rng& rng) {
    if (time_grid.empty() || time_grid.front() != 0.0) {
        throw std::invalid_argument("stochastic_convolution_path: time grid must start at 0");
    }
    for (std::size_t n = 1; n < time_grid.size(); ++n) {
        if (!(time_grid[n] > time_grid[n - 1])) {
            throw std::invalid_argument("stochastic_convolution_path: time grid must be increasing");
        }
    }
    std::vector<SpectralField> path;
    path.reserve(time_grid.size());
    path.emplace_back(sys.dim());
    for (std::size_t n = 1; n < time_grid.size(); ++n) {
        const OUTransition tr = ou_transition(sys, time_grid[n] - time_grid[n - 1]);
        path.push_back(sample_ou(tr, path.back(), rng));
    }
    return path;
}

Estimate apply_R(const GalerkinSystem& sys, const TestFunction& f, double t,
                 const SpectralField& x, std::size_t n_samples, Rng& rng) {
    if (n_samples < 2) throw std::invalid_argument("apply_R: need at least 2 samples");
    if (t == 0.0) return {f(x), 0.0};
    const OUTransition tr = ou_transition(sys, t);
    std::vector<double> values(n_samples);
    for (auto& v : values) v = f(sample_ou(tr, x, rng));
    const SampleSummary s = summarize(values);
    return {s.mean, s.std_error};
}

Estimate apply_R_quadrature(const GalerkinSystem& sys, const TestFunction& f, double t,
                            const SpectralField& x, std::size_t order) {
    const std::size_t m = sys.dim();
    if (m > 3) throw std::invalid_argument("apply_R_quadrature: quadrature mode needs m <= 3");
    if (t == 0.0) return {f(x), 0.0};
    const OUTransition tr = ou_transition(sys, t);
    const TensorRule rule = tensor_gauss_hermite(m, order);
    const SpectralField mean = ou_mean(tr, x);
    std::vector<double> sd(m);
    for (std::size_t k = 0; k < m; ++k) sd[k] = std::sqrt(tr.variance[k]);
    SpectralField point(m);
    double acc = 0.0;
    for (std::size_t p = 0; p < rule.size(); ++p) {
        for (std::size_t k = 0; k < m; ++k) point[k] = mean[k] + sd[k] * rule.nodes[p * m + k];
        acc += rule.weights[p] * f(point);
    }
    return {acc, 0.0};
}

}  // namespace nsdp
