#include <cmath>
#include <sstream>

#include "nsdp/hjb.hpp"
#include "nsdp/parallel.hpp"
#include "nsdp/sde.hpp"
#include "nsdp/stats.hpp"

namespace nsdp {

Estimate feynman_kac_value(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                           double K, double t, const SpectralField& x, const MonteCarloSpec& mc,
                           const ValueGrid& value_prev) {
    return feynman_kac_value(sys, cost, R, K, t, x, mc, value_prev, gradient(value_prev));
}

Estimate feynman_kac_value(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                           double K, double t, const SpectralField& x, const MonteCarloSpec& mc,
                           const ValueGrid& value_prev, const GradientField& grad_prev) {
    const std::size_t m = sys.dim();
    if (x.dim() != m) throw std::invalid_argument("feynman_kac_value: state dimension mismatch");
    if (!(K >= 0.0) || !std::isfinite(K)) throw std::invalid_argument("feynman_kac_value: K must be >= 0");
    if (!(t >= 0.0)) throw std::invalid_argument("feynman_kac_value: t must be >= 0");
    if (mc.n_paths < 2) throw std::invalid_argument("feynman_kac_value: need at least 2 paths");
    if (!(mc.dt > 0.0)) throw std::invalid_argument("feynman_kac_value: dt must be positive");
    if (t > value_prev.horizon() * (1.0 + 1e-12)) {
        throw std::invalid_argument("feynman_kac_value: t exceeds the horizon of value_prev");
    }
    if (t == 0.0) return {cost.terminal(x), 0.0};

    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t / mc.dt - 1e-9)));
    const double dt = t / static_cast<double>(steps);
    const StepCoefficients coeff = step_coefficients(sys, Scheme::ExponentialEuler, dt);
    const SpectralField no_control;

    std::vector<double> samples(mc.n_paths);
    std::vector<double> final_weight(mc.n_paths);

    // Integrand at lag tau along the path, before weighting.
    auto source = [&](double tau, const SpectralField& y) {
        const double s = std::max(t - tau, 0.0);
        const SpectralField g = grad_prev.interpolate(s, y);
        const double killing = K * norm_a_sq(sys, y) * value_prev.value_at(s, y);
        return killing - F_value(apply_B_star(sys, g), R) + cost.running(y);
    };

    parallel_for(mc.n_paths, [&](std::size_t p) {
        Rng rng = path_rng(mc.seed, 0, p);
        SpectralField y = x;
        double log_w = 0.0;
        double prev_rate = norm_a_sq(sys, y);
        double prev_h = source(0.0, y);
        double acc = 0.0;
        for (std::size_t n = 0; n < steps; ++n) {
            advance(sys, coeff, y, no_control, rng);
            const double rate = norm_a_sq(sys, y);
            const double tau = dt * static_cast<double>(n + 1);
            const double w_prev = std::exp(log_w);
            log_w -= K * 0.5 * dt * (prev_rate + rate);
            const double w = std::exp(log_w);
            const double h = source(tau, y);
            acc += 0.5 * dt * (w_prev * prev_h + w * h);
            prev_rate = rate;
            prev_h = h;
        }
        const double w_end = std::exp(log_w);
        samples[p] = acc + w_end * cost.terminal(y);
        final_weight[p] = w_end;
    });

    bool any_alive = false;
    for (double w : final_weight) any_alive = any_alive || w >= 1e-300;
    if (!any_alive) {
        std::ostringstream msg;
        msg << "feynman_kac_value: every killing weight underflowed (K=" << K << ", t=" << t
            << "); use a smaller K or horizon";
        throw std::runtime_error(msg.str());
    }
    const SampleSummary s = summarize(samples);
    return {s.mean, s.std_error};
}

double default_killing_rate(const GalerkinSystem& sys, const GradientField& grad,
                            const std::vector<SpectralField>& probes, std::uint64_t seed) {
    const double c_b = estimate_bilinear_constant(sys, 10000, seed);
    double gmax = 0.0;
    for (const auto& x : probes) {
        for (double t : grad.times()) gmax = std::max(gmax, norm(grad.interpolate(t, x)));
    }
    return 2.0 * c_b * gmax;
}

}  // namespace nsdp
