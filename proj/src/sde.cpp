#include "nsdp/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsdp/parallel.hpp"
#include "nsdp/stats.hpp"

namespace nsdp {

const char* to_string(Scheme s) {
    return s == Scheme::ExponentialEuler ? "exponential_euler" : "euler_maruyama";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "exponential_euler") return Scheme::ExponentialEuler;
    if (name == "euler_maruyama") return Scheme::EulerMaruyama;
    throw std::invalid_argument("unknown integrator scheme '" + name + "'");
}

std::size_t IntegratorSpec::steps() const {
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("IntegratorSpec: dt and T must be positive");
    const double ratio = T / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
        throw std::invalid_argument("IntegratorSpec: T must be a whole multiple of dt");
    }
    return static_cast<std::size_t>(rounded);
}

void IntegratorSpec::validate(const GalerkinSystem& sys) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("IntegratorSpec: dt must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("IntegratorSpec: T must be positive");
    if (dt > T) throw std::invalid_argument("IntegratorSpec: dt must not exceed T");
    if (scheme == Scheme::EulerMaruyama) {
        const double lmax = *std::max_element(sys.lambdas().begin(), sys.lambdas().end());
        if (dt * lmax > 2.0) {
            throw std::invalid_argument("IntegratorSpec: euler_maruyama needs dt * lambda_max <= 2 (dt <= " +
                                        std::to_string(2.0 / lmax) + ")");
        }
    }
    (void)steps();
}

double phi1(double z) {
    if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

StepCoefficients step_coefficients(const GalerkinSystem& sys, Scheme scheme, double dt) {
    StepCoefficients c;
    c.scheme = scheme;
    c.dt = dt;
    const std::size_t m = sys.dim();
    c.decay.resize(m);
    c.forcing.resize(m);
    c.noise_sd.resize(m);
    const OUTransition tr = ou_transition(sys, dt);
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = sys.lambdas()[k];
        if (scheme == Scheme::ExponentialEuler) {
            c.decay[k] = tr.mean_decay[k];
            c.forcing[k] = dt * phi1(-lam * dt);
            c.noise_sd[k] = std::sqrt(tr.variance[k]);
        } else {
            c.decay[k] = 1.0 - lam * dt;
            c.forcing[k] = dt;
            c.noise_sd[k] = std::sqrt(sys.q_effective(k) * dt);
        }
    }
    return c;
}

void advance(const GalerkinSystem& sys, const StepCoefficients& c, SpectralField& x,
             const SpectralField& control, Rng& rng) {
    const std::size_t m = x.dim();
    SpectralField force = nonlinear_term(sys, x);
    if (!control.empty()) {
        for (std::size_t k = 0; k < m; ++k) force[k] += sys.control_spectrum()[k] * control[k];
    }
    for (std::size_t k = 0; k < m; ++k) {
        // One normal per mode and step, drawn even when the noise is off, so
        // noise on/off runs stay aligned draw for draw.
        const double xi = standard_normal(rng);
        x[k] = c.decay[k] * x[k] + c.forcing[k] * force[k] + c.noise_sd[k] * xi;
    }
}

std::size_t PathEnsemble::excluded_count() const {
    return static_cast<std::size_t>(std::count(excluded.begin(), excluded.end(), 1));
}

SpectralField PathEnsemble::state(std::size_t p, std::size_t n) const {
    if (!recorded) throw std::logic_error("PathEnsemble: paths were not recorded");
    const std::size_t off = (p * times.size() + n) * dims;
    return SpectralField(std::vector<double>(state_data.begin() + off, state_data.begin() + off + dims));
}

SpectralField PathEnsemble::control(std::size_t p, std::size_t n) const {
    if (!recorded) throw std::logic_error("PathEnsemble: paths were not recorded");
    const std::size_t off = (p * times.size() + n) * dims;
    return SpectralField(std::vector<double>(control_data.begin() + off, control_data.begin() + off + dims));
}

double PathEnsemble::max_control_norm() const {
    double best = 0.0;
    for (std::size_t off = 0; off < control_data.size(); off += dims) {
        double sq = 0.0;
        for (std::size_t k = 0; k < dims; ++k) sq += control_data[off + k] * control_data[off + k];
        best = std::max(best, std::sqrt(sq));
    }
    return best;
}

namespace {

struct PathOutcome {
    std::size_t clipped = 0;
    std::size_t excursions = 0;
};

}  // namespace

PathEnsemble simulate_controlled(const GalerkinSystem& sys, const Policy& policy, SaturationBound R,
                                 const SpectralField& x0, const IntegratorSpec& integ,
                                 std::size_t n_paths, std::uint64_t seed, const CostSpec* cost,
                                 const SimulationOptions& opts) {
    const std::size_t m = sys.dim();
    if (x0.dim() != m) throw std::invalid_argument("simulate_controlled: x0 dimension mismatch");
    if (!x0.is_finite()) throw std::invalid_argument("simulate_controlled: x0 must be finite");
    if (n_paths == 0) throw std::invalid_argument("simulate_controlled: need at least one path");
    integ.validate(sys);
    const std::size_t steps = integ.steps();
    const double dt = integ.T / static_cast<double>(steps);
    const StepCoefficients coeff = step_coefficients(sys, integ.scheme, dt);

    PathEnsemble ens;
    ens.n_paths = n_paths;
    ens.dims = m;
    ens.seed = seed;
    ens.R = R.value();
    ens.x0 = x0;
    ens.times.resize(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) ens.times[n] = dt * static_cast<double>(n);
    ens.recorded = opts.record_paths;
    if (ens.recorded) {
        ens.state_data.assign(n_paths * (steps + 1) * m, 0.0);
        ens.control_data.assign(n_paths * (steps + 1) * m, 0.0);
    }
    ens.running_state.assign(n_paths, 0.0);
    ens.running_control.assign(n_paths, 0.0);
    ens.terminal.assign(n_paths, 0.0);
    ens.sup_sq.assign(n_paths, 0.0);
    ens.int_v.assign(n_paths, 0.0);
    ens.excluded.assign(n_paths, 0);
    ens.has_cost = cost != nullptr;

    std::vector<PathOutcome> outcome(n_paths);

    parallel_for(n_paths, [&](std::size_t p) {
        Rng noise = path_rng(seed, 0, p);
        PathContext ctx{path_rng(seed, 1, p), p, 0};
        SpectralField x = x0;
        PathOutcome& out = outcome[p];

        auto control_at = [&](double t, const SpectralField& state) {
            SpectralField z = policy(t, state, ctx);
            if (z.dim() != m) throw std::invalid_argument("policy returned a control of wrong dimension");
            if (norm(z) > R.value()) {
                z = DpF(z, R);
                ++out.clipped;
            }
            return z;
        };
        auto record = [&](std::size_t n, const SpectralField& state, const SpectralField& z) {
            if (!ens.recorded) return;
            const std::size_t off = (p * (steps + 1) + n) * m;
            for (std::size_t k = 0; k < m; ++k) {
                ens.state_data[off + k] = state[k];
                ens.control_data[off + k] = z[k];
            }
        };

        double prev_Phi = cost ? cost->running(x) : 0.0;
        double prev_v = norm_v_sq(sys, x);
        double sup = norm_sq(x);
        SpectralField z = control_at(0.0, x);
        double prev_zz = 0.5 * norm_sq(z);
        record(0, x, z);
        bool blown = false;
        for (std::size_t n = 0; n < steps; ++n) {
            advance(sys, coeff, x, z, noise);
            const double t = ens.times[n + 1];
            if (!x.is_finite() || norm(x) > kBlowUpThreshold) {
                blown = true;
                break;
            }
            z = control_at(t, x);
            record(n + 1, x, z);
            const double Phi = cost ? cost->running(x) : 0.0;
            const double v = norm_v_sq(sys, x);
            const double zz = 0.5 * norm_sq(z);
            ens.running_state[p] += 0.5 * dt * (prev_Phi + Phi);
            ens.running_control[p] += 0.5 * dt * (prev_zz + zz);
            ens.int_v[p] += 0.5 * dt * (prev_v + v);
            sup = std::max(sup, norm_sq(x));
            prev_Phi = Phi;
            prev_v = v;
            prev_zz = zz;
        }
        if (blown) {
            ens.excluded[p] = 1;
            ens.running_state[p] = ens.running_control[p] = ens.int_v[p] = 0.0;
            sup = 0.0;
        } else if (cost) {
            ens.terminal[p] = cost->terminal(x);
        }
        ens.sup_sq[p] = sup;
        out.excursions = ctx.excursions;
    });

    for (const auto& o : outcome) {
        ens.clipped_controls += o.clipped;
        ens.excursions += o.excursions;
    }
    return ens;
}

Policy feedback_policy(const GalerkinSystem& sys, const GradientField& grad, SaturationBound R,
                       double horizon) {
    return [&sys, &grad, R, horizon](double t, const SpectralField& x, PathContext& ctx) {
        bool outside = false;
        const SpectralField g = grad.interpolate(std::max(horizon - t, 0.0), x, &outside);
        if (outside) ++ctx.excursions;
        return feedback_control(sys, g, R);
    };
}

PathEnsemble simulate_closed_loop(const GalerkinSystem& sys, const ValueGrid& value,
                                  SaturationBound R, const SpectralField& x0,
                                  const IntegratorSpec& integ, std::size_t n_paths,
                                  std::uint64_t seed, const CostSpec* cost,
                                  const SimulationOptions& opts) {
    if (value.horizon() < integ.T * (1.0 - 1e-12)) {
        throw std::invalid_argument("simulate_closed_loop: value function horizon " +
                                    std::to_string(value.horizon()) + " is shorter than T = " +
                                    std::to_string(integ.T));
    }
    const GradientField grad = gradient(value);
    return simulate_controlled(sys, feedback_policy(sys, grad, R, integ.T), R, x0, integ, n_paths,
                               seed, cost, opts);
}

namespace {

MeanEstimate mean_over_kept(const PathEnsemble& ens, const std::vector<double>& values) {
    std::vector<double> kept;
    kept.reserve(values.size());
    for (std::size_t p = 0; p < values.size(); ++p) {
        if (!ens.excluded[p]) kept.push_back(values[p]);
    }
    const SampleSummary s = summarize(kept);
    return {s.mean, s.std_error};
}

}  // namespace

EnergyReport energy_estimate(const PathEnsemble& ens, const GalerkinSystem& sys) {
    if (ens.n_paths == 0) throw std::invalid_argument("energy_estimate: empty ensemble");
    EnergyReport r;
    r.sup_sq = mean_over_kept(ens, ens.sup_sq);
    r.int_v = mean_over_kept(ens, ens.int_v);
    double trace = 0.0;
    for (std::size_t k = 0; k < sys.dim(); ++k) trace += sys.q_effective(k);
    r.bound_rhs = 1.0 + norm_sq(ens.x0) + trace;
    r.c_emp = (r.sup_sq.mean + r.int_v.mean) / r.bound_rhs;
    r.used_paths = ens.n_paths - ens.excluded_count();
    return r;
}

double theta_of_delta(double delta) {
    if (!(delta > 0.5)) throw std::invalid_argument("theta_of_delta: delta must exceed 1/2");
    return (2.0 * delta + 1.0) / (2.0 * delta - 1.0);
}

MeanEstimate theta_delta_diagnostic(const PathEnsemble& ens, const GalerkinSystem& sys,
                                    double delta) {
    const double upper = std::min(1.0 + sys.hyp().g, 1.0 + 2.0 * sys.hyp().gamma);
    if (!(delta > 0.5) || delta > upper) {
        throw std::invalid_argument("theta_delta_diagnostic: delta must lie in (1/2, " +
                                    std::to_string(upper) + "]");
    }
    if (!ens.recorded) throw std::invalid_argument("theta_delta_diagnostic: paths were not recorded");
    const double theta = theta_of_delta(delta);
    const std::size_t nt = ens.times.size();
    std::vector<double> per_path(ens.n_paths, 0.0);
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        if (ens.excluded[p]) continue;
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t n = 0; n < nt; ++n) {
            const SpectralField x = ens.state(p, n);
            const double num = fractional_norm_sq(sys, (1.0 + delta) / 2.0, x);
            const double den = std::pow(1.0 + fractional_norm_sq(sys, delta / 2.0, x), theta);
            const double f = num / den;
            if (n > 0) acc += 0.5 * (ens.times[n] - ens.times[n - 1]) * (prev + f);
            prev = f;
        }
        per_path[p] = acc;
    }
    return mean_over_kept(ens, per_path);
}

}  // namespace nsdp
