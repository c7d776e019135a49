#include "nsdp/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "nsdp/rng.hpp"

namespace nsdp {

namespace {

using Vec3i = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

int norm2(const Vec3i& k) { return k[0] * k[0] + k[1] * k[1] + k[2] * k[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 normalized(Vec3 v) {
    const double n = std::sqrt(dot3(v, v));
    for (double& c : v) c /= n;
    return v;
}

Vec3 as_real(const Vec3i& k) {
    return {static_cast<double>(k[0]), static_cast<double>(k[1]), static_cast<double>(k[2])};
}

// First nonzero component positive: one representative per +-k pair.
bool in_half_space(const Vec3i& k) {
    for (int c : k) {
        if (c > 0) return true;
        if (c < 0) return false;
    }
    return false;
}

std::vector<Vec3> polarizations(const Vec3i& k, int space_dim) {
    const Vec3 kr = as_real(k);
    if (space_dim == 2) return {normalized({-kr[1], kr[0], 0.0})};
    // 3D: cross with the coordinate axis least aligned with k.
    int axis = 0;
    for (int j = 1; j < 3; ++j) {
        if (std::abs(k[j]) < std::abs(k[axis])) axis = j;
    }
    Vec3 e{0.0, 0.0, 0.0};
    e[axis] = 1.0;
    const Vec3 a1 = normalized(cross(kr, e));
    const Vec3 a2 = normalized(cross(kr, a1));
    return {a1, a2};
}

std::vector<TorusMode> enumerate_modes(std::size_t m, int space_dim) {
    std::vector<TorusMode> modes;
    if (space_dim == 1) {
        for (std::size_t k = 1; k <= m; ++k) {
            TorusMode mode;
            mode.wavevector = {static_cast<int>(k), 0, 0};
            mode.polarization = {1.0, 0.0, 0.0};
            mode.phase = TorusMode::Phase::Sin;
            mode.lambda = static_cast<double>(k * k);
            modes.push_back(mode);
        }
        return modes;
    }

    for (int K = 1;; ++K) {
        std::vector<Vec3i> ks;
        const int kz = space_dim == 3 ? K : 0;
        for (int a = -K; a <= K; ++a) {
            for (int b = -K; b <= K; ++b) {
                for (int c = -kz; c <= kz; ++c) {
                    const Vec3i k{a, b, c};
                    if (in_half_space(k)) ks.push_back(k);
                }
            }
        }
        std::sort(ks.begin(), ks.end(), [](const Vec3i& x, const Vec3i& y) {
            const int nx = norm2(x), ny = norm2(y);
            if (nx != ny) return nx < ny;
            return x > y;
        });
        modes.clear();
        for (const auto& k : ks) {
            for (const auto& a : polarizations(k, space_dim)) {
                for (auto phase : {TorusMode::Phase::Cos, TorusMode::Phase::Sin}) {
                    TorusMode mode;
                    mode.wavevector = k;
                    mode.polarization = a;
                    mode.phase = phase;
                    mode.lambda = static_cast<double>(norm2(k));
                    modes.push_back(mode);
                }
            }
            if (modes.size() >= m) break;
        }
        // Every wavevector with |k|^2 <= K^2 lies inside the enumerated cube.
        if (modes.size() >= m && modes[m - 1].lambda <= static_cast<double>(K * K)) {
            modes.resize(m);
            return modes;
        }
    }
}

// Coefficients of f(theta) = sum_{s = +-1} c(s) e^{i s theta}.
std::complex<double> fourier_coeff(TorusMode::Phase f, int s) {
    using namespace std::complex_literals;
    if (f == TorusMode::Phase::Cos) return 0.5;
    return s > 0 ? -0.5i : 0.5i;
}

// Derivative of f w.r.t. its argument as (phase, sign).
std::pair<TorusMode::Phase, double> derivative(TorusMode::Phase f) {
    return f == TorusMode::Phase::Cos ? std::pair{TorusMode::Phase::Sin, -1.0}
                                      : std::pair{TorusMode::Phase::Cos, 1.0};
}

double normalization(int space_dim) {
    if (space_dim == 1) return 1.0 / std::sqrt(std::numbers::pi);
    return std::sqrt(2.0 / std::pow(2.0 * std::numbers::pi, space_dim));
}

std::vector<double> build_tensor(const std::vector<TorusMode>& modes, int space_dim) {
    const std::size_t m = modes.size();
    std::vector<double> tensor(m * m * m, 0.0);
    const double n3 = std::pow(normalization(space_dim), 3);

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t l = 0; l < m; ++l) {
                const auto& ei = modes[i];
                const auto& ej = modes[j];
                const auto& el = modes[l];
                double value = 0.0;
                if (space_dim == 1) {
                    // Skew-symmetric Burgers form b(x,y) = (x y' + (x y)') / 3, so that
                    // (b(x,y), e_l) = ((x y', e_l) - (x y, e_l')) / 3.
                    const auto [dj, sj] = derivative(ej.phase);
                    const auto [dl, sl] = derivative(el.phase);
                    const double first = sj * ej.wavevector[0] *
                                         triple_trig_integral(1, ei.wavevector, ei.phase,
                                                              ej.wavevector, dj, el.wavevector,
                                                              el.phase);
                    const double second = sl * el.wavevector[0] *
                                          triple_trig_integral(1, ei.wavevector, ei.phase,
                                                               ej.wavevector, ej.phase,
                                                               el.wavevector, dl);
                    value = n3 * (first - second) / 3.0;
                } else {
                    // ((e_i . grad) e_j, e_l) = N^3 (a_i . k_j)(a_j . a_l) int f_i f_j' f_l
                    const double ai_kj = dot3(ei.polarization, as_real(ej.wavevector));
                    const double aj_al = dot3(ej.polarization, el.polarization);
                    if (ai_kj == 0.0 || aj_al == 0.0) continue;
                    const auto [dj, sj] = derivative(ej.phase);
                    value = n3 * ai_kj * aj_al * sj *
                            triple_trig_integral(space_dim, ei.wavevector, ei.phase,
                                                 ej.wavevector, dj, el.wavevector, el.phase);
                }
                tensor[(i * m + j) * m + l] = value;
            }
        }
    }
    return tensor;
}

}  // namespace

HypothesisParams::HypothesisParams(double g_, double r_, double gamma_)
    : g(g_), r(r_), gamma(gamma_) {
    std::vector<std::string> violations;
    if (!(std::isfinite(g) && g > 0.0)) violations.push_back("g_positive");
    if (!(std::isfinite(r) && r > 1.0 && r < 1.5)) violations.push_back("r_range");
    if (!(std::isfinite(gamma) && gamma >= 0.0)) violations.push_back("gamma_nonnegative");
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "invalid hypothesis parameters (g=" << g << ", r=" << r << ", gamma=" << gamma
            << "):";
        for (const auto& v : violations) msg << ' ' << v;
        throw HypothesisError(msg.str(), violations);
    }
}

HypothesisParams HypothesisParams::strict(double g_, double r_, double gamma_) {
    HypothesisParams p(g_, r_, gamma_);
    if (!(p.gamma > 1.0 - p.epsilon())) {
        std::ostringstream msg;
        msg << "gamma_smoothing: gamma=" << p.gamma << " must exceed 1 - epsilon = "
            << 1.0 - p.epsilon();
        throw HypothesisError(msg.str(), {"gamma_smoothing"});
    }
    return p;
}

GalerkinSystem::GalerkinSystem(int space_dim, std::vector<TorusMode> modes, HypothesisParams hyp,
                               std::vector<double> tensor, SystemOptions options)
    : space_dim_(space_dim),
      modes_(std::move(modes)),
      hyp_(hyp),
      tensor_(std::move(tensor)),
      options_(options) {
    const std::size_t m = modes_.size();
    if (m == 0) throw std::invalid_argument("GalerkinSystem: empty basis");
    if (tensor_.size() != m * m * m) {
        throw std::invalid_argument("GalerkinSystem: tensor size does not match m^3");
    }
    lambdas_.resize(m);
    q_.resize(m);
    control_.resize(m);
    curl_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = modes_[k].lambda;
        if (!(lam > 0.0)) throw std::invalid_argument("GalerkinSystem: lambda_k must be positive");
        if (k > 0 && lam < lambdas_[k - 1]) {
            throw std::invalid_argument("GalerkinSystem: eigenvalues must be nondecreasing");
        }
        lambdas_[k] = lam;
        q_[k] = std::pow(lam, -2.0 * hyp_.r);
        control_[k] = std::pow(lam, -hyp_.gamma);
        if (space_dim_ == 1) {
            curl_[k] = lam;
        } else {
            const Vec3 kxa = cross(as_real(modes_[k].wavevector), modes_[k].polarization);
            curl_[k] = dot3(kxa, kxa);
        }
    }
}

GalerkinSystem GalerkinSystem::with_options(SystemOptions options) const {
    GalerkinSystem copy = *this;
    copy.options_ = options;
    return copy;
}

GalerkinSystem GalerkinSystem::with_bilinear(bool enabled) const {
    SystemOptions o = options_;
    o.bilinear = enabled;
    return with_options(o);
}

GalerkinSystem GalerkinSystem::with_noise(bool enabled) const {
    SystemOptions o = options_;
    o.noise = enabled;
    return with_options(o);
}

GalerkinSystem GalerkinSystem::with_hypothesis(HypothesisParams hyp) const {
    return GalerkinSystem(space_dim_, modes_, hyp, tensor_, options_);
}

double triple_trig_integral(int space_dim, const std::array<int, 3>& k1, TorusMode::Phase f1,
                            const std::array<int, 3>& k2, TorusMode::Phase f2,
                            const std::array<int, 3>& k3, TorusMode::Phase f3) {
    std::complex<double> acc = 0.0;
    for (int s1 : {-1, 1}) {
        for (int s2 : {-1, 1}) {
            for (int s3 : {-1, 1}) {
                bool resonant = true;
                for (int c = 0; c < 3; ++c) {
                    if (s1 * k1[c] + s2 * k2[c] + s3 * k3[c] != 0) resonant = false;
                }
                if (!resonant) continue;
                acc += fourier_coeff(f1, s1) * fourier_coeff(f2, s2) * fourier_coeff(f3, s3);
            }
        }
    }
    return acc.real() * std::pow(2.0 * std::numbers::pi, space_dim);
}

GalerkinSystem build_torus_system(std::size_t mode_budget, int space_dim, HypothesisParams hyp,
                                  SystemOptions options) {
    if (mode_budget == 0) throw std::invalid_argument("build_torus_system: mode_budget must be >= 1");
    if (space_dim < 1 || space_dim > 3) {
        throw std::invalid_argument("build_torus_system: space_dim must be 1, 2 or 3");
    }
    auto modes = enumerate_modes(mode_budget, space_dim);
    auto tensor = build_tensor(modes, space_dim);
    return GalerkinSystem(space_dim, std::move(modes), hyp, std::move(tensor), options);
}

SpectralField bilinear(const GalerkinSystem& sys, const SpectralField& x, const SpectralField& y) {
    const std::size_t m = sys.dim();
    if (x.dim() != m || y.dim() != m) {
        throw std::invalid_argument("bilinear: field dimension does not match the system");
    }
    SpectralField out(m);
    const double* t = sys.tensor_data().data();
    for (std::size_t i = 0; i < m; ++i) {
        if (x[i] == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) {
            const double w = x[i] * y[j];
            if (w == 0.0) continue;
            const double* row = t + (i * m + j) * m;
            for (std::size_t k = 0; k < m; ++k) out[k] += w * row[k];
        }
    }
    return out;
}

SpectralField nonlinear_term(const GalerkinSystem& sys, const SpectralField& x) {
    if (!sys.bilinear_enabled()) {
        if (x.dim() != sys.dim()) throw std::invalid_argument("nonlinear_term: dimension mismatch");
        return SpectralField(sys.dim());
    }
    return bilinear(sys, x, x);
}

SpectralField apply_fractional(const GalerkinSystem& sys, double s, const SpectralField& x) {
    if (x.dim() != sys.dim()) throw std::invalid_argument("apply_fractional: dimension mismatch");
    SpectralField out(x.dim());
    for (std::size_t k = 0; k < x.dim(); ++k) out[k] = std::pow(sys.lambdas()[k], s) * x[k];
    return out;
}

SpectralField apply_A(const GalerkinSystem& sys, const SpectralField& x) {
    if (x.dim() != sys.dim()) throw std::invalid_argument("apply_A: dimension mismatch");
    SpectralField out(x.dim());
    for (std::size_t k = 0; k < x.dim(); ++k) out[k] = -sys.lambdas()[k] * x[k];
    return out;
}

double norm_v_sq(const GalerkinSystem& sys, const SpectralField& x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.dim(); ++k) acc += sys.lambdas()[k] * x[k] * x[k];
    return acc;
}

double norm_a_sq(const GalerkinSystem& sys, const SpectralField& x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.dim(); ++k) {
        const double v = sys.lambdas()[k] * x[k];
        acc += v * v;
    }
    return acc;
}

double fractional_norm_sq(const GalerkinSystem& sys, double s, const SpectralField& x) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.dim(); ++k) {
        const double v = std::pow(sys.lambdas()[k], s) * x[k];
        acc += v * v;
    }
    return acc;
}

HypothesisReport validate_hypotheses(const GalerkinSystem& sys) {
    HypothesisReport rep;
    const auto& hyp = sys.hyp();
    rep.epsilon = hyp.epsilon();

    rep.r_in_range = hyp.r > 1.0 && hyp.r < 1.5;
    if (!rep.r_in_range) rep.violations.push_back("r_range");

    rep.gamma_threshold = 1.0 - rep.epsilon;
    rep.gamma_ok = hyp.gamma > rep.gamma_threshold;
    if (!rep.gamma_ok) rep.violations.push_back("gamma_smoothing");

    // Lattice sums sum_k |k|^{2s} over Z^d converge iff 2s < -d.
    rep.trace_exponent = 1.0 + hyp.g - 2.0 * hyp.r;
    rep.summability_threshold = -0.5 * sys.space_dim();
    double partial = 0.0;
    double prev_term = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sys.dim(); ++k) {
        const double term = std::pow(sys.lambdas()[k], 1.0 + hyp.g) * sys.q_spectrum()[k];
        if (term > prev_term * (1.0 + 1e-12)) rep.tail_decreasing = false;
        prev_term = term;
        partial += term;
        rep.trace_partial_sums.push_back(partial);
    }
    rep.summable = rep.tail_decreasing && rep.trace_exponent < rep.summability_threshold;
    if (!rep.summable) rep.violations.push_back("trace_summability");

    // |Q^{-1/2} x| against |(-A)^r x| on a few deterministic probe fields.
    Rng rng(0x5eedULL);
    for (int probe = 0; probe < 8; ++probe) {
        double lhs = 0.0;
        double rhs = 0.0;
        for (std::size_t k = 0; k < sys.dim(); ++k) {
            const double xk = standard_normal(rng);
            const double a = xk / std::sqrt(sys.q_spectrum()[k]);
            const double b = std::pow(sys.lambdas()[k], hyp.r) * xk;
            lhs += a * a;
            rhs += b * b;
        }
        const double gap = std::abs(std::sqrt(lhs) - std::sqrt(rhs)) / std::sqrt(rhs);
        rep.q_inverse_identity_error = std::max(rep.q_inverse_identity_error, gap);
    }
    if (rep.q_inverse_identity_error > 1e-12) rep.violations.push_back("q_inverse_bound");

    rep.passed = rep.violations.empty();
    return rep;
}

double estimate_bilinear_constant(const GalerkinSystem& sys, std::size_t n_samples,
                                  std::uint64_t seed) {
    const std::size_t m = sys.dim();
    Rng rng(seed);
    double sup = 0.0;
    SpectralField x(m), y(m);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t k = 0; k < m; ++k) x[k] = standard_normal(rng);
        for (std::size_t k = 0; k < m; ++k) y[k] = standard_normal(rng);
        const SpectralField b = bilinear(sys, x, y);
        // sup_z (b, (-A)^{1/2} z) / |z| = |(-A)^{1/2} b|
        const double num = std::sqrt(fractional_norm_sq(sys, 0.5, b));
        const double den = std::sqrt(norm_a_sq(sys, x) * norm_a_sq(sys, y));
        if (den > 0.0) sup = std::max(sup, num / den);
    }
    return sup;
}

}  // namespace nsdp
