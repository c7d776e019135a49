#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsdp/gauss_hermite.hpp"
#include "nsdp/hjb.hpp"
#include "nsdp/parallel.hpp"

namespace nsdp {

namespace {

/// R_tau acting on multilinear interpolants factorizes over axes: per axis an
/// n x n matrix of Gauss-Hermite weights times 1D hat functions (with the same
/// linear continuation beyond the faces as BoxGrid::interpolate).
struct AxisOperator {
    std::size_t n = 0;
    std::vector<double> a;  // row-major n x n
};

AxisOperator axis_operator(const BoxGrid& box, std::size_t k, double decay, double sd,
                           const GaussHermiteRule& gh) {
    const std::size_t n = box.points_per_axis();
    AxisOperator op;
    op.n = n;
    op.a.assign(n * n, 0.0);
    const double L = box.half_width(k);
    const double h = box.spacing(k);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = decay * box.coordinate(k, i);
        for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
            const double y = mean + sd * gh.nodes[q];
            const double s = (y + L) / h;
            const double cell = std::clamp(std::floor(s), 0.0, static_cast<double>(n - 2));
            const auto c = static_cast<std::size_t>(cell);
            const double frac = s - cell;
            op.a[i * n + c] += gh.weights[q] * (1.0 - frac);
            op.a[i * n + c + 1] += gh.weights[q] * frac;
        }
    }
    return op;
}

void apply_axis(const BoxGrid& box, std::size_t k, const AxisOperator& op,
                std::span<const double> in, std::span<double> out) {
    const std::size_t n = op.n;
    const std::size_t st = box.stride(k);
    const std::size_t N = box.node_count();
    const std::size_t block = st * n;
    for (std::size_t outer = 0; outer < N; outer += block) {
        for (std::size_t inner = 0; inner < st; ++inner) {
            const std::size_t base = outer + inner;
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                const double* row = &op.a[i * n];
                for (std::size_t j = 0; j < n; ++j) acc += row[j] * in[base + j * st];
                out[base + i * st] = acc;
            }
        }
    }
}

class SemigroupOnGrid {
public:
    SemigroupOnGrid(const GalerkinSystem& sys, const BoxGrid& box, double tau,
                    const GaussHermiteRule& gh)
        : box_(box), scratch_(box.node_count()) {
        const OUTransition tr = ou_transition(sys, tau);
        for (std::size_t k = 0; k < box.dims(); ++k) {
            ops_.push_back(axis_operator(box, k, tr.mean_decay[k], std::sqrt(tr.variance[k]), gh));
        }
    }

    void apply(std::span<const double> in, std::span<double> out) {
        std::vector<double> a(in.begin(), in.end());
        for (std::size_t k = 0; k < ops_.size(); ++k) {
            apply_axis(box_, k, ops_[k], a, scratch_);
            a.swap(scratch_);
        }
        std::copy(a.begin(), a.end(), out.begin());
    }

private:
    const BoxGrid& box_;
    std::vector<AxisOperator> ops_;
    std::vector<double> scratch_;
};

/// R_tau f at every node with f evaluated exactly at the quadrature points.
std::vector<double> apply_R_nodes(const GalerkinSystem& sys, const BoxGrid& box,
                                  const CostTerm& f, double tau, const TensorRule& rule) {
    const std::size_t m = box.dims();
    const OUTransition tr = ou_transition(sys, tau);
    std::vector<double> sd(m);
    for (std::size_t k = 0; k < m; ++k) sd[k] = std::sqrt(tr.variance[k]);
    std::vector<double> out(box.node_count());
    parallel_for(box.node_count(), [&](std::size_t node) {
        const SpectralField x = box.node_point(node);
        if (tau == 0.0) {
            out[node] = f(x);
            return;
        }
        SpectralField y(m);
        double acc = 0.0;
        for (std::size_t p = 0; p < rule.size(); ++p) {
            for (std::size_t k = 0; k < m; ++k) {
                y[k] = tr.mean_decay[k] * x[k] + sd[k] * rule.nodes[p * m + k];
            }
            acc += rule.weights[p] * f(y);
        }
        out[node] = acc;
    });
    return out;
}

}  // namespace

MildSolveResult solve_hjb_mild(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                               double T, const GridSpec& grid, const PicardOptions& picard) {
    const std::size_t m = sys.dim();
    if (m > 3) throw std::invalid_argument("solve_hjb_mild: quadrature mode requires m <= 3");
    if (!(T > 0.0)) throw std::invalid_argument("solve_hjb_mild: horizon must be positive");
    if (grid.time_slices == 0) throw std::invalid_argument("solve_hjb_mild: time_slices must be >= 1");
    if (picard.max_iter == 0) throw std::invalid_argument("solve_hjb_mild: max_iter must be >= 1");

    std::vector<double> widths =
        grid.half_widths.empty() ? default_half_widths(sys, grid.box_sigmas) : grid.half_widths;
    if (widths.size() != m) throw std::invalid_argument("solve_hjb_mild: half_widths must have m entries");
    BoxGrid box(std::move(widths), grid.points_per_axis);
    const std::size_t N = box.node_count();
    const std::size_t S = grid.time_slices;
    const double ds = T / static_cast<double>(S);

    std::vector<double> times(S + 1);
    for (std::size_t s = 0; s <= S; ++s) times[s] = ds * static_cast<double>(s);

    const GaussHermiteRule& gh = gauss_hermite(picard.quadrature_order);
    const TensorRule rule = tensor_gauss_hermite(m, picard.quadrature_order);

    // Lag-indexed pieces: R_{t_d} phi, R_{t_d} Phi and R_{t_d} on nodal data.
    std::vector<std::vector<double>> R_phi(S + 1), R_Phi(S + 1);
    std::vector<SemigroupOnGrid> semigroup;
    semigroup.reserve(S + 1);
    for (std::size_t d = 0; d <= S; ++d) {
        R_phi[d] = apply_R_nodes(sys, box, cost.terminal, times[d], rule);
        R_Phi[d] = apply_R_nodes(sys, box, cost.running, times[d], rule);
        semigroup.emplace_back(sys, box, times[d], gh);
    }

    // Trapezoid weight of slice j in the integral over [0, t_n].
    auto weight = [&](std::size_t n, std::size_t j) {
        return (j == 0 || j == n) ? 0.5 * ds : ds;
    };

    // Source part that does not depend on u.
    ValueGrid base(box, times);
    for (std::size_t n = 0; n <= S; ++n) {
        auto out = base.slice(n);
        for (std::size_t node = 0; node < N; ++node) out[node] = R_phi[n][node];
        if (n == 0) continue;
        for (std::size_t j = 0; j <= n; ++j) {
            const double w = weight(n, j);
            const auto& rp = R_Phi[n - j];
            for (std::size_t node = 0; node < N; ++node) out[node] += w * rp[node];
        }
    }

    std::vector<SpectralField> drift(N);
    for (std::size_t node = 0; node < N; ++node) drift[node] = nonlinear_term(sys, box.node_point(node));
    const bool has_drift = sys.bilinear_enabled();

    MildSolveResult result{base, {}, 0, true};
    ValueGrid& u = result.value;
    std::vector<double> g_nodal(N), Rg(N);
    std::vector<std::vector<double>> g_slices(S + 1, std::vector<double>(N));

    for (std::size_t iter = 1; iter <= picard.max_iter; ++iter) {
        const GradientField grad = gradient(u);
        for (std::size_t j = 0; j <= S; ++j) {
            auto& g = g_slices[j];
            for (std::size_t node = 0; node < N; ++node) {
                double bp_sq = 0.0;
                double adv = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double p = grad.component(j, k)[node];
                    const double bp = sys.control_spectrum()[k] * p;
                    bp_sq += bp * bp;
                    if (has_drift) adv += drift[node][k] * p;
                }
                g[node] = adv - F_of_norm(std::sqrt(bp_sq), R);
            }
        }

        ValueGrid next = base;
        for (std::size_t n = 1; n <= S; ++n) {
            auto out = next.slice(n);
            for (std::size_t j = 0; j <= n; ++j) {
                semigroup[n - j].apply(g_slices[j], Rg);
                const double w = weight(n, j);
                for (std::size_t node = 0; node < N; ++node) out[node] += w * Rg[node];
            }
        }

        double residual = 0.0;
        for (std::size_t n = 0; n <= S; ++n) {
            const auto a = next.slice(n);
            const auto b = u.slice(n);
            for (std::size_t node = 0; node < N; ++node) {
                if (!std::isfinite(a[node])) {
                    std::ostringstream msg;
                    msg << "solve_hjb_mild: non-finite iterate at slice " << n << ", node " << node;
                    throw PicardDivergence(msg.str(), result.residual_history);
                }
                residual = std::max(residual, std::abs(a[node] - b[node]));
            }
        }
        result.residual_history.push_back(residual);
        const auto& h = result.residual_history;
        if (h.size() >= 3 && h[h.size() - 1] > h[h.size() - 2]) result.monotone_contraction = false;
        u = std::move(next);
        result.iterations = iter;
        if (residual < picard.tol) return result;
    }
    std::ostringstream msg;
    msg << "solve_hjb_mild: no convergence after " << picard.max_iter
        << " iterations; last residual " << result.residual_history.back();
    throw PicardDivergence(msg.str(), result.residual_history);
}

}  // namespace nsdp
