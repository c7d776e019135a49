#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <sstream>

#include "nsdp/hjb.hpp"
#include "nsdp/parallel.hpp"

namespace nsdp {

namespace {

// Below this node count the march runs on the calling thread.
constexpr std::size_t kParallelNodeThreshold = 20000;

struct NodeData {
    std::vector<double> drift;    // [node * m + k]
    std::vector<double> running;  // Phi(node)
};

NodeData precompute_nodes(const GalerkinSystem& sys, const BoxGrid& box, const CostSpec& cost) {
    const std::size_t m = box.dims();
    NodeData d;
    d.drift.resize(box.node_count() * m);
    d.running.resize(box.node_count());
    for (std::size_t node = 0; node < box.node_count(); ++node) {
        const SpectralField x = box.node_point(node);
        const SpectralField b = nonlinear_term(sys, x);
        for (std::size_t k = 0; k < m; ++k) {
            d.drift[node * m + k] = -sys.lambdas()[k] * x[k] + b[k];
        }
        d.running[node] = cost.running(x);
    }
    return d;
}

// max_node |b_k d_k f| for nodal data f.
std::vector<double> scaled_gradient_bounds(const GalerkinSystem& sys, const BoxGrid& box,
                                           std::span<const double> nodal) {
    std::vector<double> out(box.dims(), 0.0);
    std::vector<double> g(box.node_count());
    for (std::size_t k = 0; k < box.dims(); ++k) {
        nodal_gradient(box, nodal, k, g);
        for (double v : g) out[k] = std::max(out[k], std::abs(sys.control_spectrum()[k] * v));
    }
    return out;
}

std::string describe_node(const BoxGrid& box, std::size_t node) {
    std::ostringstream os;
    os << '(';
    const auto idx = box.multi_index(node);
    for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? "," : "") << idx[k];
    os << ')';
    return os.str();
}

BoxGrid make_box(const GalerkinSystem& sys, const GridSpec& grid) {
    std::vector<double> widths =
        grid.half_widths.empty() ? default_half_widths(sys, grid.box_sigmas) : grid.half_widths;
    if (widths.size() != sys.dim()) {
        throw std::invalid_argument("solve_hjb_grid: half_widths must have m entries");
    }
    return BoxGrid(std::move(widths), grid.points_per_axis);
}

std::vector<double> initial_gradient_estimate(const GalerkinSystem& sys, const BoxGrid& box,
                                              const CostSpec& cost, double T) {
    const std::size_t N = box.node_count();
    std::vector<double> phi(N), Phi(N);
    for (std::size_t node = 0; node < N; ++node) {
        const SpectralField x = box.node_point(node);
        phi[node] = cost.terminal(x);
        Phi[node] = cost.running(x);
    }
    std::vector<double> est = scaled_gradient_bounds(sys, box, phi);
    const std::vector<double> run = scaled_gradient_bounds(sys, box, Phi);
    for (std::size_t k = 0; k < est.size(); ++k) est[k] = 2.0 * (est[k] + T * run[k]);
    return est;
}

}  // namespace

double grid_initial_dt_max(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                           double T, const GridSpec& grid) {
    const BoxGrid box = make_box(sys, grid);
    return grid_stability_limit(sys, box, R, initial_gradient_estimate(sys, box, cost, T));
}

double grid_stability_limit(const GalerkinSystem& sys, const BoxGrid& box, SaturationBound R,
                            const std::vector<double>& grad_bounds) {
    const std::size_t m = box.dims();
    std::vector<double> vmax(m, 0.0);
    // |v_k| is maximal at a corner for the linear part; scan nodes for the nonlinear part.
    for (std::size_t node = 0; node < box.node_count(); ++node) {
        const SpectralField x = box.node_point(node);
        const SpectralField b = nonlinear_term(sys, x);
        for (std::size_t k = 0; k < m; ++k) {
            vmax[k] = std::max(vmax[k], std::abs(-sys.lambdas()[k] * x[k] + b[k]));
        }
    }
    double rate = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double h = box.spacing(k);
        const double ham = sys.control_spectrum()[k] * std::min(R.value(), grad_bounds[k]);
        rate += sys.q_effective(k) / (h * h) + (vmax[k] + ham) / h;
    }
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

ValueGrid solve_hjb_grid(const GalerkinSystem& sys, const CostSpec& cost, SaturationBound R,
                         double T, const GridSpec& grid, GridSolveReport* report) {
    const std::size_t m = sys.dim();
    if (m > 3) throw std::invalid_argument("solve_hjb_grid: grid solving requires m <= 3");
    if (!(T > 0.0)) throw std::invalid_argument("solve_hjb_grid: horizon must be positive");
    if (grid.time_slices == 0) throw std::invalid_argument("solve_hjb_grid: time_slices must be >= 1");

    const BoxGrid box = make_box(sys, grid);
    const std::size_t N = box.node_count();

    const NodeData nodes = precompute_nodes(sys, box, cost);
    std::vector<double> cur(N), next(N);
    for (std::size_t node = 0; node < N; ++node) cur[node] = cost.terminal(box.node_point(node));

    // Gradient growth estimate for the Hamiltonian speed: twice |d phi| + T |d Phi|.
    const std::vector<double> grad_est = initial_gradient_estimate(sys, box, cost, T);
    const double dt_max = grid_stability_limit(sys, box, R, grad_est);

    if (grid.dt > 0.0 && grid.dt > dt_max) {
        std::ostringstream msg;
        msg << "solve_hjb_grid: dt=" << grid.dt << " violates the explicit stability bound; "
            << "maximal admissible dt=" << dt_max;
        throw StabilityError(msg.str(), dt_max);
    }
    const double dt_target = grid.dt > 0.0 ? grid.dt : grid.cfl_safety * dt_max;
    const double slice_dt = T / static_cast<double>(grid.time_slices);
    // Power-of-two substeps: a dyadic slice width then gives an exactly representable dt,
    // so flat regions accumulate u + n dt Phi without rounding drift.
    const auto min_steps = static_cast<std::size_t>(std::ceil(slice_dt / dt_target - 1e-12));
    std::size_t steps_per_slice = 1;
    while (steps_per_slice < min_steps) steps_per_slice *= 2;
    const double dt = slice_dt / static_cast<double>(steps_per_slice);

    std::vector<double> times(grid.time_slices + 1);
    for (std::size_t s = 0; s <= grid.time_slices; ++s) {
        times[s] = T * static_cast<double>(s) / static_cast<double>(grid.time_slices);
    }
    ValueGrid value(box, times);
    value.drift = grid.drift;
    value.march_dt = dt;
    value.march_steps = steps_per_slice * grid.time_slices;
    std::copy(cur.begin(), cur.end(), value.slice(0).begin());

    std::vector<double> q(m), b(m), h(m);
    std::vector<std::size_t> stride(m);
    for (std::size_t k = 0; k < m; ++k) {
        q[k] = sys.q_effective(k);
        b[k] = sys.control_spectrum()[k];
        h[k] = box.spacing(k);
        stride[k] = box.stride(k);
    }
    const std::size_t n = box.points_per_axis();
    const bool hybrid = grid.drift == DriftScheme::Hybrid;

    std::vector<double> node_grad(N * m);
    std::vector<unsigned char> node_nonmonotone(N);
    std::size_t nonmonotone_events = 0;

    auto update = [&](std::size_t node) {
        const double u = cur[node];
        double acc = nodes.running[node];
        double p[3];
        double vk[3];
        bool central[3];
        double bp_sq = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = box.axis_index(node, k);
            const std::size_t st = stride[k];
            double um, up;
            if (i == 0) {
                up = cur[node + st];
                um = 2.0 * u - up;
            } else if (i == n - 1) {
                um = cur[node - st];
                up = 2.0 * u - um;
            } else {
                um = cur[node - st];
                up = cur[node + st];
            }
            const double hk = h[k];
            acc += 0.5 * q[k] * (up - 2.0 * u + um) / (hk * hk);
            p[k] = (up - um) / (2.0 * hk);
            const double v = nodes.drift[node * m + k];
            vk[k] = v;
            central[k] = hybrid && std::abs(v) * hk <= q[k];
            if (central[k]) {
                acc += v * p[k];
            } else if (v > 0.0) {
                acc += v * (up - u) / hk;
            } else {
                acc += v * (u - um) / hk;
            }
            const double bp = b[k] * p[k];
            bp_sq += bp * bp;
            node_grad[node * m + k] = std::abs(bp);
        }
        const double bp_norm = std::sqrt(bp_sq);
        acc -= F_of_norm(bp_norm, R);
        next[node] = u + dt * acc;

        // Neighbour weights of the linearized update must stay nonnegative.
        const double sat = bp_norm > R.value() ? R.value() / bp_norm : 1.0;
        bool bad = false;
        for (std::size_t k = 0; k < m; ++k) {
            const double hk = h[k];
            const double diff = 0.5 * q[k] / (hk * hk);
            const double ham = b[k] * b[k] * p[k] * sat / (2.0 * hk);
            double wp, wm;
            if (central[k]) {
                wp = diff + vk[k] / (2.0 * hk);
                wm = diff - vk[k] / (2.0 * hk);
            } else {
                wp = diff + std::max(vk[k], 0.0) / hk;
                wm = diff - std::min(vk[k], 0.0) / hk;
            }
            if (wp - ham < -1e-12 * (diff + 1.0) || wm + ham < -1e-12 * (diff + 1.0)) bad = true;
        }
        node_nonmonotone[node] = bad ? 1 : 0;
    };

    for (std::size_t s = 1; s <= grid.time_slices; ++s) {
        for (std::size_t step = 0; step < steps_per_slice; ++step) {
            if (N >= kParallelNodeThreshold) {
                parallel_for(N, update);
            } else {
                for (std::size_t node = 0; node < N; ++node) update(node);
            }
            // Stability with the gradients actually present in this step.
            std::vector<double> gk(m, 0.0);
            for (std::size_t node = 0; node < N; ++node) {
                for (std::size_t k = 0; k < m; ++k) gk[k] = std::max(gk[k], node_grad[node * m + k]);
                nonmonotone_events += node_nonmonotone[node];
                if (!std::isfinite(next[node])) {
                    std::ostringstream msg;
                    msg << "solve_hjb_grid: non-finite value at node " << describe_node(box, node)
                        << " on slice " << s << ", step " << step;
                    throw std::runtime_error(msg.str());
                }
            }
            bool exceeded = false;
            for (std::size_t k = 0; k < m; ++k) exceeded = exceeded || gk[k] > grad_est[k];
            if (exceeded) {
                const double limit = grid_stability_limit(sys, box, R, gk);
                if (dt > limit) {
                    std::ostringstream msg;
                    msg << "solve_hjb_grid: value gradients grew beyond the stability estimate at t="
                        << times[s - 1] + static_cast<double>(step + 1) * dt
                        << "; maximal admissible dt=" << limit;
                    throw StabilityError(msg.str(), limit);
                }
            }
            cur.swap(next);
        }
        std::copy(cur.begin(), cur.end(), value.slice(s).begin());
    }

    if (report) {
        report->dt_max = dt_max;
        report->dt = dt;
        report->steps = value.march_steps;
        report->nonmonotone_events = nonmonotone_events;
    }
    return value;
}

BoundsReport assert_value_bounds(const ValueGrid& v, const CostSpec& cost) {
    BoundsReport rep;
    if (!cost.bounded()) {
        rep.applicable = false;
        return rep;
    }
    rep.worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < v.slice_count(); ++s) {
        const double upper = cost.sup_phi() + v.times()[s] * cost.sup_Phi();
        const auto u = v.slice(s);
        for (std::size_t node = 0; node < u.size(); ++node) {
            const double slack = std::min(u[node], upper - u[node]);
            if (!(slack >= 0.0)) ++rep.violations;
            if (slack < rep.worst_slack) {
                rep.worst_slack = slack;
                rep.worst_slice = s;
                rep.worst_node = node;
                rep.worst_value = u[node];
            }
        }
    }
    rep.holds = rep.violations == 0;
    return rep;
}

}  // namespace nsdp
