#include "nsdp/cost_control.hpp"

#include <cmath>
#include <stdexcept>

namespace nsdp {

namespace {

// Seed stream reserved for policy ensembles in dp_verify.
constexpr std::uint64_t kPolicyStream = 100;

MeanEstimate as_estimate(const SampleSummary& s) { return {s.mean, s.std_error}; }

}  // namespace

CostReport estimate_cost(const PathEnsemble& ens, const CostSpec& cost) {
    if (!ens.recorded && !ens.has_cost) {
        throw std::invalid_argument("estimate_cost: ensemble carries neither paths nor cost accumulators");
    }
    std::vector<double> rs, rc, tm, total;
    const std::size_t nt = ens.times.size();
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
        if (ens.excluded[p]) continue;
        double a = 0.0, b = 0.0, c = 0.0;
        if (ens.recorded) {
            double prev_phi = 0.0, prev_zz = 0.0;
            for (std::size_t n = 0; n < nt; ++n) {
                const SpectralField x = ens.state(p, n);
                const SpectralField z = ens.control(p, n);
                const double phi = cost.running(x);
                const double zz = 0.5 * norm_sq(z);
                if (n > 0) {
                    const double dt = ens.times[n] - ens.times[n - 1];
                    a += 0.5 * dt * (prev_phi + phi);
                    b += 0.5 * dt * (prev_zz + zz);
                }
                prev_phi = phi;
                prev_zz = zz;
            }
            c = cost.terminal(ens.state(p, nt - 1));
        } else {
            a = ens.running_state[p];
            b = ens.running_control[p];
            c = ens.terminal[p];
        }
        rs.push_back(a);
        rc.push_back(b);
        tm.push_back(c);
        total.push_back(a + b + c);
    }
    CostReport r;
    r.n_paths = ens.n_paths;
    r.excluded = ens.excluded_count();
    r.excluded_fraction = static_cast<double>(r.excluded) / static_cast<double>(ens.n_paths);
    r.running_state = as_estimate(summarize(rs));
    r.running_control = as_estimate(summarize(rc));
    r.terminal = as_estimate(summarize(tm));
    r.totals = summarize(total);
    r.J_estimate = r.running_state.mean + r.running_control.mean + r.terminal.mean;
    r.std_error = r.totals.std_error;
    return r;
}

NamedPolicy zero_policy(std::size_t m) {
    return {"zero", [m](double, const SpectralField&, PathContext&) { return SpectralField(m); }};
}

NamedPolicy random_ball_policy(std::size_t m, SaturationBound R) {
    return {"random", [m, R](double, const SpectralField&, PathContext& ctx) {
                SpectralField z(m);
                double sq = 0.0;
                do {
                    sq = 0.0;
                    for (std::size_t k = 0; k < m; ++k) {
                        z[k] = standard_normal(ctx.rng);
                        sq += z[k] * z[k];
                    }
                } while (sq == 0.0);
                const double radius =
                    R.value() * std::pow(uniform01(ctx.rng), 1.0 / static_cast<double>(m));
                z *= radius / std::sqrt(sq);
                // Keep the draw inside the closed ball after rounding.
                return norm(z) > R.value() ? DpF(z, R) : z;
            }};
}

NamedPolicy constant_policy(SpectralField z) {
    return {"constant", [z](double, const SpectralField&, PathContext&) { return z; }};
}

NamedPolicy perturbed_feedback_policy(const GalerkinSystem& sys, const GradientField& grad,
                                      SaturationBound R, double horizon, double scale) {
    Policy base = feedback_policy(sys, grad, R, horizon);
    return {"perturbed_feedback", [base, scale](double t, const SpectralField& x, PathContext& ctx) {
                return base(t, x, ctx) * scale;
            }};
}

DPReport dp_verify(const GalerkinSystem& sys, const CostSpec& cost, const ValueGrid& value,
                   SaturationBound R, const SpectralField& x0, const IntegratorSpec& integ,
                   std::size_t n_paths, std::vector<NamedPolicy> alternatives, std::uint64_t seed,
                   double eps_disc, double level) {
    if (value.horizon() < integ.T * (1.0 - 1e-12)) {
        throw std::invalid_argument("dp_verify: value function horizon is shorter than the simulation horizon");
    }
    auto has = [&](const std::string& name) {
        for (const auto& a : alternatives) {
            if (a.name == name) return true;
        }
        return false;
    };
    if (!has("random")) alternatives.insert(alternatives.begin(), random_ball_policy(sys.dim(), R));
    if (!has("zero")) alternatives.insert(alternatives.begin(), zero_policy(sys.dim()));

    const SimulationOptions lean{false};
    DPReport rep;
    rep.level = level;
    rep.seed = seed;
    rep.eps_disc = eps_disc;
    rep.u_T_x0 = value.value_at(integ.T, x0);
    rep.feedback_seed = derive_seed(seed, kPolicyStream, 0);
    const PathEnsemble star =
        simulate_closed_loop(sys, value, R, x0, integ, n_paths, rep.feedback_seed, &cost, lean);
    rep.feedback = estimate_cost(star, cost);
    rep.excursions = star.excursions;

    bool any_fail = false, any_inconclusive = false;
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
        PolicyComparison c;
        c.name = alternatives[i].name;
        c.seed = derive_seed(seed, kPolicyStream, i + 1);
        const PathEnsemble ens =
            simulate_controlled(sys, alternatives[i].policy, R, x0, integ, n_paths, c.seed, &cost, lean);
        c.cost = estimate_cost(ens, cost);
        c.test = welch_less_equal(rep.feedback.totals, c.cost.totals, level);
        any_fail = any_fail || c.test.verdict == Verdict::Fail;
        any_inconclusive = any_inconclusive || c.test.verdict == Verdict::Inconclusive;
        rep.alternatives.push_back(std::move(c));
    }

    rep.identity_gap = std::abs(rep.u_T_x0 - rep.feedback.J_estimate);
    rep.identity_tolerance = std::max(4.0 * rep.feedback.std_error, eps_disc);
    rep.identity_holds = rep.identity_gap <= rep.identity_tolerance;
    const bool excluded = rep.feedback.excluded > 0;

    if (any_fail || !rep.identity_holds || excluded) {
        rep.verdict = Verdict::Fail;
    } else if (any_inconclusive) {
        rep.verdict = Verdict::Inconclusive;
    } else {
        rep.verdict = Verdict::Pass;
    }
    return rep;
}

DiscretizationBudget discretization_budget(const GalerkinSystem& sys, const CostSpec& cost,
                                           SaturationBound R, double T, const GridSpec& grid,
                                           const SpectralField& x0) {
    DiscretizationBudget b;
    GridSolveReport base_report;
    const ValueGrid base = solve_hjb_grid(sys, cost, R, T, grid, &base_report);
    b.u_h = base.value_at(T, x0);

    GridSpec fine = grid;
    fine.points_per_axis = 2 * grid.points_per_axis - 1;
    fine.dt = 0.0;
    b.u_h2 = solve_hjb_grid(sys, cost, R, T, fine).value_at(T, x0);

    GridSpec half_dt = grid;
    half_dt.dt = 0.5 * base_report.dt;
    b.u_dt2 = solve_hjb_grid(sys, cost, R, T, half_dt).value_at(T, x0);

    b.space_delta = std::abs(b.u_h - b.u_h2);
    b.time_delta = std::abs(b.u_h - b.u_dt2);
    b.eps_disc = b.space_delta + b.time_delta;
    return b;
}

}  // namespace nsdp
