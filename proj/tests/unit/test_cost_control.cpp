#include <doctest.h>

#include <cmath>

#include "nsdp/cost_control.hpp"
#include "nsdp/hjb.hpp"

using namespace nsdp;

TEST_CASE("cost terms") {
    const GalerkinSystem sys = build_torus_system(2, 1);
    const SpectralField x{1.0, 1.0};
    const CostTerm sat = CostTerm::saturated_enstrophy(sys, 3.0);
    const double e = sys.curl_weights()[0] + sys.curl_weights()[1];
    CHECK(sat(x) == doctest::Approx(std::min(e, 3.0)));
    CHECK(sat(SpectralField{100.0, 0.0}) == 3.0);
    CHECK(sat.sup() == 3.0);
    const CostTerm rat = CostTerm::rational_enstrophy(sys, 3.0);
    CHECK(rat(x) < 3.0);
    CHECK(rat(x) >= 0.0);
    const CostTerm quad = CostTerm::quadratic(2, {2.0, 0.5, 0.5, 1.0});
    CHECK(quad(SpectralField{1.0, 2.0}) == doctest::Approx(2.0 + 2.0 * 0.5 * 2.0 + 4.0));
    CHECK_FALSE(quad.bounded());
    CHECK(CostTerm::constant(1.5).scaled(2.0)(x) == doctest::Approx(3.0));
    CHECK(CostTerm::constant(1.5).shifted(0.5)(x) == doctest::Approx(2.0));
    CHECK(cost_kind_from_string("rational_enstrophy") == CostKind::RationalEnstrophy);
    CHECK_THROWS(cost_kind_from_string("enstrophy"));
}

TEST_CASE("deterministic cost of a constant control") {
    const GalerkinSystem sys = build_torus_system(1, 1, HypothesisParams(), SystemOptions{false, false});
    const CostSpec cost{CostTerm::constant(2.0), CostTerm::constant(0.5)};
    const IntegratorSpec integ{Scheme::ExponentialEuler, 0.01, 0.4};
    const PathEnsemble ens = simulate_controlled(sys, constant_policy(SpectralField{0.3}).policy, SaturationBound(1.0),
                                                 SpectralField{0.2}, integ, 5, 1, &cost);
    const CostReport r = estimate_cost(ens, cost);
    CHECK(r.J_estimate == doctest::Approx(2.0 * 0.4 + 0.5 * 0.09 * 0.4 + 0.5).epsilon(1e-12));
    CHECK(r.std_error == doctest::Approx(0.0).scale(1e-12));
    CHECK(r.running_control.mean == doctest::Approx(0.5 * 0.09 * 0.4));
    SimulationOptions lean;
    lean.record_paths = false;
    const PathEnsemble unrecorded = simulate_controlled(sys, constant_policy(SpectralField{0.3}).policy,
                                                        SaturationBound(1.0), SpectralField{0.2}, integ, 5, 1, &cost, lean);
    CHECK(estimate_cost(unrecorded, cost).J_estimate == doctest::Approx(r.J_estimate).epsilon(1e-12));
}

TEST_CASE("random admissible controls fill the ball uniformly") {
    const std::size_t m = 2;
    const SaturationBound R(2.0);
    const NamedPolicy pol = random_ball_policy(m, R);
    CHECK(pol.name == "random");
    PathContext ctx{Rng(7), 0, 0};
    const int n = 40000;
    int inner = 0;
    double mean0 = 0.0;
    for (int i = 0; i < n; ++i) {
        const SpectralField z = pol.policy(0.0, SpectralField(m), ctx);
        CHECK(norm(z) <= 2.0);
        if (norm(z) <= 1.0) ++inner;
        mean0 += z[0];
    }
    // P(|z| <= R/2) = 2^-m for the uniform law on the ball.
    const double p = 0.25;
    CHECK(std::abs(inner / double(n) - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    CHECK(std::abs(mean0 / n) <= 4.0 * std::sqrt(1.0 / n));
}

TEST_CASE("dynamic programming check on a single mode") {
    const GalerkinSystem sys = build_torus_system(1, 1);
    const CostSpec cost = make_bounded_cost(sys, CostKind::SaturatedEnstrophy, 4.0, 4.0);
    const SaturationBound R(2.0);
    GridSpec g;
    g.points_per_axis = 61;
    g.time_slices = 32;
    const double T = 0.25;
    const ValueGrid v = solve_hjb_grid(sys, cost, R, T, g);
    const SpectralField x0{1.5};
    const DiscretizationBudget budget = discretization_budget(sys, cost, R, T, g, x0);
    CHECK(std::isfinite(budget.eps_disc));
    CHECK(budget.eps_disc == doctest::Approx(budget.space_delta + budget.time_delta));
    const IntegratorSpec integ{Scheme::ExponentialEuler, 2e-3, T};
    const DPReport rep = dp_verify(sys, cost, v, R, x0, integ, 3000, {}, 11, budget.eps_disc);
    REQUIRE(rep.alternatives.size() == 2);
    CHECK(rep.alternatives[0].name == "zero");
    CHECK(rep.alternatives[1].name == "random");
    CHECK(rep.alternatives[0].seed != rep.feedback_seed);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.identity_holds);
    CHECK(rep.feedback.J_estimate <= rep.alternatives[0].cost.J_estimate);
}
