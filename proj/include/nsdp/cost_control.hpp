#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nsdp/cost.hpp"
#include "nsdp/hjb.hpp"
#include "nsdp/sde.hpp"
#include "nsdp/stats.hpp"

namespace nsdp {

struct CostReport {
    double J_estimate = 0.0;  // running_state + running_control + terminal
    double std_error = 0.0;   // of the per-path total
    MeanEstimate running_state;
    MeanEstimate running_control;
    MeanEstimate terminal;
    SampleSummary totals;
    std::size_t n_paths = 0;
    std::size_t excluded = 0;
    double excluded_fraction = 0.0;
    std::string fingerprint;
};

/// Per-path J = int (Phi(X) + |z|^2/2) dt + phi(X_T) by the trapezoid rule.
/// Recomputed from the recorded states and controls when available, otherwise
/// taken from the ensemble's accumulators.
CostReport estimate_cost(const PathEnsemble& ens, const CostSpec& cost);

struct NamedPolicy {
    std::string name;
    Policy policy;
};

NamedPolicy zero_policy(std::size_t m);
/// iid draws uniform in the ball of radius R at every step.
NamedPolicy random_ball_policy(std::size_t m, SaturationBound R);
NamedPolicy constant_policy(SpectralField z);
/// scale * z*(t, x); the gradient field must outlive the policy.
NamedPolicy perturbed_feedback_policy(const GalerkinSystem& sys, const GradientField& grad,
                                      SaturationBound R, double horizon, double scale);

struct PolicyComparison {
    std::string name;
    std::uint64_t seed = 0;
    CostReport cost;
    WelchComparison test;  // of J(alternative) - J(z*)
};

struct DPReport {
    double u_T_x0 = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t feedback_seed = 0;
    CostReport feedback;
    std::vector<PolicyComparison> alternatives;
    double level = 0.99;
    double identity_gap = 0.0;        // |u(T, x0) - J(z*)|
    double eps_disc = 0.0;
    double identity_tolerance = 0.0;  // max(4 SE, eps_disc)
    bool identity_holds = false;
    std::size_t excursions = 0;
    Verdict verdict = Verdict::Inconclusive;
};

/// u(T, x0) from the grid, J(z*) from the closed loop and J of every
/// alternative (zero and iid random are always added) with Welch intervals.
/// Each policy runs on its own derived seed.
DPReport dp_verify(const GalerkinSystem& sys, const CostSpec& cost, const ValueGrid& value,
                   SaturationBound R, const SpectralField& x0, const IntegratorSpec& integ,
                   std::size_t n_paths, std::vector<NamedPolicy> alternatives, std::uint64_t seed,
                   double eps_disc, double level = 0.99);

struct DiscretizationBudget {
    double u_h = 0.0;
    double u_h2 = 0.0;   // points_per_axis doubled (2n - 1)
    double u_dt2 = 0.0;  // march step halved
    double space_delta = 0.0;
    double time_delta = 0.0;
    double eps_disc = 0.0;
};

/// eps_disc = |u_h - u_{h/2}|(T, x0) + |u_dt - u_{dt/2}|(T, x0).
DiscretizationBudget discretization_budget(const GalerkinSystem& sys, const CostSpec& cost,
                                           SaturationBound R, double T, const GridSpec& grid,
                                           const SpectralField& x0);

}  // namespace nsdp
