#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nsdp/cost.hpp"
#include "nsdp/galerkin.hpp"
#include "nsdp/hamiltonian.hpp"
#include "nsdp/ou.hpp"
#include "nsdp/rng.hpp"
#include "nsdp/spectral_field.hpp"
#include "nsdp/value_grid.hpp"

namespace nsdp {

enum class Scheme { ExponentialEuler, EulerMaruyama };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct IntegratorSpec {
    Scheme scheme = Scheme::ExponentialEuler;
    double dt = 1e-3;
    double T = 0.25;

    /// Number of steps; T must be a whole multiple of dt up to 1e-9 relative.
    std::size_t steps() const;
    /// Throws std::invalid_argument on dt > T or an unstable Euler-Maruyama step.
    void validate(const GalerkinSystem& sys) const;
};

/// phi_1(z) = (e^z - 1) / z, with the series branch for |z| < 1e-4.
double phi1(double z);

/// Precomputed per-mode coefficients of one step of size dt.
struct StepCoefficients {
    Scheme scheme = Scheme::ExponentialEuler;
    double dt = 0.0;
    std::vector<double> decay;    // e^{-lambda dt} (EE) or 1 - lambda dt (EM)
    std::vector<double> forcing;  // dt phi_1(-lambda dt) (EE) or dt (EM)
    std::vector<double> noise_sd; // exact OU increment sd (EE) or sqrt(q dt) (EM)
};
StepCoefficients step_coefficients(const GalerkinSystem& sys, Scheme scheme, double dt);

/// One step X_n -> X_{n+1} with forcing b_m(X_n) + B z_n. `control` may be empty.
void advance(const GalerkinSystem& sys, const StepCoefficients& c, SpectralField& x,
             const SpectralField& control, Rng& rng);

/// Per-path mutable state handed to policies.
struct PathContext {
    Rng rng;
    std::size_t path = 0;
    std::size_t excursions = 0;  // feedback queries outside the value box
};

/// z = policy(t, X(t)); must only read the present state (adaptedness).
using Policy = std::function<SpectralField(double, const SpectralField&, PathContext&)>;

/// Magnitude of the state beyond which a path is aborted.
inline constexpr double kBlowUpThreshold = 1e6;

struct PathEnsemble {
    std::size_t n_paths = 0;
    std::size_t dims = 0;
    std::uint64_t seed = 0;
    double R = 0.0;
    SpectralField x0;
    std::vector<double> times;
    bool recorded = false;
    /// Flat [path][time][mode] storage, filled when recorded. The control at the
    /// final time is the policy evaluated at T (closing the trapezoid, not applied).
    std::vector<double> state_data;
    std::vector<double> control_data;
    /// Trapezoid accumulators per path: int Phi(X) dt, int |z|^2/2 dt, phi(X_T).
    std::vector<double> running_state;
    std::vector<double> running_control;
    std::vector<double> terminal;
    /// Energy accumulators per path: sup_t |X|^2 and int ||X||^2 dt.
    std::vector<double> sup_sq;
    std::vector<double> int_v;
    std::vector<unsigned char> excluded;
    std::size_t clipped_controls = 0;
    std::size_t excursions = 0;
    bool has_cost = false;

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    std::size_t excluded_count() const;
    SpectralField state(std::size_t p, std::size_t n) const;
    SpectralField control(std::size_t p, std::size_t n) const;
    /// max over recorded controls of |z|.
    double max_control_norm() const;
};

struct SimulationOptions {
    bool record_paths = true;
};

/// Simulates the controlled system with noise stream `seed`. Controls with
/// |z| > R are clipped to the sphere and counted. When `cost` is non-null the
/// per-path accumulators are filled.
PathEnsemble simulate_controlled(const GalerkinSystem& sys, const Policy& policy, SaturationBound R,
                                 const SpectralField& x0, const IntegratorSpec& integ,
                                 std::size_t n_paths, std::uint64_t seed,
                                 const CostSpec* cost = nullptr,
                                 const SimulationOptions& opts = {});

/// Feedback z*(t, x) = -D_pF(B^* u_x(T - t, x)) read from a gradient field.
Policy feedback_policy(const GalerkinSystem& sys, const GradientField& grad, SaturationBound R,
                       double horizon);

/// Closed loop with the feedback of `value`; value must cover [0, integ.T].
PathEnsemble simulate_closed_loop(const GalerkinSystem& sys, const ValueGrid& value,
                                  SaturationBound R, const SpectralField& x0,
                                  const IntegratorSpec& integ, std::size_t n_paths,
                                  std::uint64_t seed, const CostSpec* cost = nullptr,
                                  const SimulationOptions& opts = {});

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct EnergyReport {
    MeanEstimate sup_sq;    // E[sup_t |X|^2]
    MeanEstimate int_v;     // E[int ||X||^2]
    double bound_rhs = 0.0; // 1 + |x0|^2 + Tr Q
    double c_emp = 0.0;     // (sup_sq + int_v) / bound_rhs
    std::size_t used_paths = 0;
};
EnergyReport energy_estimate(const PathEnsemble& ens, const GalerkinSystem& sys);

/// theta_delta = (2 delta + 1) / (2 delta - 1).
double theta_of_delta(double delta);

/// E[int |(-A)^{(1+d)/2} X|^2 / (1 + |(-A)^{d/2} X|^2)^theta_d ds]; delta must
/// lie in (1/2, min(1 + g, 1 + 2 gamma)].
MeanEstimate theta_delta_diagnostic(const PathEnsemble& ens, const GalerkinSystem& sys,
                                    double delta);

}  // namespace nsdp
