#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsdp/cost.hpp"
#include "nsdp/galerkin.hpp"
#include "nsdp/hjb.hpp"
#include "nsdp/sde.hpp"
#include "nsdp/value_grid.hpp"

namespace nsdp {

/// Every problem found in a configuration, reported together.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct SystemConfig {
    std::size_t m = 1;
    int space_dim = 1;
    double r = 1.4;
    double g = 0.1;
    double gamma = 1.0;
    bool bilinear = true;
    bool noise = true;
};

struct CostConfig {
    CostKind kind = CostKind::SaturatedEnstrophy;
    double M = 4.0;            // running cap, or constant value
    double terminal_M = 4.0;   // terminal cap, or constant value
    /// Quadratic descriptors: diagonal entries (length m) or full m x m row-major.
    std::vector<double> running_matrix;
    std::vector<double> terminal_matrix;
};

struct SolverConfig {
    double T = 0.25;
    GridSpec grid;
    PicardOptions picard;
    bool mild = true;             // solve-hjb also runs the mild solver
    std::optional<double> K;      // empty -> default killing-rate rule
    std::size_t fk_paths = 10000;
    double fk_dt = 1e-3;
    std::vector<std::vector<double>> probes;
    double probe_time = -1.0;     // < 0 -> T
};

struct SimulationConfig {
    Scheme scheme = Scheme::ExponentialEuler;
    std::size_t n_paths = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    std::vector<double> x0;
    std::string mode = "closed_loop";   // or "open_loop"
    std::string policy = "zero";        // open-loop policy
    std::vector<std::string> alternatives{"zero", "random"};
    std::vector<double> constant_control;
    double perturb_scale = 0.5;
    double level = 0.99;
    double theta_delta = 1.0;
    std::size_t dump_paths = 20;
    std::size_t threads = 0;
};

struct ConvergeConfig {
    std::vector<std::size_t> m_list{1, 2, 3};
};

struct ExperimentConfig {
    std::string experiment;
    SystemConfig system;
    CostConfig cost;
    double R = 2.0;
    SolverConfig solver;
    SimulationConfig simulation;
    ConvergeConfig converge;

    /// Canonical JSON dump of every field (defaults filled in).
    nlohmann::json to_json() const;
    /// FNV-1a fingerprint of the canonical dump.
    std::string fingerprint() const;

    /// Hypothesis exponents; a quadratic cost selects oracle mode, where the
    /// smoothing condition on B is reported but not enforced.
    HypothesisParams hypothesis() const;
    bool oracle_mode() const { return cost.kind == CostKind::Quadratic; }

    GalerkinSystem build_system() const;
    GalerkinSystem build_system(std::size_t m) const;
    CostSpec build_cost(const GalerkinSystem& sys) const;
    IntegratorSpec integrator() const;
    /// x0 padded with zeros (or truncated) to m modes.
    SpectralField x0(std::size_t m) const;
    std::vector<SpectralField> probes(std::size_t m) const;
};

/// Parses and validates; throws ConfigError listing every problem.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Cross-module checks (hypotheses, m <= 3 for grid work, stability of a
/// user-fixed march step). Returns the problems; empty when runnable.
std::vector<std::string> preflight(const ExperimentConfig& cfg, const std::string& subcommand);

}  // namespace nsdp
