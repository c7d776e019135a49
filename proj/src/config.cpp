#include "nsdp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nsdp/io.hpp"

namespace nsdp {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
    std::ostringstream os;
    os << "invalid configuration (" << problems.size() << " problem"
       << (problems.size() == 1 ? "" : "s") << ")";
    for (const auto& p : problems) os << "\n  - " << p;
    return os.str();
}

/// One JSON object being read; remembers which keys were consumed so the
/// leftovers can be reported as unknown.
class Block {
public:
    Block(const json* j, std::string path, std::vector<std::string>& problems)
        : j_(j), path_(std::move(path)), problems_(problems) {
        if (j_ && !j_->is_object()) {
            problems_.push_back(where() + " must be an object");
            j_ = nullptr;
        }
    }

    Block child(const std::string& key) {
        seen_.insert(key);
        const json* c = find(key);
        return Block(c, path_.empty() ? key : path_ + "." + key, problems_);
    }

    void number(const std::string& key, double& out) {
        if (const json* v = take(key)) {
            if (v->is_number()) {
                out = v->get<double>();
                if (!std::isfinite(out)) bad(key, "must be finite");
            } else {
                bad(key, "must be a number");
            }
        }
    }

    void optional_number(const std::string& key, std::optional<double>& out) {
        if (const json* v = take(key)) {
            if (v->is_null()) {
                out.reset();
            } else if (v->is_number()) {
                out = v->get<double>();
            } else {
                bad(key, "must be a number or null");
            }
        }
    }

    void count(const std::string& key, std::size_t& out) {
        if (const json* v = take(key)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0)) {
                out = v->get<std::size_t>();
            } else {
                bad(key, "must be a nonnegative integer");
            }
        }
    }

    void integer(const std::string& key, int& out) {
        if (const json* v = take(key)) {
            if (v->is_number_integer()) {
                out = v->get<int>();
            } else {
                bad(key, "must be an integer");
            }
        }
    }

    void u64(const std::string& key, std::uint64_t& out) {
        if (const json* v = take(key)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0)) {
                out = v->get<std::uint64_t>();
            } else {
                bad(key, "must be a nonnegative integer");
            }
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const json* v = take(key)) {
            if (v->is_boolean()) {
                out = v->get<bool>();
            } else {
                bad(key, "must be true or false");
            }
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = take(key)) {
            if (v->is_string()) {
                out = v->get<std::string>();
            } else {
                bad(key, "must be a string");
            }
        }
    }

    void numbers(const std::string& key, std::vector<double>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) return bad(key, "must be an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) return bad(key, "must be an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    void counts(const std::string& key, std::vector<std::size_t>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) return bad(key, "must be an array of nonnegative integers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number_unsigned()) return bad(key, "must be an array of nonnegative integers");
                out.push_back(e.get<std::size_t>());
            }
        }
    }

    void strings(const std::string& key, std::vector<std::string>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) return bad(key, "must be an array of strings");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_string()) return bad(key, "must be an array of strings");
                out.push_back(e.get<std::string>());
            }
        }
    }

    void rows(const std::string& key, std::vector<std::vector<double>>& out) {
        if (const json* v = take(key)) {
            if (!v->is_array()) return bad(key, "must be an array of number arrays");
            out.clear();
            for (const auto& row : *v) {
                if (!row.is_array()) return bad(key, "must be an array of number arrays");
                std::vector<double> r;
                for (const auto& e : row) {
                    if (!e.is_number()) return bad(key, "must be an array of number arrays");
                    r.push_back(e.get<double>());
                }
                out.push_back(std::move(r));
            }
        }
    }

    /// Reports keys that were never read.
    void finish() {
        if (!j_) return;
        for (const auto& [key, value] : j_->items()) {
            if (!seen_.count(key)) problems_.push_back("unknown key '" + qualified(key) + "'");
        }
    }

    std::string qualified(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json* find(const std::string& key) const {
        if (!j_) return nullptr;
        const auto it = j_->find(key);
        return it == j_->end() ? nullptr : &*it;
    }
    const json* take(const std::string& key) {
        seen_.insert(key);
        return find(key);
    }
    void bad(const std::string& key, const std::string& what) {
        problems_.push_back("'" + qualified(key) + "' " + what);
    }
    std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }

    const json* j_;
    std::string path_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

void require(bool ok, std::vector<std::string>& problems, const std::string& msg) {
    if (!ok) problems.push_back(msg);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

ExperimentConfig parse_config(const json& j) {
    std::vector<std::string> problems;
    ExperimentConfig c;
    Block root(&j, "", problems);
    root.string("experiment", c.experiment);

    {
        Block b = root.child("system");
        b.count("m", c.system.m);
        b.integer("space_dim", c.system.space_dim);
        b.number("r", c.system.r);
        b.number("g", c.system.g);
        b.number("gamma", c.system.gamma);
        b.boolean("bilinear", c.system.bilinear);
        b.boolean("noise", c.system.noise);
        b.finish();
    }
    {
        Block b = root.child("cost");
        std::string kind = to_string(c.cost.kind);
        b.string("kind", kind);
        try {
            c.cost.kind = cost_kind_from_string(kind);
        } catch (const std::exception& e) {
            problems.push_back("'cost.kind': " + std::string(e.what()));
        }
        b.number("M", c.cost.M);
        b.number("terminal_M", c.cost.terminal_M);
        b.numbers("running_matrix", c.cost.running_matrix);
        b.numbers("terminal_matrix", c.cost.terminal_matrix);
        b.finish();
    }
    {
        Block b = root.child("control");
        b.number("R", c.R);
        b.finish();
    }
    {
        Block b = root.child("solver");
        b.number("T", c.solver.T);
        b.count("points_per_axis", c.solver.grid.points_per_axis);
        b.numbers("half_widths", c.solver.grid.half_widths);
        b.number("box_sigmas", c.solver.grid.box_sigmas);
        b.number("dt", c.solver.grid.dt);
        b.number("cfl_safety", c.solver.grid.cfl_safety);
        b.count("time_slices", c.solver.grid.time_slices);
        std::string drift = to_string(c.solver.grid.drift);
        b.string("drift", drift);
        try {
            c.solver.grid.drift = drift_scheme_from_string(drift);
        } catch (const std::exception& e) {
            problems.push_back("'solver.drift': " + std::string(e.what()));
        }
        b.boolean("mild", c.solver.mild);
        b.number("picard_tol", c.solver.picard.tol);
        b.count("picard_max_iter", c.solver.picard.max_iter);
        b.count("quadrature_order", c.solver.picard.quadrature_order);
        b.optional_number("K", c.solver.K);
        b.count("fk_paths", c.solver.fk_paths);
        b.number("fk_dt", c.solver.fk_dt);
        b.rows("probes", c.solver.probes);
        b.number("probe_time", c.solver.probe_time);
        b.finish();
    }
    {
        Block b = root.child("simulation");
        std::string scheme = to_string(c.simulation.scheme);
        b.string("scheme", scheme);
        try {
            c.simulation.scheme = scheme_from_string(scheme);
        } catch (const std::exception& e) {
            problems.push_back("'simulation.scheme': " + std::string(e.what()));
        }
        b.count("n_paths", c.simulation.n_paths);
        b.number("dt", c.simulation.dt);
        b.u64("seed", c.simulation.seed);
        b.numbers("x0", c.simulation.x0);
        b.string("mode", c.simulation.mode);
        b.string("policy", c.simulation.policy);
        b.strings("alternatives", c.simulation.alternatives);
        b.numbers("constant_control", c.simulation.constant_control);
        b.number("perturb_scale", c.simulation.perturb_scale);
        b.number("level", c.simulation.level);
        b.number("theta_delta", c.simulation.theta_delta);
        b.count("dump_paths", c.simulation.dump_paths);
        b.count("threads", c.simulation.threads);
        b.finish();
    }
    {
        Block b = root.child("converge");
        b.counts("m_list", c.converge.m_list);
        b.finish();
    }
    root.finish();

    // Ranges and shapes.
    const std::size_t m = c.system.m;
    require(m >= 1, problems, "'system.m' must be >= 1");
    require(c.system.space_dim >= 1 && c.system.space_dim <= 3, problems,
            "'system.space_dim' must be 1, 2 or 3");
    require(c.system.g > 0.0, problems, "'system.g' must be positive");
    require(c.system.r > 1.0 && c.system.r < 1.5, problems, "'system.r' must lie in (1, 3/2)");
    require(c.system.gamma >= 0.0, problems, "'system.gamma' must be >= 0");
    if (c.cost.kind == CostKind::Quadratic) {
        for (const auto* key : {"running_matrix", "terminal_matrix"}) {
            const auto& mat = std::string(key) == "running_matrix" ? c.cost.running_matrix
                                                                  : c.cost.terminal_matrix;
            require(mat.size() == m || mat.size() == m * m, problems,
                    std::string("'cost.") + key + "' must have m or m*m entries");
        }
    } else if (c.cost.kind == CostKind::Constant) {
        require(c.cost.M >= 0.0 && c.cost.terminal_M >= 0.0, problems,
                "'cost.M' and 'cost.terminal_M' must be >= 0 for a constant cost");
    } else {
        require(c.cost.M > 0.0, problems, "'cost.M' must be positive");
        require(c.cost.terminal_M > 0.0, problems, "'cost.terminal_M' must be positive");
    }
    require(c.R > 0.0, problems, "'control.R' must be positive");
    require(c.solver.T > 0.0, problems, "'solver.T' must be positive");
    require(c.solver.grid.points_per_axis >= 3 && c.solver.grid.points_per_axis % 2 == 1, problems,
            "'solver.points_per_axis' must be odd and >= 3");
    require(c.solver.grid.half_widths.empty() || c.solver.grid.half_widths.size() == m, problems,
            "'solver.half_widths' must be empty or have m entries");
    for (double w : c.solver.grid.half_widths) {
        require(w > 0.0, problems, "'solver.half_widths' entries must be positive");
    }
    require(c.solver.grid.box_sigmas > 0.0, problems, "'solver.box_sigmas' must be positive");
    require(c.solver.grid.dt >= 0.0, problems, "'solver.dt' must be >= 0 (0 selects the stable step)");
    require(c.solver.grid.cfl_safety > 0.0 && c.solver.grid.cfl_safety <= 1.0, problems,
            "'solver.cfl_safety' must lie in (0, 1]");
    require(c.solver.grid.time_slices >= 1, problems, "'solver.time_slices' must be >= 1");
    require(c.solver.picard.tol > 0.0, problems, "'solver.picard_tol' must be positive");
    require(c.solver.picard.max_iter >= 1, problems, "'solver.picard_max_iter' must be >= 1");
    require(c.solver.picard.quadrature_order >= 1 && c.solver.picard.quadrature_order <= 64, problems,
            "'solver.quadrature_order' must lie in [1, 64]");
    if (c.solver.K) require(*c.solver.K >= 0.0, problems, "'solver.K' must be >= 0");
    require(c.solver.fk_paths >= 2, problems, "'solver.fk_paths' must be >= 2");
    require(c.solver.fk_dt > 0.0, problems, "'solver.fk_dt' must be positive");
    require(std::all_of(c.solver.probes.begin(), c.solver.probes.end(),
                        [m](const auto& p) { return p.size() == m; }),
            problems, "'solver.probes' entries must have m coordinates");
    require(c.solver.probe_time <= c.solver.T, problems, "'solver.probe_time' must not exceed T");
    require(c.simulation.n_paths >= 2, problems, "'simulation.n_paths' must be >= 2");
    require(c.simulation.dt > 0.0, problems, "'simulation.dt' must be positive");
    require(c.simulation.x0.size() <= m || c.experiment == "converge-m", problems,
            "'simulation.x0' has more entries than m");
    require(c.simulation.mode == "closed_loop" || c.simulation.mode == "open_loop", problems,
            "'simulation.mode' must be closed_loop or open_loop");
    static const std::set<std::string> policies{"zero", "random", "constant", "perturbed_feedback"};
    require(policies.count(c.simulation.policy) == 1, problems,
            "'simulation.policy' must be one of zero, random, constant, perturbed_feedback");
    for (const auto& a : c.simulation.alternatives) {
        require(policies.count(a) == 1, problems, "'simulation.alternatives' has unknown policy '" + a + "'");
    }
    require(c.simulation.constant_control.empty() || c.simulation.constant_control.size() == m, problems,
            "'simulation.constant_control' must be empty or have m entries");
    require(c.simulation.level > 0.0 && c.simulation.level < 1.0, problems,
            "'simulation.level' must lie in (0, 1)");
    require(!c.converge.m_list.empty(), problems, "'converge.m_list' must not be empty");
    for (std::size_t mm : c.converge.m_list) require(mm >= 1, problems, "'converge.m_list' entries must be >= 1");

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read configuration file '" + path.string() + "'"});
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({"'" + path.string() + "' is not valid JSON: " + e.what()});
    }
    return parse_config(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["system"] = {{"m", system.m}, {"space_dim", system.space_dim}, {"r", system.r},
                   {"g", system.g}, {"gamma", system.gamma}, {"bilinear", system.bilinear},
                   {"noise", system.noise}};
    j["cost"] = {{"kind", nsdp::to_string(cost.kind)}, {"M", cost.M}, {"terminal_M", cost.terminal_M},
                 {"running_matrix", cost.running_matrix}, {"terminal_matrix", cost.terminal_matrix}};
    j["control"] = {{"R", R}};
    j["solver"] = {{"T", solver.T},
                   {"points_per_axis", solver.grid.points_per_axis},
                   {"half_widths", solver.grid.half_widths},
                   {"box_sigmas", solver.grid.box_sigmas},
                   {"dt", solver.grid.dt},
                   {"cfl_safety", solver.grid.cfl_safety},
                   {"time_slices", solver.grid.time_slices},
                   {"drift", nsdp::to_string(solver.grid.drift)},
                   {"mild", solver.mild},
                   {"picard_tol", solver.picard.tol},
                   {"picard_max_iter", solver.picard.max_iter},
                   {"quadrature_order", solver.picard.quadrature_order},
                   {"K", solver.K ? json(*solver.K) : json(nullptr)},
                   {"fk_paths", solver.fk_paths},
                   {"fk_dt", solver.fk_dt},
                   {"probes", solver.probes},
                   {"probe_time", solver.probe_time}};
    j["simulation"] = {{"scheme", nsdp::to_string(simulation.scheme)},
                       {"n_paths", simulation.n_paths},
                       {"dt", simulation.dt},
                       {"seed", simulation.seed},
                       {"x0", simulation.x0},
                       {"mode", simulation.mode},
                       {"policy", simulation.policy},
                       {"alternatives", simulation.alternatives},
                       {"constant_control", simulation.constant_control},
                       {"perturb_scale", simulation.perturb_scale},
                       {"level", simulation.level},
                       {"theta_delta", simulation.theta_delta},
                       {"dump_paths", simulation.dump_paths},
                       {"threads", simulation.threads}};
    j["converge"] = {{"m_list", converge.m_list}};
    return j;
}

std::string ExperimentConfig::fingerprint() const {
    json j = to_json();
    // The worker count never changes results, so it is not part of the identity.
    j["simulation"].erase("threads");
    return fingerprint_of(j);
}

HypothesisParams ExperimentConfig::hypothesis() const {
    return HypothesisParams(system.g, system.r, system.gamma);
}

GalerkinSystem ExperimentConfig::build_system() const { return build_system(system.m); }

GalerkinSystem ExperimentConfig::build_system(std::size_t m) const {
    return build_torus_system(m, system.space_dim, hypothesis(),
                              SystemOptions{system.bilinear, system.noise});
}

namespace {

CostTerm quadratic_term(std::size_t m, const std::vector<double>& entries) {
    if (entries.size() == m) return CostTerm::quadratic_diagonal(entries);
    if (entries.size() == m * m) return CostTerm::quadratic(m, entries);
    // Wider configured matrices are truncated to the leading diagonal block.
    std::vector<double> diag(m, 0.0);
    const std::size_t n = entries.size();
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    for (std::size_t k = 0; k < m; ++k) {
        if (side * side == n && k < side) {
            diag[k] = entries[k * side + k];
        } else if (k < n) {
            diag[k] = entries[k];
        }
    }
    return CostTerm::quadratic_diagonal(diag);
}

}  // namespace

CostSpec ExperimentConfig::build_cost(const GalerkinSystem& sys) const {
    const std::size_t m = sys.dim();
    switch (cost.kind) {
        case CostKind::Quadratic:
            return {quadratic_term(m, cost.running_matrix), quadratic_term(m, cost.terminal_matrix)};
        case CostKind::Constant:
            return {CostTerm::constant(cost.M), CostTerm::constant(cost.terminal_M)};
        default:
            return make_bounded_cost(sys, cost.kind, cost.M, cost.terminal_M);
    }
}

IntegratorSpec ExperimentConfig::integrator() const {
    return IntegratorSpec{simulation.scheme, simulation.dt, solver.T};
}

SpectralField ExperimentConfig::x0(std::size_t m) const {
    SpectralField x(m);
    for (std::size_t k = 0; k < m && k < simulation.x0.size(); ++k) x[k] = simulation.x0[k];
    return x;
}

std::vector<SpectralField> ExperimentConfig::probes(std::size_t m) const {
    std::vector<SpectralField> out;
    for (const auto& p : solver.probes) {
        SpectralField x(m);
        for (std::size_t k = 0; k < m && k < p.size(); ++k) x[k] = p[k];
        out.push_back(x);
    }
    return out;
}

std::vector<std::string> preflight(const ExperimentConfig& cfg, const std::string& subcommand) {
    std::vector<std::string> problems;
    const bool needs_grid = subcommand == "solve-hjb" || subcommand == "fk-check" ||
                            subcommand == "dp-verify" || subcommand == "lq-oracle" ||
                            (subcommand == "simulate" && cfg.simulation.mode == "closed_loop") ||
                            (subcommand == "simulate" && cfg.simulation.policy == "perturbed_feedback");
    if (needs_grid && cfg.system.m > 3) {
        problems.push_back("'" + subcommand + "' solves the HJB equation on a grid, which needs m <= 3 (m = " +
                           std::to_string(cfg.system.m) + ")");
    }
    if (subcommand == "lq-oracle") {
        if (!cfg.oracle_mode()) problems.push_back("'lq-oracle' needs cost.kind = quadratic");
        if (cfg.system.bilinear) problems.push_back("'lq-oracle' needs system.bilinear = false");
    }
    if (cfg.simulation.x0.size() > cfg.system.m && subcommand != "converge-m") {
        problems.push_back("'simulation.x0' has more entries than m");
    }

    try {
        const GalerkinSystem sys = cfg.build_system();
        if (subcommand != "validate" && !cfg.oracle_mode()) {
            const HypothesisReport rep = validate_hypotheses(sys);
            for (const auto& v : rep.violations) problems.push_back("hypothesis violation: " + v);
        }
        try {
            const IntegratorSpec integ = cfg.integrator();
            integ.validate(sys);
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
        if (needs_grid && cfg.system.m <= 3 && cfg.solver.grid.dt > 0.0) {
            const CostSpec cost = cfg.build_cost(sys);
            const double limit =
                grid_initial_dt_max(sys, cost, SaturationBound(cfg.R), cfg.solver.T, cfg.solver.grid);
            if (cfg.solver.grid.dt > limit) {
                problems.push_back("'solver.dt' = " + format_double(cfg.solver.grid.dt) +
                                   " exceeds the explicit stability bound " + format_double(limit));
            }
        }
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    return problems;
}

}  // namespace nsdp
