#include "nsdp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>

#include "nsdp/cost_control.hpp"
#include "nsdp/hjb.hpp"
#include "nsdp/io.hpp"
#include "nsdp/parallel.hpp"
#include "nsdp/sde.hpp"

namespace nsdp {

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Pass: return "pass";
        case RunStatus::Fail: return "fail";
        case RunStatus::Inconclusive: return "inconclusive";
    }
    return "fail";
}

int exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::Pass: return 0;
        case RunStatus::Inconclusive: return 2;
        case RunStatus::Fail: return 1;
    }
    return 1;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"validate", "solve-hjb", "fk-check", "simulate",
                                                "dp-verify", "converge-m", "lq-oracle"};
    return names;
}

namespace {

namespace fs = std::filesystem;

struct Context {
    const ExperimentConfig& cfg;
    fs::path out;
    std::ostream& log;
    std::string subcommand;
    std::string fingerprint;

    json stamp() const {
        return {{"fingerprint", fingerprint}, {"seed", cfg.simulation.seed}, {"subcommand", subcommand}};
    }
    void report(const std::string& name, json body) const {
        body["fingerprint"] = fingerprint;
        body["seed"] = cfg.simulation.seed;
        write_json_file(out / "reports" / (name + ".json"), body);
    }
    void table(const std::string& name, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) const {
        write_text_file(out / "reports" / (name + ".csv"), csv_table(header, rows));
    }
};

json field_json(const SpectralField& x) { return x.values(); }

std::string short_num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

struct GridRun {
    ValueGrid value;
    GridSolveReport report;
    BoundsReport bounds;
};

GridRun solve_grid(const Context& c, const GalerkinSystem& sys, const CostSpec& cost) {
    GridRun g;
    g.value = solve_hjb_grid(sys, cost, SaturationBound(c.cfg.R), c.cfg.solver.T, c.cfg.solver.grid,
                             &g.report);
    g.bounds = assert_value_bounds(g.value, cost);
    json header = c.stamp();
    header["system"] = to_json(sys.hyp());
    header["cost"] = {{"running", to_json(cost.running)}, {"terminal", to_json(cost.terminal)}};
    header["grid"] = to_json(c.cfg.solver.grid);
    header["solver"] = to_json(g.report);
    write_value_grid(c.out / "valuegrid", "grid", g.value, header);
    c.log << "grid march: " << g.report.steps << " steps of dt=" << format_double(g.report.dt)
          << " (stable up to " << format_double(g.report.dt_max) << "), "
          << g.report.nonmonotone_events << " non-monotone node-steps\n";
    return g;
}

std::vector<SpectralField> probe_states(const ExperimentConfig& cfg, const BoxGrid& box) {
    std::vector<SpectralField> probes = cfg.probes(box.dims());
    if (!probes.empty()) return probes;
    for (double s : {-1.0, -0.5, 0.25, 0.6, 1.0}) {
        SpectralField x(box.dims());
        for (std::size_t k = 0; k < box.dims(); ++k) x[k] = s * 0.5 * box.half_width(k);
        probes.push_back(x);
    }
    return probes;
}

// ---------------------------------------------------------------- validate

RunStatus run_validate(const Context& c) {
    const GalerkinSystem sys = c.cfg.build_system();
    const HypothesisReport rep = validate_hypotheses(sys);
    json body = to_json(rep);
    body["bilinear_constant"] = estimate_bilinear_constant(sys, 10000, c.cfg.simulation.seed);
    body["oracle_mode"] = c.cfg.oracle_mode();
    c.report("validate", body);
    json descriptor = to_json(sys);
    descriptor["fingerprint"] = c.fingerprint;
    write_json_file(c.out / "reports" / "system.json", descriptor);

    c.log << "epsilon = " << format_double(rep.epsilon) << "\n";
    c.log << "r in (1, 3/2): " << (rep.r_in_range ? "yes" : "no") << "\n";
    c.log << "gamma > 1 - epsilon (" << format_double(rep.gamma_threshold)
          << "): " << (rep.gamma_ok ? "yes" : "no") << "\n";
    c.log << "trace summability (exponent " << format_double(rep.trace_exponent) << " < "
          << format_double(rep.summability_threshold) << "): " << (rep.summable ? "yes" : "no") << "\n";
    for (const auto& v : rep.violations) c.log << "violation: " << v << "\n";
    return rep.passed ? RunStatus::Pass : RunStatus::Fail;
}

// ---------------------------------------------------------------- solve-hjb

RunStatus run_solve(const Context& c) {
    const GalerkinSystem sys = c.cfg.build_system();
    const CostSpec cost = c.cfg.build_cost(sys);
    const GridRun g = solve_grid(c, sys, cost);
    json body;
    body["grid"] = to_json(g.report);
    body["bounds"] = to_json(g.bounds);
    RunStatus status = (!g.bounds.applicable || g.bounds.holds) ? RunStatus::Pass : RunStatus::Fail;
    c.log << "value bounds: "
          << (!g.bounds.applicable ? "not applicable" : g.bounds.holds ? "hold" : "VIOLATED")
          << " (worst slack " << format_double(g.bounds.worst_slack) << ")\n";

    if (c.cfg.solver.mild) {
        try {
            const MildSolveResult mild = solve_hjb_mild(sys, cost, SaturationBound(c.cfg.R),
                                                        c.cfg.solver.T, c.cfg.solver.grid,
                                                        c.cfg.solver.picard);
            json header = c.stamp();
            header["picard"] = {{"iterations", mild.iterations},
                                {"residual_history", mild.residual_history}};
            write_value_grid(c.out / "valuegrid", "mild", mild.value, header);
            double gap = 0.0;
            const std::size_t last = g.value.slice_count() - 1;
            const auto a = g.value.slice(last);
            const auto b = mild.value.slice(last);
            for (std::size_t node = 0; node < a.size(); ++node) gap = std::max(gap, std::abs(a[node] - b[node]));
            body["mild"] = {{"iterations", mild.iterations},
                            {"residual_history", mild.residual_history},
                            {"monotone_contraction", mild.monotone_contraction},
                            {"max_gap_to_grid_at_T", gap}};
            c.log << "mild solver: " << mild.iterations << " Picard iterations, max |grid - mild| at T = "
                  << format_double(gap) << "\n";
        } catch (const PicardDivergence& e) {
            body["mild"] = {{"error", e.what()}, {"residual_history", e.residual_history()}};
            c.log << e.what() << "\n";
            status = RunStatus::Fail;
        }
    }
    c.report("solve-hjb", body);
    return status;
}

// ---------------------------------------------------------------- fk-check

RunStatus run_fk(const Context& c) {
    const GalerkinSystem sys = c.cfg.build_system();
    const CostSpec cost = c.cfg.build_cost(sys);
    const SaturationBound R(c.cfg.R);
    const GridRun g = solve_grid(c, sys, cost);
    const MildSolveResult mild =
        solve_hjb_mild(sys, cost, R, c.cfg.solver.T, c.cfg.solver.grid, c.cfg.solver.picard);
    const GradientField grad = gradient(g.value);
    const std::vector<SpectralField> probes = probe_states(c.cfg, g.value.box());
    const double K = c.cfg.solver.K ? *c.cfg.solver.K
                                    : default_killing_rate(sys, grad, probes, c.cfg.simulation.seed);
    const double t = c.cfg.solver.probe_time < 0.0 ? c.cfg.solver.T : c.cfg.solver.probe_time;
    const MonteCarloSpec mc{c.cfg.solver.fk_paths, c.cfg.solver.fk_dt, c.cfg.simulation.seed};

    RunStatus status = RunStatus::Pass;
    json rows = json::array();
    std::vector<std::vector<double>> table;
    c.log << "probe (x_1)      grid        mild        feynman-kac (se)\n";
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const double ug = g.value.value_at(t, probes[i]);
        const double um = mild.value.value_at(t, probes[i]);
        const Estimate fk = feynman_kac_value(sys, cost, R, K, t, probes[i], mc, g.value, grad);
        const double tol_gm = 0.03 * std::max(std::abs(ug), std::abs(um));
        const double tol_gf = std::max(4.0 * fk.std_error, 0.03 * std::max(std::abs(ug), std::abs(fk.value)));
        const double tol_mf = std::max(4.0 * fk.std_error, 0.03 * std::max(std::abs(um), std::abs(fk.value)));
        const bool ok = std::abs(ug - um) <= tol_gm && std::abs(ug - fk.value) <= tol_gf &&
                        std::abs(um - fk.value) <= tol_mf;
        if (!ok) status = RunStatus::Fail;
        rows.push_back({{"x", field_json(probes[i])},
                        {"grid", ug},
                        {"mild", um},
                        {"feynman_kac", fk.value},
                        {"feynman_kac_se", fk.std_error},
                        {"agree", ok}});
        std::vector<double> row(probes[i].values());
        row.insert(row.end(), {ug, um, fk.value, fk.std_error, ok ? 1.0 : 0.0});
        table.push_back(row);
        c.log << std::left << std::setw(17) << short_num(probes[i][0]) << std::setw(12) << short_num(ug)
              << std::setw(12) << short_num(um) << short_num(fk.value) << " (" << short_num(fk.std_error)
              << ")" << (ok ? "" : "  MISMATCH") << std::right << "\n";
    }
    std::vector<std::string> header;
    for (std::size_t k = 0; k < sys.dim(); ++k) header.push_back("x_" + std::to_string(k + 1));
    header.insert(header.end(), {"grid", "mild", "feynman_kac", "feynman_kac_se", "agree"});
    c.table("fk-check", header, table);
    c.report("fk-check", {{"t", t},
                          {"K", K},
                          {"n_paths", mc.n_paths},
                          {"dt", mc.dt},
                          {"picard_iterations", mild.iterations},
                          {"probes", rows},
                          {"status", to_string(status)}});
    return status;
}

// ---------------------------------------------------------------- simulate

RunStatus run_simulate(const Context& c) {
    const GalerkinSystem sys = c.cfg.build_system();
    const CostSpec cost = c.cfg.build_cost(sys);
    const SaturationBound R(c.cfg.R);
    const IntegratorSpec integ = c.cfg.integrator();
    const SpectralField x0 = c.cfg.x0(sys.dim());
    const auto& sim = c.cfg.simulation;

    const bool needs_grid = sim.mode == "closed_loop" || sim.policy == "perturbed_feedback";
    GridRun g;
    GradientField grad;
    if (needs_grid) {
        g = solve_grid(c, sys, cost);
        grad = gradient(g.value);
    }
    Policy policy;
    std::string policy_name;
    if (sim.mode == "closed_loop") {
        policy = feedback_policy(sys, grad, R, integ.T);
        policy_name = "feedback";
    } else if (sim.policy == "zero") {
        policy = zero_policy(sys.dim()).policy;
        policy_name = "zero";
    } else if (sim.policy == "random") {
        policy = random_ball_policy(sys.dim(), R).policy;
        policy_name = "random";
    } else if (sim.policy == "constant") {
        policy = constant_policy(sim.constant_control.empty() ? SpectralField(sys.dim())
                                                              : SpectralField(sim.constant_control))
                     .policy;
        policy_name = "constant";
    } else {
        policy = perturbed_feedback_policy(sys, grad, R, integ.T, sim.perturb_scale).policy;
        policy_name = "perturbed_feedback";
    }

    const PathEnsemble ens = simulate_controlled(sys, policy, R, x0, integ, sim.n_paths, sim.seed, &cost);
    write_text_file(c.out / "paths" / "paths.csv", paths_csv(ens, cost, sim.dump_paths));
    const EnergyReport energy = energy_estimate(ens, sys);
    const CostReport costs = estimate_cost(ens, cost);
    json body{{"policy", policy_name},
              {"scheme", to_string(integ.scheme)},
              {"dt", integ.dt},
              {"T", integ.T},
              {"n_paths", ens.n_paths},
              {"excluded_paths", ens.excluded_count()},
              {"clipped_controls", ens.clipped_controls},
              {"excursions", ens.excursions},
              {"max_control_norm", ens.max_control_norm()},
              {"energy", to_json(energy)},
              {"cost", to_json(costs)}};
    body["cost"]["fingerprint"] = c.fingerprint;
    try {
        const MeanEstimate th = theta_delta_diagnostic(ens, sys, sim.theta_delta);
        body["theta_delta"] = {{"delta", sim.theta_delta},
                               {"theta", theta_of_delta(sim.theta_delta)},
                               {"estimate", to_json(th)}};
    } catch (const std::invalid_argument& e) {
        body["theta_delta"] = {{"delta", sim.theta_delta}, {"error", e.what()}};
    }
    c.report("simulate", body);
    c.log << "paths: " << ens.n_paths << " (" << ens.excluded_count() << " excluded), c_emp = "
          << format_double(energy.c_emp) << ", J = " << format_double(costs.J_estimate) << " ("
          << format_double(costs.std_error) << ")\n";
    const bool ok = ens.excluded_count() == 0 && ens.max_control_norm() <= R.value();
    return ok ? RunStatus::Pass : RunStatus::Fail;
}

// ---------------------------------------------------------------- dp-verify

RunStatus run_dp(const Context& c) {
    const GalerkinSystem sys = c.cfg.build_system();
    const CostSpec cost = c.cfg.build_cost(sys);
    const SaturationBound R(c.cfg.R);
    const IntegratorSpec integ = c.cfg.integrator();
    const SpectralField x0 = c.cfg.x0(sys.dim());
    const auto& sim = c.cfg.simulation;

    const GridRun g = solve_grid(c, sys, cost);
    const GradientField grad = gradient(g.value);
    const DiscretizationBudget budget =
        discretization_budget(sys, cost, R, c.cfg.solver.T, c.cfg.solver.grid, x0);

    std::vector<NamedPolicy> alternatives;
    for (const auto& name : sim.alternatives) {
        if (name == "zero") {
            alternatives.push_back(zero_policy(sys.dim()));
        } else if (name == "random") {
            alternatives.push_back(random_ball_policy(sys.dim(), R));
        } else if (name == "constant") {
            alternatives.push_back(constant_policy(sim.constant_control.empty()
                                                       ? SpectralField(sys.dim())
                                                       : SpectralField(sim.constant_control)));
        } else {
            alternatives.push_back(perturbed_feedback_policy(sys, grad, R, integ.T, sim.perturb_scale));
        }
    }
    DPReport rep = dp_verify(sys, cost, g.value, R, x0, integ, sim.n_paths, alternatives, sim.seed,
                             budget.eps_disc, sim.level);
    rep.feedback.fingerprint = c.fingerprint;
    for (auto& a : rep.alternatives) a.cost.fingerprint = c.fingerprint;

    json body = to_json(rep);
    body["discretization"] = {{"u_h", budget.u_h}, {"u_h2", budget.u_h2}, {"u_dt2", budget.u_dt2},
                              {"space_delta", budget.space_delta}, {"time_delta", budget.time_delta},
                              {"eps_disc", budget.eps_disc}};
    body["bounds"] = to_json(g.bounds);
    c.report("dp-verify", body);

    std::vector<std::vector<double>> table;
    table.push_back({rep.feedback.J_estimate, rep.feedback.std_error, 0.0, 0.0, 0.0});
    c.log << "u(T, x0) = " << format_double(rep.u_T_x0) << "\n";
    c.log << std::left << std::setw(12) << "policy" << std::setw(14) << "J" << std::setw(14) << "se"
          << "99% interval of J - J(z*)    verdict\n";
    c.log << std::setw(12) << "feedback" << std::setw(14) << short_num(rep.feedback.J_estimate)
          << std::setw(14) << short_num(rep.feedback.std_error) << "\n";
    for (const auto& a : rep.alternatives) {
        const std::string interval =
            "[" + short_num(a.test.interval.lower) + ", " + short_num(a.test.interval.upper) + "]";
        c.log << std::setw(12) << a.name << std::setw(14) << short_num(a.cost.J_estimate) << std::setw(14)
              << short_num(a.cost.std_error) << std::setw(29) << interval << to_string(a.test.verdict) << "\n";
        table.push_back({a.cost.J_estimate, a.cost.std_error, a.test.interval.lower, a.test.interval.upper,
                         a.test.verdict == Verdict::Pass ? 1.0 : a.test.verdict == Verdict::Fail ? -1.0 : 0.0});
    }
    c.log << std::right;
    c.log << "|u(T,x0) - J(z*)| = " << format_double(rep.identity_gap) << " <= max(4 se, eps_disc) = "
          << format_double(rep.identity_tolerance) << ": " << (rep.identity_holds ? "yes" : "NO") << "\n";
    c.log << "verdict: " << to_string(rep.verdict) << "\n";
    c.table("dp-verify", {"J", "std_error", "diff_lower", "diff_upper", "verdict"}, table);

    switch (rep.verdict) {
        case Verdict::Pass: return RunStatus::Pass;
        case Verdict::Inconclusive: return RunStatus::Inconclusive;
        case Verdict::Fail: return RunStatus::Fail;
    }
    return RunStatus::Fail;
}

// ---------------------------------------------------------------- converge-m

RunStatus run_converge(const Context& c) {
    const auto& cfg = c.cfg;
    const SaturationBound R(cfg.R);
    const IntegratorSpec integ = cfg.integrator();
    const SimulationOptions opts{true};
    json rows = json::array();
    std::vector<std::vector<double>> table;
    RunStatus status = RunStatus::Pass;
    for (std::size_t m : cfg.converge.m_list) {
        const GalerkinSystem sys = cfg.build_system(m);
        const CostSpec cost = cfg.build_cost(sys);
        const SpectralField x0 = cfg.x0(m);
        json row{{"m", m}};
        double u_grid = std::nan(""), u_ric = std::nan("");
        if (m <= 3) {
            GridSpec grid = cfg.solver.grid;
            if (grid.half_widths.size() != m) grid.half_widths.clear();
            const ValueGrid v = solve_hjb_grid(sys, cost, R, cfg.solver.T, grid);
            u_grid = v.value_at(cfg.solver.T, x0);
            row["u_grid"] = u_grid;
        }
        if (cfg.oracle_mode() && !sys.bilinear_enabled()) {
            const RiccatiSolution ric(sys, cost.running.matrix(), cost.terminal.matrix(), cfg.solver.T);
            u_ric = ric.value(cfg.solver.T, x0);
            row["u_riccati"] = u_ric;
        }
        const PathEnsemble ens = simulate_controlled(sys, zero_policy(m).policy, R, x0, integ,
                                                     cfg.simulation.n_paths, cfg.simulation.seed, &cost, opts);
        const CostReport j0 = estimate_cost(ens, cost);
        const EnergyReport energy = energy_estimate(ens, sys);
        double theta = std::nan("");
        try {
            theta = theta_delta_diagnostic(ens, sys, cfg.simulation.theta_delta).mean;
        } catch (const std::invalid_argument&) {
        }
        if (ens.excluded_count() > 0) status = RunStatus::Fail;
        row["J_zero"] = to_json(j0);
        row["energy"] = to_json(energy);
        row["theta_delta"] = theta;
        row["excluded_paths"] = ens.excluded_count();
        rows.push_back(row);
        table.push_back({static_cast<double>(m), u_grid, u_ric, j0.J_estimate, j0.std_error, energy.c_emp, theta});
        c.log << "m = " << m << ": J(0) = " << format_double(j0.J_estimate) << ", c_emp = "
              << format_double(energy.c_emp) << ", theta = " << format_double(theta);
        if (m <= 3) c.log << ", u_grid = " << format_double(u_grid);
        if (!std::isnan(u_ric)) c.log << ", u_riccati = " << format_double(u_ric);
        c.log << "\n";
    }
    c.table("converge-m", {"m", "u_grid", "u_riccati", "J_zero", "J_zero_se", "c_emp", "theta_delta"}, table);
    c.report("converge-m", {{"rows", rows}, {"T", cfg.solver.T}});
    return status;
}

// ---------------------------------------------------------------- lq-oracle

RunStatus run_lq(const Context& c) {
    const GalerkinSystem sys = c.cfg.build_system();
    const CostSpec cost = c.cfg.build_cost(sys);
    const SaturationBound R(c.cfg.R);
    const double T = c.cfg.solver.T;
    const RiccatiSolution ric(sys, cost.running.matrix(), cost.terminal.matrix(), T);
    const GridRun g = solve_grid(c, sys, cost);
    const MildSolveResult mild = solve_hjb_mild(sys, cost, R, T, c.cfg.solver.grid, c.cfg.solver.picard);
    const BoxGrid& box = g.value.box();

    // Interior nodes: |x_k| <= L_k / 2, on the slices at T/2 and T.
    std::vector<std::size_t> slices{g.value.slice_count() / 2, g.value.slice_count() - 1};
    double err_grid = 0.0, err_mild = 0.0;
    std::vector<std::vector<double>> table;
    for (std::size_t s : slices) {
        const double t = g.value.times()[s];
        for (std::size_t node = 0; node < box.node_count(); ++node) {
            const SpectralField x = box.node_point(node);
            bool interior = true;
            for (std::size_t k = 0; k < x.dim(); ++k) interior = interior && std::abs(x[k]) <= 0.5 * box.half_width(k) + 1e-12;
            if (!interior) continue;
            const double ur = ric.value(t, x);
            const double ug = g.value.slice(s)[node];
            const double um = mild.value.slice(s)[node];
            err_grid = std::max(err_grid, std::abs(ug - ur) / std::abs(ur));
            err_mild = std::max(err_mild, std::abs(um - ug) / std::abs(ug));
            std::vector<double> row{t};
            row.insert(row.end(), x.values().begin(), x.values().end());
            row.insert(row.end(), {ur, ug, um});
            table.push_back(row);
        }
    }
    std::vector<std::string> header{"t"};
    for (std::size_t k = 0; k < sys.dim(); ++k) header.push_back("x_" + std::to_string(k + 1));
    header.insert(header.end(), {"riccati", "grid", "mild"});
    c.table("lq-oracle", header, table);

    const IntegratorSpec integ = c.cfg.integrator();
    const SpectralField x0 = c.cfg.x0(sys.dim());
    const PathEnsemble ens = simulate_closed_loop(sys, g.value, R, x0, integ, c.cfg.simulation.n_paths,
                                                  c.cfg.simulation.seed, &cost, SimulationOptions{false});
    CostReport J = estimate_cost(ens, cost);
    J.fingerprint = c.fingerprint;
    const double J_oracle = ric.value(T, x0);
    const bool grid_ok = err_grid <= 1e-2;
    const bool mild_ok = err_mild <= 2e-2;
    const bool cost_ok = std::abs(J.J_estimate - J_oracle) <= 4.0 * J.std_error;

    c.report("lq-oracle", {{"max_rel_error_grid_vs_riccati", err_grid},
                           {"max_rel_error_mild_vs_grid", err_mild},
                           {"picard_iterations", mild.iterations},
                           {"closed_loop_cost", to_json(J)},
                           {"riccati_cost", J_oracle},
                           {"P_T", ric.P(T)},
                           {"rho_T", ric.rho(T)},
                           {"grid_ok", grid_ok},
                           {"mild_ok", mild_ok},
                           {"cost_ok", cost_ok}});
    c.log << "max relative error grid vs Riccati: " << format_double(err_grid) << (grid_ok ? "" : "  FAIL") << "\n";
    c.log << "max relative error mild vs grid:    " << format_double(err_mild) << (mild_ok ? "" : "  FAIL") << "\n";
    c.log << "closed-loop J = " << format_double(J.J_estimate) << " (" << format_double(J.std_error)
          << "), Riccati J = " << format_double(J_oracle) << (cost_ok ? "" : "  FAIL") << "\n";
    return grid_ok && mild_ok && cost_ok ? RunStatus::Pass : RunStatus::Fail;
}

json manifest(const Context& c, const std::string& status) {
    return {{"subcommand", c.subcommand},
            {"fingerprint", c.fingerprint},
            {"seed", c.cfg.simulation.seed},
            {"status", status},
            {"config", c.cfg.to_json()}};
}

}  // namespace

RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& cfg,
                         const fs::path& out_dir, std::ostream& log) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
        throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
    }
    const std::vector<std::string> problems = preflight(cfg, subcommand);
    if (!problems.empty()) throw ConfigError(problems);

    Context c{cfg, out_dir, log, subcommand, cfg.fingerprint()};
    for (const char* sub : {"valuegrid", "paths", "reports"}) fs::create_directories(out_dir / sub);
    write_json_file(out_dir / "manifest.json", manifest(c, "running"));
    log << subcommand << " [fingerprint " << c.fingerprint << ", seed " << cfg.simulation.seed << "]\n";

    RunResult result;
    result.out_dir = out_dir;
    try {
        if (subcommand == "validate") {
            result.status = run_validate(c);
        } else if (subcommand == "solve-hjb") {
            result.status = run_solve(c);
        } else if (subcommand == "fk-check") {
            result.status = run_fk(c);
        } else if (subcommand == "simulate") {
            result.status = run_simulate(c);
        } else if (subcommand == "dp-verify") {
            result.status = run_dp(c);
        } else if (subcommand == "converge-m") {
            result.status = run_converge(c);
        } else {
            result.status = run_lq(c);
        }
    } catch (const std::exception& e) {
        json m = manifest(c, "error");
        m["error"] = e.what();
        write_json_file(out_dir / "manifest.json", m);
        throw;
    }
    const fs::path report = out_dir / "reports" / (subcommand + ".json");
    if (fs::exists(report)) {
        std::ifstream in(report);
        result.report = json::parse(in);
    }
    write_json_file(out_dir / "manifest.json", manifest(c, to_string(result.status)));
    log << "status: " << to_string(result.status) << "\n";
    return result;
}

std::vector<std::string> compare_outputs(const fs::path& a, const fs::path& b) {
    auto read = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    const json ma = json::parse(read(a / "manifest.json"));
    const json mb = json::parse(read(b / "manifest.json"));
    if (ma.at("fingerprint") != mb.at("fingerprint")) {
        throw std::runtime_error("refusing to compare outputs with different fingerprints (" +
                                 ma.at("fingerprint").get<std::string>() + " vs " +
                                 mb.at("fingerprint").get<std::string>() + ")");
    }
    std::vector<std::string> rel;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a).generic_string());
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), b).generic_string());
    }
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
    std::vector<std::string> differing;
    for (const auto& r : rel) {
        if (!fs::exists(a / r) || !fs::exists(b / r) || read(a / r) != read(b / r)) differing.push_back(r);
    }
    return differing;
}

}  // namespace nsdp
