#include "nsdp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nsdp {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fingerprint_of(const json& j) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(j.dump());
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

json to_json(const HypothesisParams& h) {
    return {{"g", h.g}, {"r", h.r}, {"gamma", h.gamma}, {"epsilon", h.epsilon()}};
}

json to_json(const GalerkinSystem& sys) {
    json j;
    j["m"] = sys.dim();
    j["space_dim"] = sys.space_dim();
    j["hypothesis"] = to_json(sys.hyp());
    j["bilinear"] = sys.bilinear_enabled();
    j["noise"] = sys.noise_enabled();
    j["lambdas"] = sys.lambdas();
    j["q_spectrum"] = sys.q_spectrum();
    j["control_spectrum"] = sys.control_spectrum();
    j["curl_weights"] = sys.curl_weights();
    json modes = json::array();
    for (const auto& mode : sys.modes()) {
        modes.push_back({{"wavevector", mode.wavevector},
                         {"polarization", mode.polarization},
                         {"phase", mode.phase == TorusMode::Phase::Cos ? "cos" : "sin"},
                         {"lambda", mode.lambda}});
    }
    j["modes"] = modes;
    json tensor = json::array();
    const std::size_t m = sys.dim();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b < m; ++b) {
                const double v = sys.tensor(i, a, b);
                if (v != 0.0) tensor.push_back(json::array({i, a, b, v}));
            }
        }
    }
    j["tensor"] = tensor;
    return j;
}

json to_json(const HypothesisReport& r) {
    return {{"passed", r.passed},
            {"violations", r.violations},
            {"epsilon", r.epsilon},
            {"r_in_range", r.r_in_range},
            {"gamma_ok", r.gamma_ok},
            {"gamma_threshold", r.gamma_threshold},
            {"trace_partial_sums", r.trace_partial_sums},
            {"trace_exponent", r.trace_exponent},
            {"summability_threshold", r.summability_threshold},
            {"tail_decreasing", r.tail_decreasing},
            {"summable", r.summable},
            {"q_inverse_identity_error", r.q_inverse_identity_error}};
}

json to_json(const CostTerm& c) {
    json j{{"kind", to_string(c.kind())}, {"scale", c.scale()}, {"shift", c.shift()}};
    if (c.kind() == CostKind::Quadratic) {
        j["matrix"] = c.matrix();
    } else {
        j["parameter"] = c.parameter();
        j["sup"] = c.sup();
    }
    return j;
}

json to_json(const GridSpec& g) {
    return {{"points_per_axis", g.points_per_axis},
            {"half_widths", g.half_widths},
            {"box_sigmas", g.box_sigmas},
            {"dt", g.dt},
            {"cfl_safety", g.cfl_safety},
            {"time_slices", g.time_slices},
            {"drift", to_string(g.drift)}};
}

json to_json(const GridSolveReport& r) {
    return {{"dt_max", r.dt_max}, {"dt", r.dt}, {"steps", r.steps},
            {"nonmonotone_events", r.nonmonotone_events}};
}

json to_json(const BoundsReport& r) {
    return {{"applicable", r.applicable}, {"holds", r.holds}, {"worst_slack", r.worst_slack},
            {"violations", r.violations}, {"worst_slice", r.worst_slice},
            {"worst_node", r.worst_node}, {"worst_value", r.worst_value}};
}

json to_json(const MeanEstimate& e) { return {{"mean", e.mean}, {"std_error", e.std_error}}; }

json to_json(const EnergyReport& r) {
    return {{"E_sup_sq", to_json(r.sup_sq)}, {"E_int_V", to_json(r.int_v)},
            {"bound_rhs", r.bound_rhs}, {"c_emp", r.c_emp}, {"used_paths", r.used_paths}};
}

json to_json(const CostReport& r) {
    return {{"J_estimate", r.J_estimate},
            {"std_error", r.std_error},
            {"terms", {{"running_state", to_json(r.running_state)},
                       {"running_control", to_json(r.running_control)},
                       {"terminal", to_json(r.terminal)}}},
            {"n_paths", r.n_paths},
            {"excluded", r.excluded},
            {"excluded_fraction", r.excluded_fraction},
            {"fingerprint", r.fingerprint}};
}

json to_json(const WelchComparison& w) {
    return {{"difference", w.difference}, {"std_error", w.std_error}, {"dof", w.dof},
            {"interval", {w.interval.lower, w.interval.upper}}, {"verdict", to_string(w.verdict)}};
}

json to_json(const DPReport& r) {
    json alts = json::array();
    for (const auto& a : r.alternatives) {
        alts.push_back({{"name", a.name}, {"seed", a.seed}, {"cost", to_json(a.cost)},
                        {"comparison", to_json(a.test)}});
    }
    return {{"u_T_x0", r.u_T_x0},
            {"seed", r.seed},
            {"feedback_seed", r.feedback_seed},
            {"feedback", to_json(r.feedback)},
            {"alternatives", alts},
            {"level", r.level},
            {"identity_gap", r.identity_gap},
            {"eps_disc", r.eps_disc},
            {"identity_tolerance", r.identity_tolerance},
            {"identity_holds", r.identity_holds},
            {"excursions", r.excursions},
            {"verdict", to_string(r.verdict)}};
}

namespace {

void append_row(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
}

}  // namespace

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    append_row(out, header);
    for (const auto& row : rows) {
        std::vector<std::string> cells;
        cells.reserve(row.size());
        for (double v : row) cells.push_back(format_double(v));
        append_row(out, cells);
    }
    return out;
}

std::string value_grid_csv(const ValueGrid& v) {
    const std::size_t m = v.dims();
    const GradientField g = gradient(v);
    std::vector<std::string> header{"t"};
    for (std::size_t k = 0; k < m; ++k) header.push_back("i_" + std::to_string(k + 1));
    header.push_back("u");
    for (std::size_t k = 0; k < m; ++k) header.push_back("du_" + std::to_string(k + 1));
    std::string out;
    append_row(out, header);
    std::vector<std::string> cells;
    for (std::size_t s = 0; s < v.slice_count(); ++s) {
        const auto u = v.slice(s);
        for (std::size_t node = 0; node < v.box().node_count(); ++node) {
            cells.clear();
            cells.push_back(format_double(v.times()[s]));
            for (std::size_t k = 0; k < m; ++k) cells.push_back(std::to_string(v.box().axis_index(node, k)));
            cells.push_back(format_double(u[node]));
            for (std::size_t k = 0; k < m; ++k) cells.push_back(format_double(g.component(s, k)[node]));
            append_row(out, cells);
        }
    }
    return out;
}

void write_value_grid(const std::filesystem::path& dir, const std::string& stem,
                      const ValueGrid& v, const json& header) {
    json h = header;
    h["dims"] = v.dims();
    h["points_per_axis"] = v.box().points_per_axis();
    h["half_widths"] = v.box().half_widths();
    h["times"] = v.times();
    h["march_dt"] = v.march_dt;
    h["march_steps"] = v.march_steps;
    h["drift"] = to_string(v.drift);
    write_json_file(dir / (stem + ".json"), h);
    write_text_file(dir / (stem + ".csv"), value_grid_csv(v));
}

std::string paths_csv(const PathEnsemble& ens, const CostSpec& cost, std::size_t max_paths) {
    if (!ens.recorded) throw std::invalid_argument("paths_csv: paths were not recorded");
    const std::size_t m = ens.dims;
    std::vector<std::string> header{"path", "t"};
    for (std::size_t k = 0; k < m; ++k) header.push_back("X_" + std::to_string(k + 1));
    for (std::size_t k = 0; k < m; ++k) header.push_back("z_" + std::to_string(k + 1));
    header.push_back("running_cost");
    std::string out;
    append_row(out, header);
    std::vector<std::string> cells;
    std::size_t written = 0;
    for (std::size_t p = 0; p < ens.n_paths && written < max_paths; ++p) {
        if (ens.excluded[p]) continue;
        ++written;
        double acc = 0.0;
        double prev = 0.0;
        for (std::size_t n = 0; n < ens.times.size(); ++n) {
            const SpectralField x = ens.state(p, n);
            const SpectralField z = ens.control(p, n);
            const double f = cost.running(x) + 0.5 * norm_sq(z);
            if (n > 0) acc += 0.5 * (ens.times[n] - ens.times[n - 1]) * (prev + f);
            prev = f;
            cells.clear();
            cells.push_back(std::to_string(p));
            cells.push_back(format_double(ens.times[n]));
            for (std::size_t k = 0; k < m; ++k) cells.push_back(format_double(x[k]));
            for (std::size_t k = 0; k < m; ++k) cells.push_back(format_double(z[k]));
            cells.push_back(format_double(acc));
            append_row(out, cells);
        }
    }
    return out;
}

}  // namespace nsdp
