#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsdp/config.hpp"
#include "nsdp/experiments.hpp"
#include "nsdp/io.hpp"

using namespace nsdp;
namespace fs = std::filesystem;

namespace {

json load(const std::string& name) {
    std::ifstream in(fs::path(NSDP_CONFIG_DIR) / name);
    return json::parse(in);
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nsdp_unit_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(csv_table({"a", "b"}, {{1.0, 0.5}}) == "a,b\n1,0.5\n");
}

TEST_CASE("all shipped configs parse") {
    for (const char* name : {"default.json", "lq.json", "energy3d.json", "broken_gamma.json"}) {
        CAPTURE(name);
        CHECK_NOTHROW(parse_config(load(name)));
    }
}

TEST_CASE("every problem is reported at once") {
    json j = load("default.json");
    j["solver"]["tiem_slices"] = 3;
    j["system"]["r"] = 1.7;
    j["control"]["R"] = -1.0;
    j["colour"] = "blue";
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const auto& p = e.problems();
        CHECK(p.size() >= 4);
        const auto has = [&](const std::string& s) {
            return std::any_of(p.begin(), p.end(), [&](const std::string& q) { return q.find(s) != std::string::npos; });
        };
        CHECK(has("solver.tiem_slices"));
        CHECK(has("colour"));
        CHECK(has("system.r"));
        CHECK(has("control.R"));
    }
}

TEST_CASE("fingerprint tracks content but not the worker count") {
    ExperimentConfig a = parse_config(load("default.json"));
    ExperimentConfig b = a;
    b.simulation.threads = 7;
    CHECK(a.fingerprint() == b.fingerprint());
    b.simulation.seed += 1;
    CHECK(a.fingerprint() != b.fingerprint());
    CHECK(a.fingerprint().size() == 16);
    // Canonical dump: re-parsing the dump reproduces the fingerprint.
    json dumped = a.to_json();
    CHECK(parse_config(dumped).fingerprint() == a.fingerprint());
}

TEST_CASE("preflight catches cross-module problems") {
    ExperimentConfig cfg = parse_config(load("default.json"));
    CHECK(preflight(cfg, "dp-verify").empty());
    cfg.system.m = 5;
    cfg.simulation.x0.clear();
    cfg.solver.probes.clear();
    CHECK_FALSE(preflight(cfg, "solve-hjb").empty());
    // The closed loop reads its feedback from a grid; the open loop does not.
    CHECK_FALSE(preflight(cfg, "simulate").empty());
    cfg.simulation.mode = "open_loop";
    CHECK(preflight(cfg, "simulate").empty());

    ExperimentConfig broken = parse_config(load("broken_gamma.json"));
    CHECK(preflight(broken, "validate").empty());
    const auto p = preflight(broken, "dp-verify");
    REQUIRE(p.size() == 1);
    CHECK(p[0].find("gamma_smoothing") != std::string::npos);

    ExperimentConfig fast = parse_config(load("default.json"));
    fast.solver.grid.dt = 1.0;
    const auto q = preflight(fast, "solve-hjb");
    REQUIRE(q.size() == 1);
    CHECK(q[0].find("dt") != std::string::npos);
}

TEST_CASE("lq configs need quadratic costs and no nonlinearity") {
    ExperimentConfig cfg = parse_config(load("default.json"));
    CHECK_FALSE(preflight(cfg, "lq-oracle").empty());
    CHECK(preflight(parse_config(load("lq.json")), "lq-oracle").empty());
}

TEST_CASE("runs write a manifest and reproducible outputs") {
    ExperimentConfig cfg = parse_config(load("default.json"));
    cfg.simulation.n_paths = 50;
    cfg.solver.mild = false;
    std::ostringstream log;
    const fs::path a = scratch("a"), b = scratch("b"), c = scratch("c");
    const RunResult ra = run_experiment("simulate", cfg, a, log);
    run_experiment("simulate", cfg, b, log);
    CHECK(ra.status == RunStatus::Pass);
    CHECK(fs::exists(a / "manifest.json"));
    CHECK(fs::exists(a / "paths" / "paths.csv"));
    CHECK(fs::exists(a / "valuegrid" / "grid.csv"));
    CHECK(ra.report.at("fingerprint") == cfg.fingerprint());
    CHECK(compare_outputs(a, b).empty());

    std::ifstream m(a / "manifest.json");
    const json manifest = json::parse(m);
    CHECK(manifest.at("status") == "pass");
    CHECK(manifest.at("seed") == cfg.simulation.seed);

    ExperimentConfig other = cfg;
    other.simulation.seed += 1;
    run_experiment("simulate", other, c, log);
    CHECK_THROWS(compare_outputs(a, c));

    CHECK_THROWS(run_experiment("solve", cfg, c, log));
    CHECK(exit_code(RunStatus::Inconclusive) == 2);
    CHECK(exit_code(RunStatus::Fail) == 1);
    CHECK(exit_code(RunStatus::Pass) == 0);
}

TEST_CASE("a rejected run leaves no outputs behind") {
    ExperimentConfig broken = parse_config(load("broken_gamma.json"));
    std::ostringstream log;
    const fs::path d = scratch("broken");
    CHECK_THROWS_AS(run_experiment("solve-hjb", broken, d, log), ConfigError);
    CHECK_FALSE(fs::exists(d / "manifest.json"));
}

TEST_CASE("a failing run records the error in the manifest") {
    ExperimentConfig cfg = parse_config(load("default.json"));
    cfg.solver.mild = true;
    cfg.solver.picard.max_iter = 1;
    cfg.solver.picard.tol = 1e-15;
    std::ostringstream log;
    const fs::path d = scratch("diverge");
    const RunResult r = run_experiment("solve-hjb", cfg, d, log);
    CHECK(r.status == RunStatus::Fail);
    CHECK(r.report.at("mild").contains("error"));
}
