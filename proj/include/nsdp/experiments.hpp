#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsdp/config.hpp"

namespace nsdp {

enum class RunStatus { Pass, Fail, Inconclusive };

const char* to_string(RunStatus s);
/// 0 pass, 1 failure, 2 inconclusive statistics.
int exit_code(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::Fail;
    nlohmann::json report;
    std::filesystem::path out_dir;
};

/// Subcommand names accepted by run_experiment.
const std::vector<std::string>& subcommands();

/// Runs one subcommand. Writes manifest.json first (status "running"), then
/// the outputs under valuegrid/, paths/, reports/, and finally rewrites the
/// manifest with the outcome. `log` receives the human-readable summary.
RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir, std::ostream& log);

/// Compares two output directories. Refuses (throws) when their manifests carry
/// different fingerprints; otherwise lists the files whose bytes differ.
std::vector<std::string> compare_outputs(const std::filesystem::path& a,
                                         const std::filesystem::path& b);

}  // namespace nsdp
