#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nsdp/cost.hpp"
#include "nsdp/cost_control.hpp"
#include "nsdp/galerkin.hpp"
#include "nsdp/hjb.hpp"
#include "nsdp/sde.hpp"
#include "nsdp/value_grid.hpp"

namespace nsdp {

using json = nlohmann::json;

/// Shortest round-trip decimal form with '.' separator, locale independent.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 hex digits of FNV-1a over the compact dump of `j` (object keys sorted).
std::string fingerprint_of(const json& j);

/// Writes bytes verbatim (LF endings preserved), creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// Pretty JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);

json to_json(const HypothesisParams& h);
json to_json(const GalerkinSystem& sys);
json to_json(const HypothesisReport& r);
json to_json(const CostTerm& c);
json to_json(const GridSpec& g);
json to_json(const GridSolveReport& r);
json to_json(const BoundsReport& r);
json to_json(const MeanEstimate& e);
json to_json(const EnergyReport& r);
json to_json(const CostReport& r);
json to_json(const WelchComparison& w);
json to_json(const DPReport& r);

/// CSV body of a value grid: t, i_1..i_m, u, du_1..du_m.
std::string value_grid_csv(const ValueGrid& v);
/// Writes <stem>.json (header plus `header`) and <stem>.csv.
void write_value_grid(const std::filesystem::path& dir, const std::string& stem,
                      const ValueGrid& v, const json& header);

/// Path dump: path, t, X_1..X_m, z_1..z_m, running_cost (cumulative trapezoid).
/// Excluded paths are skipped. At most `max_paths` paths are written.
std::string paths_csv(const PathEnsemble& ens, const CostSpec& cost, std::size_t max_paths);

/// Generic CSV from a header and rows of numbers.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace nsdp
