#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "lebopt/analysis.hpp"
#include "lebopt/optimizer.hpp"

namespace lebopt {

inline constexpr int kSchemaVersion = 1;

std::string build_identifier();

nlohmann::json config_to_json(const OptimConfig& cfg);
OptimConfig config_from_json(const nlohmann::json& j);

// ResultFile layout: schema_version, config, result (points, lambda,
// per-start traces), environment (build, wall_time), provenance (parent).
nlohmann::json result_to_json(const OptimResult& r);
OptimResult result_from_json(const nlohmann::json& j);

// Atomic: writes `path`.tmp and renames it. Throws IoError with the path.
void save_result(const OptimResult& r, const std::string& path);
// Throws LoadError on unreadable, malformed or version-mismatched files.
OptimResult load_result(const std::string& path);

// Continues a stored run; the new result records `path` as its parent.
OptimResult resume(const std::string& path, const OptimConfig& cfg, const ProgressFn& progress = {});

// A bare point set as read from a result file or a point CSV.
struct PointFile {
  Domain domain;
  int degree = 0;
  Points points;
  std::optional<double> lambda;
  // Resolution of the mesh `lambda` was measured on, when known.
  std::optional<int> mesh_m;

  PointSet to_point_set() const;
};

// Accepts a result JSON, an exported point JSON or an exported point CSV.
PointFile read_point_file(const std::string& path);

enum class ExportFormat { Csv, Json };

// CSV: a "# domain=...,n=...,d=...,N=...,lambda=..." line, a header of
// coordinate names, then one point per row at 17 significant digits.
// `projection` selects two (1-based) coordinates.
void export_points(const PointFile& pf, ExportFormat format, std::ostream& out,
                   std::optional<std::pair<int, int>> projection = std::nullopt);
PointFile point_file_from_result(const OptimResult& r);

struct CampaignRow {
  Domain domain;
  int degree = 1;
  int starts = 10;
  std::uint64_t seed = 0;
};

// CSV rows "domain,dim,degree,starts,seed"; '#' starts a comment and a
// header line naming the columns is skipped. Throws UsageError when no row
// is present.
std::vector<CampaignRow> parse_campaign(std::istream& in);

std::string campaign_file_name(const CampaignRow& row);

// Table-shaped summary: one line per (domain, d), a column per degree with
// lambda to two decimals followed by its full-precision twin.
std::string summarize(const std::vector<OptimResult>& results);

struct CampaignOutcome {
  std::vector<std::string> result_files;
  std::vector<std::string> failures;  // "row k: message"
  std::string summary_path;
};

// Runs every row (up to `jobs` concurrently), writing one result file per
// row plus summary.csv into `out_dir`. A failing row is recorded and the
// remaining rows still run.
CampaignOutcome run_campaign(const std::vector<CampaignRow>& rows, const OptimConfig& base,
                             const std::string& out_dir, int jobs, const ProgressFn& progress = {});

// Rebuilds summary.csv text from stored result files.
std::string summarize_files(const std::vector<std::string>& paths);

nlohmann::json fit_to_json(const GrowthFit& fit);

}  // namespace lebopt
