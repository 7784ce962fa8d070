#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace semdiff::cli {

using Path = std::filesystem::path;

struct VariantsArgs {
  Path tasks;
  Path out;
  std::optional<Path> pairs;  // also write a pair dataset
  bool live = false;          // call the HTTP optimizer
  bool no_optimizer = false;
};

struct ScoreArgs {
  Path tasks;
  Path pairs;
  Path out;
  bool restart = false;  // discard an existing checkpoint
};

struct SurfaceArgs {
  Path pairs;
  Path out;
};

struct AuditArgs {
  std::vector<Path> datasets;
  std::vector<Path> scores;
  std::vector<std::string> metrics;  // empty = every metric present
  std::optional<Path> csv;
};

struct RegionsArgs {
  Path dataset;
  std::vector<Path> scores;
  std::vector<std::string> metrics;
  std::optional<RegionThresholds> thresholds;  // skip the search when set
  std::optional<Path> scatter;
};

struct ReportArgs {
  Path dataset;
  RegionThresholds thresholds{0.65, 0.90, 0.10, 0.90};
};

// Each command returns the process exit code; library errors propagate.
int cmd_variants(const RunConfig& cfg, const VariantsArgs& args, std::ostream& log);
int cmd_score(const RunConfig& cfg, const ScoreArgs& args, std::ostream& log);
int cmd_surface(const RunConfig& cfg, const SurfaceArgs& args, std::ostream& log);
int cmd_audit(const RunConfig& cfg, const AuditArgs& args, std::ostream& out, std::ostream& log);
int cmd_regions(const RunConfig& cfg, const RegionsArgs& args, std::ostream& out, std::ostream& log);
int cmd_report(const RunConfig& cfg, const ReportArgs& args, std::ostream& out);

}  // namespace semdiff::cli
