#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semdiff/core_model.hpp"

namespace semdiff {

enum class RegionLabel { SFD, DFS, Control };
enum class ErrorFlavor { absolute, squared };

std::string_view to_string(RegionLabel label);
std::string_view to_string(ErrorFlavor flavor);
/// Throws ConfigError.
ErrorFlavor error_flavor_from_string(std::string_view text);

/// SFD iff x >= x_hi and y <= y_lo; DFS iff x <= x_lo and y >= y_hi;
/// otherwise Control. Boundaries are inclusive.
RegionLabel classify(double x, double y, const RegionThresholds& th);

/// One record on the SurfaceSim x df_score plane with its metric scores.
struct RegionPoint {
  double x = 0.0;
  double y = 0.0;
  std::vector<double> metrics;
};

/// Points for every record with a df_score other than the timed-out
/// sentinel. Throws MissingScores when surface_sim or a metric is absent.
std::vector<RegionPoint> region_points(const Dataset& ds, const std::vector<std::string>& metrics);

/// {0, d, 2d, ..., 1}. When d divides 1 the values are i/K (K = 1/d) so
/// they match decimal literals exactly; otherwise 1 is appended after the
/// last multiple of d. Throws ConfigError unless 0 < d <= 0.5.
std::vector<double> threshold_grid(double delta);

/// Per-record errors are accumulated in fixed point (units of 2^-32) so
/// region sums are exact and independent of summation order.
inline constexpr double kErrorUnit = 0x1.0p-32;
std::int64_t error_units(double truth, double metric, ErrorFlavor flavor);

/// Aggregate of one region for one candidate.
struct RegionSums {
  std::int64_t count = 0;
  std::vector<__int128> error;  // per metric, in error units
};

/// mean over metrics of mean(E_DFS - E_CTRL, E_SFD - E_CTRL), each E a
/// region mean error. All three regions must be non-empty.
double gap_objective(const RegionSums& dfs, const RegionSums& sfd, const RegionSums& ctrl);

struct ThresholdSelection {
  RegionThresholds thresholds;
  std::array<std::size_t, 4> grid_index{};  // (x1, x2, y1, y2)
  double objective = 0.0;
  std::size_t candidates = 0;  // candidates with all regions non-empty
};

/// Grid search for the tuple maximising the corner-vs-control error gap.
/// Candidates with an empty SFD, DFS or Control region are skipped; ties go
/// to the lexicographically smallest tuple. Throws NoFeasibleCandidate,
/// ConfigError, DegenerateInput (points outside [0,1]^2 or no metrics).
ThresholdSelection select_thresholds(std::span<const RegionPoint> points, double delta,
                                     ErrorFlavor flavor);
/// Same search on one thread; kept as the reference for the parallel scan.
ThresholdSelection select_thresholds_serial(std::span<const RegionPoint> points, double delta,
                                            ErrorFlavor flavor);

ThresholdSelection select_thresholds(const Dataset& ds, double delta,
                                     const std::vector<std::string>& metrics, ErrorFlavor flavor);

struct RegionCoverage {
  std::array<std::size_t, 3> counts{};  // indexed by RegionLabel
  std::array<double, 3> fractions{};
  std::size_t total = 0;
};

RegionCoverage region_coverage(std::span<const RegionPoint> points, const RegionThresholds& th);
RegionCoverage region_coverage(const Dataset& ds, const RegionThresholds& th);

/// Distance from (x, y) to the nearer closed corner rectangle.
double boundary_distance(double x, double y, const RegionThresholds& th);

/// Mean boundary distance over Control points. Throws NoControlPoints.
double mean_boundary_distance(std::span<const RegionPoint> points, const RegionThresholds& th);
double mean_boundary_distance(const Dataset& ds, const RegionThresholds& th);

}  // namespace semdiff
