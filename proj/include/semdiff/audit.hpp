#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semdiff/core_model.hpp"

namespace semdiff {

/// Mean absolute error between metric scores and ground truth. Throws
/// EmptySeries, or DegenerateInput on length mismatch or non-finite values.
double mae(std::span<const double> metric, std::span<const double> truth);

/// Ranks starting at 1; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
};

/// Pearson correlation of average ranks with a two-sided t-test p-value on
/// n-2 degrees of freedom (p = 0 when |rho| = 1). Throws DegenerateInput for
/// n < 3, unequal lengths or a constant list.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

/// mean(intra) / mean(inter). Throws EmptySeries or ZeroDenominator.
double distinguishability(std::span<const double> intra, std::span<const double> inter);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // n-1 denominator; 0 for a single value
};

MeanStd mean_std(std::span<const double> xs);

/// A task's slow and fast solutions.
struct SolutionPair {
  std::string task_id;
  std::string slow;
  std::string fast;
  Level level = Level::function;
};

/// `count` distinct (slow_i, fast_j) pairs with i != j, drawn without
/// replacement from the n(n-1) possibilities. Throws NotEnoughTasks when
/// there are fewer than 2 tasks or count > n(n-1).
std::vector<CodePairRecord> cross_pair(const std::vector<SolutionPair>& tasks, std::size_t count,
                                       std::uint64_t seed);

/// Per-metric scores and df_score over records that carry both. Records with
/// the timed-out sentinel are skipped. Throws MissingScores when a record
/// with a df_score lacks the metric.
struct ScoreSeries {
  std::string metric;
  std::vector<double> metric_scores;
  std::vector<double> truth;
  std::vector<std::string> pair_ids;
};

ScoreSeries score_series(const Dataset& ds, const std::string& metric);

/// Metric names present on any record, sorted. "surface_sim" is included
/// when any record carries a surface score.
std::vector<std::string> metric_names(const Dataset& ds);

/// Reads metric scores keyed by pair_id from a CSV (header
/// "pair_id,<metric>,...") or JSONL ({"pair_id": ..., "<metric>": ...}) side
/// file and merges them into the dataset. Returns the number of records
/// updated. Unknown pair_ids raise SchemaError unless `ignore_unknown`.
std::size_t merge_metric_scores(Dataset& ds, const std::filesystem::path& side_file,
                                bool ignore_unknown = false);

}  // namespace semdiff
