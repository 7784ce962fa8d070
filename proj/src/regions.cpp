#include "semdiff/regions.hpp"

#include <algorithm>
#include <cmath>

#include "semdiff/errors.hpp"

namespace semdiff {

namespace {

struct Candidate {
  bool found = false;
  double objective = 0.0;
  std::array<std::size_t, 4> index{};
  std::size_t evaluated = 0;
};

bool better(const Candidate& a, const Candidate& b) {
  if (!a.found) return false;
  if (!b.found) return true;
  if (a.objective != b.objective) return a.objective > b.objective;
  return a.index < b.index;
}

double objective_raw(std::size_t metrics, std::int64_t n_dfs, const __int128* dfs,
                     std::int64_t n_sfd, const __int128* sfd, std::int64_t n_ctrl,
                     const __int128* ctrl) {
  double total = 0.0;
  for (std::size_t k = 0; k < metrics; ++k) {
    const double e_dfs = static_cast<double>(dfs[k]) / static_cast<double>(n_dfs);
    const double e_sfd = static_cast<double>(sfd[k]) / static_cast<double>(n_sfd);
    const double e_ctrl = static_cast<double>(ctrl[k]) / static_cast<double>(n_ctrl);
    total += ((e_dfs - e_ctrl) + (e_sfd - e_ctrl)) / 2.0;
  }
  return total / static_cast<double>(metrics) * kErrorUnit;
}

// Cumulative per-cell aggregates over the grid. For DFS the cell of a record
// is (first grid index >= x, last grid index <= y) and the table holds sums
// over cells (a <= i, b >= j). For SFD the cell is (last index <= x, first
// index >= y) and the table holds sums over (c >= i, d <= j).
class PrefixTables {
 public:
  PrefixTables(std::span<const RegionPoint> points, const std::vector<double>& grid,
               ErrorFlavor flavor)
      : p_(grid.size()), m_(points.front().metrics.size()) {
    dfs_count_.assign(p_ * p_, 0);
    sfd_count_.assign(p_ * p_, 0);
    dfs_sum_.assign(p_ * p_ * m_, 0);
    sfd_sum_.assign(p_ * p_ * m_, 0);
    total_sum_.assign(m_, 0);

    std::vector<std::int64_t> err(m_);
    for (const auto& pt : points) {
      for (std::size_t k = 0; k < m_; ++k) {
        err[k] = error_units(pt.y, pt.metrics[k], flavor);
        total_sum_[k] += err[k];
      }
      const auto lo_x = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), pt.x) - grid.begin());
      const auto hi_x = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), pt.x) - grid.begin()) - 1;
      const auto lo_y = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), pt.y) - grid.begin());
      const auto hi_y = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), pt.y) - grid.begin()) - 1;
      add(dfs_count_, dfs_sum_, lo_x, hi_y, err);
      add(sfd_count_, sfd_sum_, hi_x, lo_y, err);
    }
    total_count_ = static_cast<std::int64_t>(points.size());

    // DFS: prefix over rows ascending, columns descending.
    for (std::size_t i = 0; i < p_; ++i) {
      for (std::size_t jj = p_; jj-- > 0;) {
        if (i > 0) accumulate(dfs_count_, dfs_sum_, at(i, jj), at(i - 1, jj));
        if (jj + 1 < p_) accumulate(dfs_count_, dfs_sum_, at(i, jj), at(i, jj + 1));
        if (i > 0 && jj + 1 < p_) subtract(dfs_count_, dfs_sum_, at(i, jj), at(i - 1, jj + 1));
      }
    }
    // SFD: rows descending, columns ascending.
    for (std::size_t ii = p_; ii-- > 0;) {
      for (std::size_t j = 0; j < p_; ++j) {
        if (ii + 1 < p_) accumulate(sfd_count_, sfd_sum_, at(ii, j), at(ii + 1, j));
        if (j > 0) accumulate(sfd_count_, sfd_sum_, at(ii, j), at(ii, j - 1));
        if (ii + 1 < p_ && j > 0) subtract(sfd_count_, sfd_sum_, at(ii, j), at(ii + 1, j - 1));
      }
    }
  }

  // Best candidate with x1 == i1.
  Candidate scan_row(std::size_t i1) const {
    Candidate best;
    std::vector<__int128> ctrl(m_);
    for (std::size_t i2 = i1 + 1; i2 < p_; ++i2) {
      for (std::size_t j1 = 0; j1 < p_; ++j1) {
        const std::size_t s = at(i2, j1);
        const std::int64_t n_sfd = sfd_count_[s];
        if (n_sfd == 0) continue;
        for (std::size_t j2 = j1 + 1; j2 < p_; ++j2) {
          const std::size_t d = at(i1, j2);
          const std::int64_t n_dfs = dfs_count_[d];
          if (n_dfs == 0) continue;
          const std::int64_t n_ctrl = total_count_ - n_dfs - n_sfd;
          if (n_ctrl == 0) continue;
          const __int128* ds = &dfs_sum_[d * m_];
          const __int128* ss = &sfd_sum_[s * m_];
          for (std::size_t k = 0; k < m_; ++k) ctrl[k] = total_sum_[k] - ds[k] - ss[k];
          const double obj = objective_raw(m_, n_dfs, ds, n_sfd, ss, n_ctrl, ctrl.data());
          ++best.evaluated;
          if (!best.found || obj > best.objective) {
            best.found = true;
            best.objective = obj;
            best.index = {i1, i2, j1, j2};
          }
        }
      }
    }
    return best;
  }

  std::size_t size() const { return p_; }

 private:
  std::size_t at(std::size_t i, std::size_t j) const { return i * p_ + j; }

  void add(std::vector<std::int64_t>& count, std::vector<__int128>& sum, std::size_t i,
           std::size_t j, const std::vector<std::int64_t>& err) {
    const std::size_t c = at(i, j);
    ++count[c];
    for (std::size_t k = 0; k < m_; ++k) sum[c * m_ + k] += err[k];
  }
  void accumulate(std::vector<std::int64_t>& count, std::vector<__int128>& sum, std::size_t dst,
                  std::size_t src) {
    count[dst] += count[src];
    for (std::size_t k = 0; k < m_; ++k) sum[dst * m_ + k] += sum[src * m_ + k];
  }
  void subtract(std::vector<std::int64_t>& count, std::vector<__int128>& sum, std::size_t dst,
                std::size_t src) {
    count[dst] -= count[src];
    for (std::size_t k = 0; k < m_; ++k) sum[dst * m_ + k] -= sum[src * m_ + k];
  }

  std::size_t p_;
  std::size_t m_;
  std::vector<std::int64_t> dfs_count_, sfd_count_;
  std::vector<__int128> dfs_sum_, sfd_sum_;
  std::vector<__int128> total_sum_;
  std::int64_t total_count_ = 0;
};

void check_points(std::span<const RegionPoint> points) {
  if (points.empty()) throw NoFeasibleCandidate("no points to partition");
  const std::size_t m = points.front().metrics.size();
  if (m == 0) throw DegenerateInput("threshold selection needs at least one metric");
  for (const auto& p : points) {
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
      throw DegenerateInput("point outside the unit square");
    }
    if (p.metrics.size() != m) throw DegenerateInput("points carry different metric counts");
  }
}

ThresholdSelection finish(const Candidate& best, std::size_t evaluated,
                          const std::vector<double>& grid) {
  if (!best.found) {
    throw NoFeasibleCandidate("every candidate leaves SFD, DFS or Control empty");
  }
  ThresholdSelection out;
  out.grid_index = best.index;
  out.thresholds = {grid[best.index[0]], grid[best.index[1]], grid[best.index[2]],
                    grid[best.index[3]]};
  out.objective = best.objective;
  out.candidates = evaluated;
  return out;
}

}  // namespace

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::SFD:
      return "SFD";
    case RegionLabel::DFS:
      return "DFS";
    case RegionLabel::Control:
      return "Control";
  }
  return "?";
}

std::string_view to_string(ErrorFlavor flavor) {
  return flavor == ErrorFlavor::absolute ? "absolute" : "squared";
}

ErrorFlavor error_flavor_from_string(std::string_view text) {
  if (text == "absolute") return ErrorFlavor::absolute;
  if (text == "squared") return ErrorFlavor::squared;
  throw ConfigError("error flavor must be 'absolute' or 'squared', got '" + std::string(text) + "'");
}

RegionLabel classify(double x, double y, const RegionThresholds& th) {
  if (x >= th.x_hi && y <= th.y_lo) return RegionLabel::SFD;
  if (x <= th.x_lo && y >= th.y_hi) return RegionLabel::DFS;
  return RegionLabel::Control;
}

std::vector<RegionPoint> region_points(const Dataset& ds, const std::vector<std::string>& metrics) {
  std::vector<RegionPoint> out;
  for (const auto& r : ds.records) {
    if (!r.df_score) throw MissingScores("pair '" + r.pair_id + "' has no df_score");
    if (*r.df_score == kTimedOutSentinel) continue;
    if (!r.surface_sim) throw MissingScores("pair '" + r.pair_id + "' has no surface_sim");
    RegionPoint p{*r.surface_sim, *r.df_score, {}};
    for (const auto& m : metrics) {
      if (m == "surface_sim") {
        p.metrics.push_back(*r.surface_sim);
        continue;
      }
      const auto it = r.metric_scores.find(m);
      if (it == r.metric_scores.end()) {
        throw MissingScores("pair '" + r.pair_id + "' has no score for '" + m + "'");
      }
      p.metrics.push_back(it->second);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> threshold_grid(double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) throw ConfigError("delta must lie in (0, 0.5]");
  const double steps = 1.0 / delta;
  const double k = std::round(steps);
  std::vector<double> grid;
  if (std::abs(steps - k) < 1e-9) {
    const auto n = static_cast<std::size_t>(k);
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
    return grid;
  }
  for (std::size_t i = 0;; ++i) {
    const double g = static_cast<double>(i) * delta;
    if (g >= 1.0) break;
    grid.push_back(g);
  }
  grid.push_back(1.0);
  return grid;
}

std::int64_t error_units(double truth, double metric, ErrorFlavor flavor) {
  const double d = truth - metric;
  const double e = flavor == ErrorFlavor::absolute ? std::abs(d) : d * d;
  if (!std::isfinite(e) || e > 0x1.0p30) throw DegenerateInput("metric error out of range");
  return std::llround(e / kErrorUnit);
}

double gap_objective(const RegionSums& dfs, const RegionSums& sfd, const RegionSums& ctrl) {
  const std::size_t m = dfs.error.size();
  if (m == 0 || sfd.error.size() != m || ctrl.error.size() != m) {
    throw DegenerateInput("region sums disagree on the metric count");
  }
  if (dfs.count == 0 || sfd.count == 0 || ctrl.count == 0) throw DegenerateInput("empty region");
  return objective_raw(m, dfs.count, dfs.error.data(), sfd.count, sfd.error.data(), ctrl.count,
                       ctrl.error.data());
}

ThresholdSelection select_thresholds_serial(std::span<const RegionPoint> points, double delta,
                                            ErrorFlavor flavor) {
  const auto grid = threshold_grid(delta);
  check_points(points);
  const PrefixTables tables(points, grid, flavor);
  Candidate best;
  std::size_t evaluated = 0;
  for (std::size_t i1 = 0; i1 < grid.size(); ++i1) {
    const Candidate c = tables.scan_row(i1);
    evaluated += c.evaluated;
    if (better(c, best)) best = c;
  }
  return finish(best, evaluated, grid);
}

ThresholdSelection select_thresholds(std::span<const RegionPoint> points, double delta,
                                     ErrorFlavor flavor) {
  const auto grid = threshold_grid(delta);
  check_points(points);
  const PrefixTables tables(points, grid, flavor);
  const auto rows = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<Candidate> per_row(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i1 = 0; i1 < rows; ++i1) {
    per_row[static_cast<std::size_t>(i1)] = tables.scan_row(static_cast<std::size_t>(i1));
  }
  Candidate best;
  std::size_t evaluated = 0;
  for (const auto& c : per_row) {
    evaluated += c.evaluated;
    if (better(c, best)) best = c;
  }
  return finish(best, evaluated, grid);
}

ThresholdSelection select_thresholds(const Dataset& ds, double delta,
                                     const std::vector<std::string>& metrics, ErrorFlavor flavor) {
  if (metrics.empty()) throw DegenerateInput("threshold selection needs at least one metric");
  const auto points = region_points(ds, metrics);
  return select_thresholds(points, delta, flavor);
}

RegionCoverage region_coverage(std::span<const RegionPoint> points, const RegionThresholds& th) {
  RegionCoverage cov;
  for (const auto& p : points) ++cov.counts[static_cast<std::size_t>(classify(p.x, p.y, th))];
  cov.total = points.size();
  if (cov.total > 0) {
    cov.fractions[0] = static_cast<double>(cov.counts[0]) / static_cast<double>(cov.total);
    cov.fractions[1] = static_cast<double>(cov.counts[1]) / static_cast<double>(cov.total);
    cov.fractions[2] = static_cast<double>(cov.counts[2]) / static_cast<double>(cov.total);
  }
  return cov;
}

RegionCoverage region_coverage(const Dataset& ds, const RegionThresholds& th) {
  return region_coverage(region_points(ds, {}), th);
}

double boundary_distance(double x, double y, const RegionThresholds& th) {
  // SFD = [x_hi, inf) x (-inf, y_lo]; DFS = (-inf, x_lo] x [y_hi, inf).
  const double sfd = std::hypot(std::max(0.0, th.x_hi - x), std::max(0.0, y - th.y_lo));
  const double dfs = std::hypot(std::max(0.0, x - th.x_lo), std::max(0.0, th.y_hi - y));
  return std::min(sfd, dfs);
}

double mean_boundary_distance(std::span<const RegionPoint> points, const RegionThresholds& th) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : points) {
    if (classify(p.x, p.y, th) != RegionLabel::Control) continue;
    sum += boundary_distance(p.x, p.y, th);
    ++n;
  }
  if (n == 0) throw NoControlPoints("no point falls in the Control region");
  return sum / static_cast<double>(n);
}

double mean_boundary_distance(const Dataset& ds, const RegionThresholds& th) {
  return mean_boundary_distance(region_points(ds, {}), th);
}

}  // namespace semdiff
