#pragma once

#include <cmath>
#include <vector>

// Rank of x_i = (#values below) + (#equal values + 1) / 2, then textbook
// Pearson on the ranks, all in long double.
namespace oracle {

inline std::vector<long double> ranks(const std::vector<double>& xs) {
  std::vector<long double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    long double below = 0, equal = 0;
    for (double v : xs) {
      if (v < xs[i]) below += 1;
      if (v == xs[i]) equal += 1;
    }
    r[i] = below + (equal + 1) / 2;
  }
  return r;
}

inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += rx[i] * rx[i];
    syy += ry[i] * ry[i];
    sxy += rx[i] * ry[i];
  }
  const long double cov = sxy - sx * sy / n;
  const long double vx = sxx - sx * sx / n;
  const long double vy = syy - sy * sy / n;
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

}  // namespace oracle
