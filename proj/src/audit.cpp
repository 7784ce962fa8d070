#include "semdiff/audit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <boost/tokenizer.hpp>

#include "semdiff/errors.hpp"
#include "semdiff/fuzz.hpp"

namespace semdiff {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw DegenerateInput(std::string(what) + " contains a non-finite value");
  }
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

double mae(std::span<const double> metric, std::span<const double> truth) {
  if (metric.empty()) throw EmptySeries("MAE over an empty series");
  if (metric.size() != truth.size()) throw DegenerateInput("series lengths differ");
  require_finite(metric, "metric scores");
  require_finite(truth, "ground truth");
  double s = 0.0;
  for (std::size_t i = 0; i < metric.size(); ++i) s += std::abs(metric[i] - truth[i]);
  return s / static_cast<double>(metric.size());
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    // positions i..j (0-based) share rank mean(i+1 .. j+1)
    const double r = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DegenerateInput("series lengths differ");
  if (x.size() < 3) throw DegenerateInput("spearman needs at least 3 points");
  require_finite(x, "x");
  require_finite(y, "y");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
  };
  if (constant(x) || constant(y)) throw DegenerateInput("constant series");

  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);

  SpearmanResult out;
  out.rho = rho;
  if (std::abs(rho) == 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double df = static_cast<double>(x.size() - 2);
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  boost::math::students_t dist(df);
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return out;
}

double distinguishability(std::span<const double> intra, std::span<const double> inter) {
  if (intra.empty() || inter.empty()) throw EmptySeries("distinguishability needs both pair sets");
  require_finite(intra, "intra scores");
  require_finite(inter, "inter scores");
  const double denom = mean_of(inter);
  if (denom == 0.0) throw ZeroDenominator("mean score of non-equivalent pairs is 0");
  return mean_of(intra) / denom;
}

MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) throw EmptySeries("mean of an empty series");
  MeanStd out;
  out.mean = mean_of(xs);
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

std::vector<CodePairRecord> cross_pair(const std::vector<SolutionPair>& tasks, std::size_t count,
                                       std::uint64_t seed) {
  const std::size_t n = tasks.size();
  if (n < 2) throw NotEnoughTasks("cross pairing needs at least 2 tasks");
  const std::uint64_t space = static_cast<std::uint64_t>(n) * (n - 1);
  if (count > space) {
    throw NotEnoughTasks("requested " + std::to_string(count) + " cross pairs but only " +
                         std::to_string(space) + " exist");
  }
  // Floyd's sampling over the index space of ordered (i, j != i) pairs.
  fuzz::Rng rng(seed);
  std::set<std::uint64_t> chosen;
  for (std::uint64_t m = space - count; m < space; ++m) {
    const std::uint64_t t = rng.below(m + 1);
    if (!chosen.insert(t).second) chosen.insert(m);
  }

  std::vector<CodePairRecord> out;
  out.reserve(count);
  for (std::uint64_t k : chosen) {
    const std::size_t i = static_cast<std::size_t>(k / (n - 1));
    std::size_t j = static_cast<std::size_t>(k % (n - 1));
    if (j >= i) ++j;
    CodePairRecord r;
    r.pair_id = "x:" + tasks[i].task_id + ":" + tasks[j].task_id;
    r.task_id = tasks[i].task_id;
    r.code_ori = tasks[i].slow;
    r.code_var = tasks[j].fast;
    r.level = tasks[i].level;
    out.push_back(std::move(r));
  }
  return out;
}

ScoreSeries score_series(const Dataset& ds, const std::string& metric) {
  ScoreSeries s;
  s.metric = metric;
  for (const auto& r : ds.records) {
    if (!r.df_score || *r.df_score == kTimedOutSentinel) continue;
    std::optional<double> m;
    if (metric == "surface_sim") {
      m = r.surface_sim;
    } else if (auto it = r.metric_scores.find(metric); it != r.metric_scores.end()) {
      m = it->second;
    }
    if (!m) throw MissingScores("pair '" + r.pair_id + "' has no score for '" + metric + "'");
    s.metric_scores.push_back(*m);
    s.truth.push_back(*r.df_score);
    s.pair_ids.push_back(r.pair_id);
  }
  return s;
}

std::vector<std::string> metric_names(const Dataset& ds) {
  std::set<std::string> names;
  for (const auto& r : ds.records) {
    if (r.surface_sim) names.insert("surface_sim");
    for (const auto& [k, v] : r.metric_scores) names.insert(k);
  }
  return {names.begin(), names.end()};
}

std::size_t merge_metric_scores(Dataset& ds, const std::filesystem::path& side_file,
                                bool ignore_unknown) {
  std::ifstream in(side_file);
  if (!in) throw IOError("cannot open " + side_file.string());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.records.size(); ++i) index[ds.records[i].pair_id] = i;

  std::set<std::size_t> touched;
  auto apply = [&](std::size_t line, const std::string& pair_id, const std::string& metric,
                   double value) {
    const auto it = index.find(pair_id);
    if (it == index.end()) {
      if (ignore_unknown) return;
      throw SchemaError(line, "unknown pair_id '" + pair_id + "'");
    }
    if (!std::isfinite(value)) throw SchemaError(line, "non-finite score");
    ds.records[it->second].metric_scores[metric] = value;
    touched.insert(it->second);
  };

  const bool jsonl = side_file.extension() == ".jsonl" || side_file.extension() == ".json";
  std::string line;
  std::size_t lineno = 0;
  if (jsonl) {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(lineno, e.what());
      }
      if (!j.is_object() || !j.contains("pair_id") || !j["pair_id"].is_string()) {
        throw SchemaError(lineno, "missing pair_id");
      }
      const auto id = j["pair_id"].get<std::string>();
      for (const auto& [k, v] : j.items()) {
        if (k == "pair_id") continue;
        if (!v.is_number()) throw SchemaError(lineno, "score '" + k + "' is not a number");
        apply(lineno, id, k, v.get<double>());
      }
    }
    return touched.size();
  }

  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Tokenizer tok(line);
    std::vector<std::string> cells(tok.begin(), tok.end());
    if (header.empty()) {
      if (cells.empty() || cells[0] != "pair_id") throw SchemaError(lineno, "CSV header must start with pair_id");
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) throw SchemaError(lineno, "wrong number of columns");
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw SchemaError(lineno, "bad number '" + cells[c] + "'");
      }
      apply(lineno, cells[0], header[c], v);
    }
  }
  return touched.size();
}

}  // namespace semdiff
