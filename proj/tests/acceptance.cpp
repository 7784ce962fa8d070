// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles/edit_oracle.hpp"
#include "oracles/rank_oracle.hpp"
#include "oracles/threshold_oracle.hpp"
#include "semdiff/audit.hpp"
#include "semdiff/fuzz.hpp"
#include "semdiff/harness.hpp"
#include "semdiff/mutation.hpp"
#include "semdiff/provider.hpp"
#include "semdiff/python_syntax.hpp"
#include "semdiff/regions.hpp"
#include "semdiff/surface_sim.hpp"

using namespace semdiff;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, const char* format = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

HarnessConfig toy_config(std::size_t n, std::size_t reps, double timeout = 2.0) {
  HarnessConfig cfg;
  cfg.n_inputs = n;
  cfg.repetitions = reps;
  cfg.per_input_timeout_seconds = timeout;
  cfg.repetition_budget_seconds = 60.0;
  return cfg;
}

PairScore toy_score(Runner& runner, const std::string& binding, const std::string& a, const std::string& b,
                    const HarnessConfig& cfg, std::uint64_t seed = 11) {
  TaskSpec task;
  task.task_id = "toy";
  task.binding_program = binding;
  CodePairRecord pair;
  pair.pair_id = "toy";
  pair.task_id = "toy";
  pair.code_ori = a;
  pair.code_var = b;
  fuzz::FuzzPlan plan;
  plan.seed = seed;
  plan.bounds = {4, 64};
  return score_pair(pair, task, cfg, plan, runner);
}

Verdict identity() {
  Verdict v;
  ProcessRunner runner({SEMDIFF_TOY_RUNNER});
  const auto t0 = Clock::now();
  const auto s = toy_score(runner, "int -50 50", "add 3\nmul 2", "add 3\nmul 2", toy_config(200, 5));
  const double t = seconds_since(t0);
  v.expect(s.df_score == 1.0, "df_score " + num(s.df_score));
  v.expect(s.rep_scores.size() == 5, "expected 5 repetitions");
  v.expect(t < 5.0, "took " + num(t) + " s");
  v.detail = v.pass ? "df_score 1.0 over N=200, R=5 in " + num(t, "%.2f") + " s" : v.detail;
  return v;
}

Verdict disjoint() {
  Verdict v;
  ProcessRunner runner({SEMDIFF_TOY_RUNNER});
  const auto s = toy_score(runner, "int 0 1000", "add 0", "add 1", toy_config(200, 5));
  v.expect(s.df_score == 0.0, "df_score " + num(s.df_score));
  if (v.pass) v.detail = "df_score 0.0";
  return v;
}

Verdict all_timeout() {
  Verdict v;
  ProcessRunner runner({SEMDIFF_TOY_RUNNER});
  const auto s = toy_score(runner, "int 0 9", "sleep 500", "sleep 500", toy_config(4, 2, 0.05));
  v.expect(s.df_score == kTimedOutSentinel, "df_score " + num(s.df_score));
  v.expect(s.rep_scores.empty(), "a repetition was scored");
  for (const auto& r : s.repetitions) v.expect(r.timeouts == r.n_inputs, "an input finished in time");
  if (v.pass) v.detail = "df_score -1";
  return v;
}

std::vector<RegionPoint> random_points(fuzz::Rng& rng, std::size_t n, std::size_t metrics) {
  std::vector<RegionPoint> pts(n);
  for (auto& p : pts) {
    p.x = rng.unit();
    p.y = rng.unit();
    for (std::size_t k = 0; k < metrics; ++k) p.metrics.push_back(rng.unit());
  }
  return pts;
}

Verdict threshold_oracle() {
  Verdict v;
  const auto t0 = Clock::now();
  fuzz::Rng rng(2024);
  const auto grid = threshold_grid(0.25);
  std::size_t compared = 0;
  for (int t = 0; t < 20; ++t) {
    const auto pts = random_points(rng, 50, 2);
    const auto expect = oracle::select_thresholds_naive(pts, grid, ErrorFlavor::absolute);
    if (!expect) {
      v.expect(false, "dataset " + std::to_string(t) + " has no feasible candidate");
      continue;
    }
    const auto got = select_thresholds(pts, 0.25, ErrorFlavor::absolute);
    const auto& a = got.thresholds;
    const auto& b = expect->th;
    const bool same = a.x_lo == b.x_lo && a.x_hi == b.x_hi && a.y_lo == b.y_lo && a.y_hi == b.y_hi &&
                      got.objective == expect->objective;
    v.expect(same, "dataset " + std::to_string(t) + " differs");
    ++compared;
  }
  const double t = seconds_since(t0);
  v.expect(t < 10.0, "took " + num(t) + " s");
  if (v.pass) v.detail = std::to_string(compared) + " datasets identical in " + num(t, "%.2f") + " s";
  return v;
}

Verdict paper_regions() {
  Verdict v;
  const RegionThresholds th{0.65, 0.90, 0.10, 0.90};
  v.expect(classify(0.95, 0.05, th) == RegionLabel::SFD, "(0.95, 0.05) not SFD");
  v.expect(classify(0.50, 0.95, th) == RegionLabel::DFS, "(0.50, 0.95) not DFS");
  v.expect(classify(0.70, 0.50, th) == RegionLabel::Control, "(0.70, 0.50) not Control");
  if (v.pass) v.detail = "SFD, DFS, Control";
  return v;
}

Verdict stats() {
  Verdict v;
  using V = std::vector<double>;
  const V up{0.1, 0.4, 0.5, 0.9, 1.3, 2.0};
  const V down{9, 7, 5, 3, 2, 1};
  v.expect(spearman(up, V{1, 2, 3, 4, 5, 6}).rho == 1.0, "monotone rho");
  v.expect(spearman(up, down).rho == -1.0, "reversed rho");

  fuzz::Rng rng(17);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng.below(40);
    V x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(5));
      y[i] = static_cast<double>(rng.below(4));
    }
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end() ||
        std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) {
      continue;
    }
    worst = std::max(worst, std::abs(spearman(x, y).rho - oracle::spearman_rho(x, y)));
  }
  v.expect(worst <= 1e-12, "tie rho off by " + num(worst));

  v.expect(mae(V{0.5, 1.0, 0.25}, V{0.0, 1.0, 0.75}) == 1.0 / 3.0, "mae");
  v.expect(mae(V{1.0, 0.0}, V{0.0, 1.0}) == 1.0, "mae of opposites");
  v.expect(distinguishability(V{0.75, 0.25}, V{0.25, 0.25}) == 2.0, "d = 2");
  v.expect(distinguishability(V{0.5}, V{0.5, 0.5, 0.5}) == 1.0, "d = 1");

  // Scale invariance: bit-exact on fixed vectors, relative bound on random ones.
  const std::vector<std::pair<V, V>> fixed = {{{1.0, 1.0}, {0.5, 0.25}}, {{0.9, 0.8}, {0.4, 0.3}},
                                              {{1.0, 0.5, 0.5}, {0.25}}};
  for (const auto& [intra, inter] : fixed) {
    const double d = distinguishability(intra, inter);
    for (double lambda : {0.1, 3.7}) {
      V a = intra, b = inter;
      for (auto& x : a) x *= lambda;
      for (auto& x : b) x *= lambda;
      v.expect(distinguishability(a, b) == d, "scaled d differs at lambda " + num(lambda));
    }
  }
  double rel = 0.0;
  for (int t = 0; t < 1000; ++t) {
    V intra(1 + rng.below(50)), inter(1 + rng.below(50));
    for (auto& x : intra) x = rng.unit();
    for (auto& x : inter) x = 0.01 + rng.unit();
    const double d = distinguishability(intra, inter);
    for (double lambda : {0.1, 3.7}) {
      V a = intra, b = inter;
      for (auto& x : a) x *= lambda;
      for (auto& x : b) x *= lambda;
      rel = std::max(rel, std::abs(distinguishability(a, b) - d) / d);
    }
  }
  v.expect(rel <= 1e-13, "random scaled d off by " + num(rel));
  if (v.pass) v.detail = "tie rho within " + num(worst) + ", scaled d within " + num(rel);
  return v;
}

Verdict surface_oracles() {
  Verdict v;
  using namespace gen;
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_text(rng, 50, "abcd \n");
    const auto b = random_text(rng, 50, "abcd \n");
    const std::size_t ed = oracle::levenshtein_table(decode_utf8(a), decode_utf8(b));
    const double expect = a.empty() && b.empty()
                              ? 1.0
                              : 1.0 - static_cast<double>(ed) / static_cast<double>(std::max(a.size(), b.size()));
    v.expect(edit_similarity(a, b) == expect, "edit pair " + std::to_string(t));
  }
  for (int t = 0; t < 400; ++t) {
    const auto a = random_tree(rng, 6);
    const auto b = random_tree(rng, 6);
    v.expect(tree_edit_distance(a, b) == oracle::tree_edit_distance_exhaustive(a, b),
             "tree pair " + std::to_string(t));
  }
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_program(rng);
    const auto b = rng.below(4) == 0 ? a : random_program(rng);
    const auto ab = surface_breakdown(a, b);
    const auto ba = surface_breakdown(b, a);
    bool in_range = true;
    for (double x : {ab.edit, ab.ast, ab.surface}) in_range = in_range && x >= 0.0 && x <= 1.0;
    v.expect(ab == ba && in_range && surface_sim(a, a) == 1.0, "program pair " + std::to_string(t));
  }
  if (v.pass) v.detail = "200 edit, 400 tree, 1000 program pairs";
  return v;
}

Verdict provider_vectors() {
  Verdict v;
  const auto vectors = fuzz::load_vectors(std::string(SEMDIFF_TEST_DATA) + "/provider_vectors.txt");
  v.expect(vectors.size() >= 50, "only " + std::to_string(vectors.size()) + " vectors");
  std::size_t bad = 0;
  for (const auto& vec : vectors) {
    const auto [value, rest] = fuzz::evaluate_reference(vec.primitive, vec.args, vec.buffer);
    bad += value != vec.value || rest != vec.rest;
  }
  v.expect(bad == 0, std::to_string(bad) + " vectors differ");
  fuzz::FuzzPlan plan;
  plan.seed = 0x5eed;
  plan.n_inputs = 500;
  v.expect(fuzz::generate_buffers(plan) == fuzz::generate_buffers(plan), "buffers differ between runs");
  if (v.pass) v.detail = std::to_string(vectors.size()) + " vectors, buffers deterministic";
  return v;
}

struct Task {
  std::string id, slow, fast;
};

const std::vector<Task> kTasks = {
    {"sum_to",
     "def sum_to(n):\n    total = 0\n    for i in range(n + 1):\n        total = total + i\n    return total\n",
     "def sum_to(n):\n    return n * (n + 1) // 2\n"},
    {"count_even",
     "def count_even(xs):\n    count = 0\n    for x in xs:\n        if x % 2 == 0:\n            count += 1\n"
     "    return count\n",
     "def count_even(xs):\n    return sum(1 for x in xs if not x % 2)\n"},
    {"max_of",
     "def max_of(xs):\n    best = xs[0]\n    i = 1\n    while i < len(xs):\n        if xs[i] > best:\n"
     "            best = xs[i]\n        i += 1\n    return best\n",
     "def max_of(xs):\n    return max(xs)\n"},
    {"reverse_words",
     "def reverse_words(s):\n    words = s.split()\n    out = []\n    for k in range(len(words) - 1, -1, -1):\n"
     "        out.append(words[k])\n    return ' '.join(out)\n",
     "def reverse_words(s):\n    return ' '.join(reversed(s.split()))\n"},
    {"is_prime",
     "def is_prime(n):\n    if n < 2:\n        return False\n    for d in range(2, n):\n        if n % d == 0:\n"
     "            return False\n    return True\n",
     "def is_prime(n):\n    if n < 2:\n        return False\n    d = 2\n    while d * d <= n:\n"
     "        if n % d == 0:\n            return False\n        d += 1\n    return True\n"},
    {"factorial",
     "def factorial(n):\n    result = 1\n    for k in range(2, n + 1):\n        result *= k\n    return result\n",
     "def factorial(n):\n    return 1 if n < 2 else n * factorial(n - 1)\n"},
};

// Python pairs supply the surface scores; each task's behaviour is stood in
// for by the toy program "add <task index>", so df_score comes from real
// differential runs: same task -> 1, different task or mutant -> 0.
Verdict collapse() {
  Verdict v;
  ProcessRunner runner({SEMDIFF_TOY_RUNNER});
  const auto cfg = toy_config(50, 2);
  const std::string binding = "int 0 1000";
  auto toy_program = [](std::size_t i) { return "add " + std::to_string(i); };
  std::map<std::string, std::size_t> index;
  std::vector<SolutionPair> solutions;
  for (std::size_t i = 0; i < kTasks.size(); ++i) {
    index[kTasks[i].id] = i;
    solutions.push_back({kTasks[i].id, kTasks[i].slow, kTasks[i].fast, Level::function});
  }

  std::vector<double> intra, inter_cross, inter_mutant;
  for (std::size_t i = 0; i < kTasks.size(); ++i) {
    const double df = toy_score(runner, binding, toy_program(i), toy_program(i), cfg).df_score;
    v.expect(df == 1.0, kTasks[i].id + " intra df " + num(df));
    if (df == 1.0) intra.push_back(surface_sim(kTasks[i].slow, kTasks[i].fast));
  }
  for (const auto& r : cross_pair(solutions, 12, 7)) {
    const std::size_t i = index.at(r.task_id);
    const std::size_t j = index.at(r.pair_id.substr(r.pair_id.rfind(':') + 1));
    const double df = toy_score(runner, binding, toy_program(i), toy_program(j), cfg).df_score;
    v.expect(df < 1.0, r.pair_id + " cross df " + num(df));
    if (df < 1.0) inter_cross.push_back(surface_sim(r.code_ori, r.code_var));
  }
  MutationLimits limits;
  limits.max_mutants = 3;
  for (std::size_t i = 0; i < kTasks.size(); ++i) {
    const double df =
        toy_score(runner, binding, toy_program(i), toy_program(i) + "\nadd 1", cfg).df_score;
    v.expect(df == 0.0, kTasks[i].id + " mutant df " + num(df));
    for (const auto& m : generate_mutants(kTasks[i].slow, limits, kTasks[i].id)) {
      if (df == 0.0) inter_mutant.push_back(surface_sim(kTasks[i].slow, m.variant_code));
    }
  }
  if (intra.empty() || inter_cross.empty() || inter_mutant.empty()) {
    v.expect(false, "empty pair set");
    return v;
  }
  const double d_orig = distinguishability(intra, inter_cross);
  const double d_repl = distinguishability(intra, inter_mutant);
  v.expect(d_orig > 1.0, "cross-paired d " + num(d_orig));
  v.expect(d_repl < 1.0, "mutant d " + num(d_repl));
  if (v.pass) v.detail = "d " + num(d_orig) + " (cross pairs) -> " + num(d_repl) + " (mutants)";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, identity},          {2, disjoint},        {3, all_timeout},
      {4, threshold_oracle},  {5, paper_regions},   {6, stats},
      {7, surface_oracles},   {8, provider_vectors}, {12, collapse}};
  const std::map<int, const char*> names = {
      {1, "df_score identity"},
      {2, "df_score disjoint"},
      {3, "all-timeout sentinel"},
      {4, "threshold search equals naive scan"},
      {5, "region classification"},
      {6, "stats kernels"},
      {7, "surface similarity oracles"},
      {8, "provider conformance and buffer determinism"},
      {12, "distinguishability collapse"}};
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, names.at(id), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
