#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "semdiff/errors.hpp"

namespace {

using namespace semdiff;
using namespace semdiff::cli;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  return out;
}

RegionThresholds parse_thresholds(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.size() != 4) throw ConfigError("--thresholds expects x_lo,x_hi,y_lo,y_hi");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    try {
      v[i] = std::stod(parts[static_cast<std::size_t>(i)]);
    } catch (const std::exception&) {
      throw ConfigError("bad threshold '" + parts[static_cast<std::size_t>(i)] + "'");
    }
  }
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semdiff: differential-fuzzing similarity scoring and code-metric audits"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string operators, error_flavor, stub_fixture, runner;
  std::optional<double> delta;
  std::optional<std::size_t> inputs, reps, max_mutants;
  std::optional<double> timeout, budget;
  bool no_errors_match = false;

  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "global seed");
  app.add_option("--jobs", jobs, "worker count (default: logical cores)");
  app.add_option("--operators", operators, "mutation operators, e.g. AOR,ROR");
  app.add_option("--max-mutants", max_mutants, "mutants per task");
  app.add_option("--delta", delta, "threshold grid step");
  app.add_option("--error-flavor", error_flavor, "absolute or squared");
  app.add_option("--stub-fixture", stub_fixture, "offline optimizer answers (JSONL)");
  app.add_option("--runner", runner, "runner command line");
  app.add_option("--inputs", inputs, "fuzzed inputs per repetition");
  app.add_option("--repetitions", reps, "repetitions per pair");
  app.add_option("--timeout", timeout, "per-input timeout in seconds");
  app.add_option("--budget", budget, "per-repetition budget in seconds");
  app.add_flag("--no-errors-match", no_errors_match, "identical error tokens count as mismatches");

  VariantsArgs va;
  auto* variants = app.add_subcommand("variants", "generate mutated and optimized variants");
  variants->add_option("--tasks", va.tasks, "task corpus (JSONL)")->required()->check(CLI::ExistingFile);
  variants->add_option("--out", va.out, "variant records (JSONL)")->required();
  variants->add_option("--pairs", va.pairs, "also write a pair dataset");
  variants->add_flag("--live", va.live, "call the HTTP optimizer (key from the environment)");
  variants->add_flag("--no-optimizer", va.no_optimizer, "mutants only");

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "differential fuzzing scores for a pair dataset");
  score->add_option("--tasks", sa.tasks, "task corpus (JSONL)")->required()->check(CLI::ExistingFile);
  score->add_option("--pairs", sa.pairs, "pair dataset")->required()->check(CLI::ExistingFile);
  score->add_option("--out", sa.out, "scored dataset, also the checkpoint")->required();
  score->add_flag("--restart", sa.restart, "ignore an existing checkpoint");

  SurfaceArgs ua;
  auto* surface = app.add_subcommand("surface", "surface similarity for a pair dataset");
  surface->add_option("--pairs", ua.pairs, "pair dataset")->required()->check(CLI::ExistingFile);
  surface->add_option("--out", ua.out, "output dataset")->required();

  AuditArgs aa;
  std::string audit_metrics;
  std::string audit_csv;
  auto* audit = app.add_subcommand("audit", "MAE, Spearman and distinguishability per metric");
  audit->add_option("--dataset", aa.datasets, "scored dataset (repeat for several runs)")
      ->required()
      ->check(CLI::ExistingFile);
  audit->add_option("--scores", aa.scores, "metric score side file (CSV or JSONL)")->check(CLI::ExistingFile);
  audit->add_option("--metrics", audit_metrics, "comma-separated metric names");
  audit->add_option("--csv", audit_csv, "write the table as CSV");

  RegionsArgs ra;
  std::string regions_metrics, thresholds, scatter;
  auto* regions = app.add_subcommand("regions", "threshold selection, coverage and boundary distance");
  regions->add_option("--dataset", ra.dataset, "scored dataset")->required()->check(CLI::ExistingFile);
  regions->add_option("--scores", ra.scores, "metric score side file")->check(CLI::ExistingFile);
  regions->add_option("--metrics", regions_metrics, "comma-separated metric names");
  regions->add_option("--thresholds", thresholds, "fixed x_lo,x_hi,y_lo,y_hi");
  regions->add_option("--scatter", scatter, "write pair_id,x,y,label CSV");

  ReportArgs pa;
  std::string report_thresholds;
  auto* report = app.add_subcommand("report", "summary of a dataset");
  report->add_option("--dataset", pa.dataset, "dataset")->required()->check(CLI::ExistingFile);
  report->add_option("--thresholds", report_thresholds, "x_lo,x_hi,y_lo,y_hi for the region counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_ini(cfg, config_path);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!operators.empty()) cfg.mutation.operators = parse_operator_list(operators);
    if (max_mutants) cfg.mutation.max_mutants = *max_mutants;
    if (delta) cfg.delta = *delta;
    if (!error_flavor.empty()) cfg.error_flavor = error_flavor_from_string(error_flavor);
    if (!stub_fixture.empty()) cfg.stub_fixture = stub_fixture;
    if (!runner.empty()) cfg.runner = split_command(runner);
    if (inputs) cfg.harness.n_inputs = *inputs;
    if (reps) cfg.harness.repetitions = *reps;
    if (timeout) cfg.harness.per_input_timeout_seconds = *timeout;
    if (budget) cfg.harness.repetition_budget_seconds = *budget;
    if (no_errors_match) cfg.harness.errors_match = false;
    validate(cfg);

    if (*variants) return cmd_variants(cfg, va, std::cerr);
    if (*score) return cmd_score(cfg, sa, std::cerr);
    if (*surface) return cmd_surface(cfg, ua, std::cerr);
    if (*audit) {
      aa.metrics = split_list(audit_metrics);
      if (!audit_csv.empty()) aa.csv = audit_csv;
      return cmd_audit(cfg, aa, std::cout, std::cerr);
    }
    if (*regions) {
      ra.metrics = split_list(regions_metrics);
      if (!thresholds.empty()) ra.thresholds = parse_thresholds(thresholds);
      if (!scatter.empty()) ra.scatter = scatter;
      return cmd_regions(cfg, ra, std::cout, std::cerr);
    }
    if (*report) {
      if (!report_thresholds.empty()) pa.thresholds = parse_thresholds(report_thresholds);
      return cmd_report(cfg, pa, std::cout);
    }
  } catch (const semdiff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
