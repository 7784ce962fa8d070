#include "commands.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <json.hpp>
#include <omp.h>

#include "semdiff/audit.hpp"
#include "semdiff/errors.hpp"
#include "semdiff/python_syntax.hpp"

namespace semdiff::cli {

namespace {

std::string fmt(double v, const char* format = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string csv_num(double v) { return fmt(v, "%.10g"); }

Dataset fresh_dataset(const RunConfig& cfg) {
  Dataset ds;
  ds.header.config_digest = config_digest(cfg);
  return ds;
}

void save_atomic(const Dataset& ds, const Path& path) {
  Path tmp = path;
  tmp += ".tmp";
  save_dataset(ds, tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IOError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::map<std::string, const TaskSpec*> index_tasks(const std::vector<TaskSpec>& tasks) {
  std::map<std::string, const TaskSpec*> out;
  for (const auto& t : tasks) out[t.task_id] = &t;
  return out;
}

bool scored(const CodePairRecord& r) { return r.df_score && *r.df_score != kTimedOutSentinel; }

void merge_scores(Dataset& ds, const std::vector<Path>& files, bool lenient, std::ostream& log) {
  for (const auto& f : files) {
    const auto n = merge_metric_scores(ds, f, lenient);
    log << "merged scores for " << n << " pairs from " << f.string() << "\n";
  }
}

/// Records that count for analysis but lack `metric`.
std::vector<std::string> missing_metric(const Dataset& ds, const std::string& metric) {
  std::vector<std::string> ids;
  for (const auto& r : ds.records) {
    if (!scored(r)) continue;
    const bool has = metric == "surface_sim" ? r.surface_sim.has_value() : r.metric_scores.count(metric) > 0;
    if (!has) ids.push_back(r.pair_id);
  }
  return ids;
}

void require_metric(const Dataset& ds, const std::string& metric) {
  const auto ids = missing_metric(ds, metric);
  if (ids.empty()) return;
  std::string msg = "metric '" + metric + "' missing for " + std::to_string(ids.size()) + " pairs:";
  for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
  if (ids.size() > 20) msg += " ...";
  throw MissingScores(msg);
}

/// Reads a score checkpoint, dropping a torn final line.
Dataset read_checkpoint(const Path& path, std::ostream& log) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  Dataset ds;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error&) {
      if (i + 1 == lines.size() && i > 0) {
        log << "checkpoint: dropping incomplete last line\n";
        break;
      }
      throw SchemaError(i + 1, "malformed checkpoint line");
    }
    if (i == 0) {
      ds.header = header_from_json(j, 1);
    } else {
      ds.records.push_back(record_from_json(j, i + 1));
    }
  }
  return ds;
}

}  // namespace

int cmd_variants(const RunConfig& cfg, const VariantsArgs& args, std::ostream& log) {
  const auto all_tasks = load_tasks(args.tasks);
  std::vector<TaskSpec> tasks;
  std::size_t warnings = 0;
  for (const auto& t : all_tasks) {
    try {
      python::parse(t.reference_code);
      tasks.push_back(t);
    } catch (const ParseError& e) {
      log << "warning: task " << t.task_id << " skipped: " << e.what() << "\n";
      ++warnings;
    }
  }

  std::map<std::string, std::vector<VariantRecord>> per_task;
  for (const auto& t : tasks) {
    try {
      per_task[t.task_id] = generate_mutants(t.reference_code, cfg.mutation, t.task_id);
    } catch (const Error& e) {
      log << "warning: task " << t.task_id << " mutation failed: " << e.what() << "\n";
      ++warnings;
    }
  }

  std::unique_ptr<Optimizer> optimizer;
  if (!args.no_optimizer) {
    if (cfg.stub_fixture) {
      optimizer = std::make_unique<StubOptimizer>(*cfg.stub_fixture);
    } else if (args.live) {
      optimizer = std::make_unique<HttpOptimizer>(cfg.provider);
    }
  }
  std::size_t optimized = 0;
  if (optimizer) {
    for (const auto& o : request_all(*optimizer, tasks, cfg.provider.max_in_flight)) {
      if (!o.result) {
        log << "warning: task " << o.task_id << " optimizer failed: " << o.error << "\n";
        ++warnings;
        continue;
      }
      const auto* v = std::get_if<OptimizedVariant>(&*o.result);
      if (!v) {
        log << "task " << o.task_id << ": not optimizable\n";
        continue;
      }
      const auto& task = *std::find_if(tasks.begin(), tasks.end(),
                                       [&](const TaskSpec& t) { return t.task_id == o.task_id; });
      auto rec = optimized_variant_record(task, *v);
      if (const auto bad = validate_variant(rec, task.reference_code); !bad.empty()) {
        log << "warning: task " << o.task_id << " optimized variant rejected: " << bad.front().field
            << " " << bad.front().rule << "\n";
        ++warnings;
        continue;
      }
      per_task[o.task_id].push_back(std::move(rec));
      ++optimized;
    }
  }

  std::vector<VariantRecord> variants;
  Dataset pairs = fresh_dataset(cfg);
  for (const auto& t : tasks) {
    for (auto& v : per_task[t.task_id]) {
      CodePairRecord p;
      p.pair_id = v.variant_id;
      p.task_id = t.task_id;
      p.code_ori = t.reference_code;
      p.code_var = v.variant_code;
      p.level = t.level;
      pairs.records.push_back(std::move(p));
      variants.push_back(std::move(v));
    }
  }
  save_variants(variants, args.out);
  if (args.pairs) save_atomic(pairs, *args.pairs);
  log << "variants: " << variants.size() - optimized << " mutated, " << optimized << " optimized from "
      << tasks.size() << " tasks";
  if (warnings) log << " (" << warnings << " warnings)";
  log << "\n";
  return 0;
}

int cmd_score(const RunConfig& cfg, const ScoreArgs& args, std::ostream& log) {
  if (cfg.runner.empty()) throw ConfigError("no runner command; pass --runner or set [harness] runner");
  const auto tasks = load_tasks(args.tasks);
  const auto task_of = index_tasks(tasks);
  const Dataset input = load_dataset(args.pairs);
  const std::string digest = config_digest(cfg);

  std::map<std::string, CodePairRecord> done;
  if (!args.restart && std::filesystem::exists(args.out)) {
    const Dataset prior = read_checkpoint(args.out, log);
    if (prior.header.config_digest != digest) {
      throw ConfigError(args.out.string() + " was written with a different configuration; use --restart");
    }
    std::set<std::string> input_ids;
    for (const auto& r : input.records) input_ids.insert(r.pair_id);
    for (const auto& r : prior.records) {
      if (!input_ids.count(r.pair_id)) throw SchemaError(0, "checkpoint pair '" + r.pair_id + "' is not in the input");
      if (r.df_score) done[r.pair_id] = r;
    }
    log << "resuming: " << done.size() << " of " << input.records.size() << " pairs already scored\n";
  }

  Dataset checkpoint = fresh_dataset(cfg);
  std::vector<CodePairRecord> pending;
  for (const auto& r : input.records) {
    if (auto it = done.find(r.pair_id); it != done.end()) {
      checkpoint.records.push_back(it->second);
    } else {
      pending.push_back(r);
    }
  }
  save_atomic(checkpoint, args.out);

  Path errors_path = args.out;
  errors_path += ".errors.jsonl";
  std::ofstream errors(errors_path, std::ios::trunc);
  if (!errors) throw IOError("cannot open " + errors_path.string());

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr fatal;
  std::size_t finished = 0, failed = 0;

  auto worker = [&] {
    ProcessRunner runner(cfg.runner);
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size() || stop) return;
      CodePairRecord rec = pending[i];
      try {
        const auto it = task_of.find(rec.task_id);
        if (it == task_of.end()) throw SchemaError(0, "no task '" + rec.task_id + "' in " + args.tasks.string());
        fuzz::FuzzPlan plan;
        plan.seed = fuzz::derive_seed(cfg.seed, rec.pair_id);
        plan.bounds = cfg.bounds;
        plan.corpus_fraction = cfg.corpus_fraction;
        const PairScore ps = score_pair(rec, *it->second, cfg.harness, plan, runner);
        rec.df_score = ps.df_score;
        if (ps.rep_scores.empty()) {
          rec.rep_scores.reset();
        } else {
          rec.rep_scores = ps.rep_scores;
        }
        std::lock_guard lock(mu);
        append_record(rec, args.out);
        done[rec.pair_id] = rec;
        ++finished;
        log << "[" << done.size() << "/" << input.records.size() << "] " << rec.pair_id
            << " df_score=" << fmt(ps.df_score, "%.4f") << "\n";
      } catch (const RunnerNotFound&) {
        std::lock_guard lock(mu);
        if (!fatal) fatal = std::current_exception();
        stop = true;
        return;
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        ++failed;
        nlohmann::ordered_json j;
        j["pair_id"] = rec.pair_id;
        j["error"] = e.what();
        errors << j.dump() << "\n" << std::flush;
        log << "warning: pair " << rec.pair_id << " failed: " << e.what() << "\n";
      }
    }
  };

  const std::size_t n_workers = std::min(worker_count(cfg), std::max<std::size_t>(pending.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  Dataset result = fresh_dataset(cfg);
  for (const auto& r : input.records) {
    auto it = done.find(r.pair_id);
    result.records.push_back(it != done.end() ? it->second : r);
  }
  save_atomic(result, args.out);
  log << "scored " << finished << " pairs this run";
  if (failed) log << ", " << failed << " failed (see " << errors_path.string() << ")";
  log << "\n";
  return 0;
}

int cmd_surface(const RunConfig& cfg, const SurfaceArgs& args, std::ostream& log) {
  Dataset ds = load_dataset(args.pairs);
  std::vector<CodePair> pairs;
  pairs.reserve(ds.records.size());
  for (const auto& r : ds.records) pairs.emplace_back(r.code_ori, r.code_var);
  omp_set_num_threads(static_cast<int>(worker_count(cfg)));
  const auto results = surface_batch(pairs, cfg.surface);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok()) {
      ds.records[i].surface_sim = results[i].scores.surface;
    } else {
      ds.records[i].surface_sim.reset();
      log << "warning: pair " << ds.records[i].pair_id << ": " << results[i].error << "\n";
      ++failed;
    }
  }
  ds.header.config_digest = config_digest(cfg);
  save_atomic(ds, args.out);
  log << "surface similarity for " << results.size() - failed << " of " << results.size() << " pairs\n";
  return 0;
}

int cmd_audit(const RunConfig& cfg, const AuditArgs& args, std::ostream& out, std::ostream& log) {
  (void)cfg;
  if (args.datasets.empty()) throw ConfigError("audit needs at least one --dataset");
  std::vector<Dataset> runs;
  for (const auto& p : args.datasets) {
    runs.push_back(load_dataset(p));
    merge_scores(runs.back(), args.scores, args.datasets.size() > 1, log);
  }
  std::vector<std::string> metrics = args.metrics;
  if (metrics.empty()) {
    std::set<std::string> all;
    for (const auto& ds : runs) {
      for (auto& m : metric_names(ds)) all.insert(m);
    }
    metrics.assign(all.begin(), all.end());
  }
  if (metrics.empty()) throw MissingScores("no metric scores found; pass --scores");

  struct Row {
    std::string run, metric;
    std::size_t n = 0, n_eq = 0, n_intra = 0, n_inter = 0;
    double mae = 0;
    std::optional<SpearmanResult> sp;
    std::optional<double> d;
  };
  std::vector<Row> rows;
  for (const auto& metric : metrics) {
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const Dataset& ds = runs[k];
      require_metric(ds, metric);
      const auto s = score_series(ds, metric);
      if (s.truth.empty()) throw EmptySeries("no scored pairs in " + args.datasets[k].string());
      Row row;
      row.run = runs.size() == 1 ? "all" : std::to_string(k + 1);
      row.metric = metric;
      row.n = s.truth.size();
      row.mae = mae(s.metric_scores, s.truth);

      std::vector<double> eq_metric, eq_surface, intra, inter;
      for (const auto& r : ds.records) {
        if (!scored(r)) continue;
        const double m = metric == "surface_sim" ? *r.surface_sim : r.metric_scores.at(metric);
        if (*r.df_score == 1.0) {
          intra.push_back(m);
          if (r.surface_sim) {
            eq_metric.push_back(m);
            eq_surface.push_back(*r.surface_sim);
          }
        } else {
          inter.push_back(m);
        }
      }
      row.n_eq = eq_metric.size();
      row.n_intra = intra.size();
      row.n_inter = inter.size();
      try {
        row.sp = spearman(eq_metric, eq_surface);
      } catch (const DegenerateInput&) {
      }
      try {
        row.d = distinguishability(intra, inter);
      } catch (const Error&) {
      }
      rows.push_back(std::move(row));
    }
  }

  auto opt = [](const std::optional<double>& v, bool csv) {
    return v ? (csv ? csv_num(*v) : fmt(*v, "%.4f")) : std::string(csv ? "" : "n/a");
  };
  if (args.csv) {
    std::ofstream csv(*args.csv);
    if (!csv) throw IOError("cannot open " + args.csv->string());
    csv << "run,metric,n,mae,spearman_rho,spearman_p,spearman_n,n_intra,n_inter,distinguishability\n";
    for (const auto& r : rows) {
      csv << r.run << "," << r.metric << "," << r.n << "," << csv_num(r.mae) << ","
          << opt(r.sp ? std::optional(r.sp->rho) : std::nullopt, true) << ","
          << opt(r.sp ? std::optional(r.sp->p_value) : std::nullopt, true) << "," << r.n_eq << ","
          << r.n_intra << "," << r.n_inter << "," << opt(r.d, true) << "\n";
    }
  }

  char line[256];
  std::snprintf(line, sizeof line, "%-6s %-16s %6s %8s %8s %10s %8s\n", "run", "metric", "n", "MAE",
                "rho", "p", "d");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-6s %-16s %6zu %8.4f %8s %10s %8s\n", r.run.c_str(), r.metric.c_str(),
                  r.n, r.mae, opt(r.sp ? std::optional(r.sp->rho) : std::nullopt, false).c_str(),
                  r.sp ? fmt(r.sp->p_value, "%.3g").c_str() : "n/a", opt(r.d, false).c_str());
    out << line;
  }
  if (runs.size() > 1) {
    out << "\nacross " << runs.size() << " runs (mean +- std):\n";
    for (const auto& metric : metrics) {
      std::vector<double> maes, ds;
      for (const auto& r : rows) {
        if (r.metric != metric) continue;
        maes.push_back(r.mae);
        if (r.d) ds.push_back(*r.d);
      }
      const auto m = mean_std(maes);
      out << "  " << metric << ": MAE " << fmt(m.mean, "%.4f") << " +- " << fmt(m.std, "%.4f");
      if (!ds.empty()) {
        const auto d = mean_std(ds);
        out << ", d " << fmt(d.mean, "%.4f") << " +- " << fmt(d.std, "%.4f");
      }
      out << "\n";
    }
  }
  return 0;
}

int cmd_regions(const RunConfig& cfg, const RegionsArgs& args, std::ostream& out, std::ostream& log) {
  Dataset ds = load_dataset(args.dataset);
  merge_scores(ds, args.scores, false, log);
  std::vector<std::string> metrics = args.metrics;
  if (metrics.empty()) {
    for (auto& m : metric_names(ds)) {
      if (m != "surface_sim") metrics.push_back(m);
    }
  }
  for (const auto& m : metrics) require_metric(ds, m);
  require_metric(ds, "surface_sim");

  RegionThresholds th;
  if (args.thresholds) {
    th = *args.thresholds;
    if (const auto v = validate_thresholds(th); !v.empty()) {
      throw ConfigError("thresholds: " + v.front().field + " " + v.front().rule);
    }
    out << "thresholds (given)";
  } else {
    if (metrics.empty()) throw MissingScores("no metric scores for threshold selection; pass --scores");
    omp_set_num_threads(static_cast<int>(worker_count(cfg)));
    ThresholdSelection sel;
    try {
      sel = select_thresholds(ds, cfg.delta, metrics, cfg.error_flavor);
    } catch (const NoFeasibleCandidate& e) {
      throw NoFeasibleCandidate(std::string(e.what()) +
                                "; a smaller --delta or more pairs near the corners may help");
    }
    th = sel.thresholds;
    out << "objective " << fmt(sel.objective) << " over " << sel.candidates << " candidates\n";
    out << "thresholds (selected, delta " << cfg.delta << ", " << to_string(cfg.error_flavor) << ")";
  }
  out << ": x_lo " << th.x_lo << " x_hi " << th.x_hi << " y_lo " << th.y_lo << " y_hi " << th.y_hi << "\n";

  const auto cov = region_coverage(ds, th);
  for (auto label : {RegionLabel::SFD, RegionLabel::DFS, RegionLabel::Control}) {
    const auto i = static_cast<std::size_t>(label);
    out << to_string(label) << " " << cov.counts[i] << " (" << fmt(100 * cov.fractions[i], "%.1f") << "%)\n";
  }
  try {
    out << "mean boundary distance " << fmt(mean_boundary_distance(ds, th)) << "\n";
  } catch (const NoControlPoints&) {
    out << "mean boundary distance n/a (no control points)\n";
  }

  if (args.scatter) {
    std::ofstream csv(*args.scatter);
    if (!csv) throw IOError("cannot open " + args.scatter->string());
    csv << "pair_id,x,y,label\n";
    for (const auto& r : ds.records) {
      if (!scored(r)) continue;
      csv << r.pair_id << "," << csv_num(*r.surface_sim) << "," << csv_num(*r.df_score) << ","
          << to_string(classify(*r.surface_sim, *r.df_score, th)) << "\n";
    }
    log << "scatter data written to " << args.scatter->string() << "\n";
  }
  return 0;
}

int cmd_report(const RunConfig& cfg, const ReportArgs& args, std::ostream& out) {
  (void)cfg;
  const Dataset ds = load_dataset(args.dataset);
  auto group_of = [](const std::string& id) -> std::string {
    if (id.rfind("x:", 0) == 0) return "cross";
    if (id.size() > 4 && id.compare(id.size() - 4, 4, ":opt") == 0) return "optimized";
    if (const auto c = id.rfind(':'); c != std::string::npos && id.compare(c, 2, ":m") == 0) return "mutated";
    return "other";
  };
  struct Group {
    std::size_t n = 0, timed_out = 0, unscored = 0;
    std::vector<double> surface, df;
  };
  std::map<std::string, Group> groups;
  for (const auto& r : ds.records) {
    for (const auto& name : {group_of(r.pair_id), std::string("all")}) {
      auto& g = groups[name];
      ++g.n;
      if (!r.df_score) {
        ++g.unscored;
      } else if (*r.df_score == kTimedOutSentinel) {
        ++g.timed_out;
      } else {
        g.df.push_back(*r.df_score);
      }
      if (r.surface_sim) g.surface.push_back(*r.surface_sim);
    }
  }
  out << "dataset " << args.dataset.string() << " (" << ds.header.schema << ", tool "
      << ds.header.tool_version << ", config " << ds.header.config_digest.substr(0, 12) << ")\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %6s %8s %8s %18s %18s\n", "group", "pairs", "timeout", "unscored",
                "surface_sim", "df_score");
  out << line;
  auto ms = [](const std::vector<double>& v) {
    if (v.empty()) return std::string("n/a");
    const auto m = mean_std(v);
    return fmt(m.mean, "%.3f") + " +- " + fmt(m.std, "%.3f");
  };
  for (const auto& [name, g] : groups) {
    std::snprintf(line, sizeof line, "%-10s %6zu %8zu %8zu %18s %18s\n", name.c_str(), g.n, g.timed_out,
                  g.unscored, ms(g.surface).c_str(), ms(g.df).c_str());
    out << line;
  }
  std::size_t placed = 0;
  for (const auto& r : ds.records) placed += scored(r) && r.surface_sim;
  if (placed > 0) {
    std::vector<RegionPoint> pts;
    for (const auto& r : ds.records) {
      if (scored(r) && r.surface_sim) pts.push_back({*r.surface_sim, *r.df_score, {}});
    }
    const auto cov = region_coverage(pts, args.thresholds);
    out << "regions at (" << args.thresholds.x_lo << ", " << args.thresholds.x_hi << ", "
        << args.thresholds.y_lo << ", " << args.thresholds.y_hi << "): SFD " << cov.counts[0] << ", DFS "
        << cov.counts[1] << ", Control " << cov.counts[2] << "\n";
  }
  return 0;
}

}  // namespace semdiff::cli
