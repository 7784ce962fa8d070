#include "semdiff/core_model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "semdiff/errors.hpp"

namespace semdiff {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Level level) {
  return level == Level::function ? "function" : "program";
}

Level level_from_string(std::string_view text) {
  if (text == "function") return Level::function;
  if (text == "program") return Level::program;
  throw SchemaError(0, "unknown level '" + std::string(text) + "'");
}

std::string_view to_string(VariantKind kind) {
  return kind == VariantKind::optimized ? "optimized" : "mutated";
}

VariantKind variant_kind_from_string(std::string_view text) {
  if (text == "optimized") return VariantKind::optimized;
  if (text == "mutated") return VariantKind::mutated;
  throw SchemaError(0, "unknown variant_kind '" + std::string(text) + "'");
}

namespace {

constexpr double kMeanTolerance = 1e-12;

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string fmt_real(double v) {
  return json(v).dump();
}

// Field accessors that turn nlohmann type errors into SchemaError with the
// offending line number.
const json& require(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(line, std::string("missing field '") + key + "'");
  }
  return *it;
}

std::string get_string(const json& j, const char* key, std::size_t line) {
  const json& v = require(j, key, line);
  if (!v.is_string()) {
    throw SchemaError(line, std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> opt_string(const json& j, const char* key,
                                      std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw SchemaError(line, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<double> opt_number(const json& j, const char* key,
                                 std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    throw SchemaError(line, std::string("field '") + key + "' must be a number");
  }
  return it->get<double>();
}

template <typename Fn>
void read_lines(const std::filesystem::path& path, Fn&& on_line) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open '" + path.string() + "' for reading");
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(line_no, "expected a JSON object");
    on_line(j, line_no);
  }
  if (in.bad()) throw IOError("read failure on '" + path.string() + "'");
}

std::ofstream open_for_write(const std::filesystem::path& path,
                             std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw IOError("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IOError("write failure on '" + path.string() + "'");
}

}  // namespace

std::vector<Violation> validate_record(const CodePairRecord& r) {
  std::vector<Violation> out;
  if (r.pair_id.empty()) out.push_back({"pair_id", "must be non-empty"});
  if (r.surface_sim && !in_unit(*r.surface_sim)) {
    out.push_back({"surface_sim", "must lie in [0,1], got " + fmt_real(*r.surface_sim)});
  }
  if (r.df_score && !(in_unit(*r.df_score) || *r.df_score == kTimedOutSentinel)) {
    out.push_back({"df_score", "must lie in [0,1] or equal -1, got " + fmt_real(*r.df_score)});
  }
  if (r.rep_scores) {
    bool reps_ok = true;
    for (double s : *r.rep_scores) {
      if (!in_unit(s)) {
        out.push_back({"rep_scores", "entry " + fmt_real(s) + " outside [0,1]"});
        reps_ok = false;
      }
    }
    if (reps_ok && !r.rep_scores->empty()) {
      const double mean =
          std::accumulate(r.rep_scores->begin(), r.rep_scores->end(), 0.0) /
          static_cast<double>(r.rep_scores->size());
      if (!r.df_score) {
        out.push_back({"df_score", "absent although rep_scores is non-empty"});
      } else if (std::fabs(*r.df_score - mean) > kMeanTolerance) {
        out.push_back({"df_score", "mean mismatch: mean of rep_scores is " +
                                       fmt_real(mean) + ", df_score is " +
                                       fmt_real(*r.df_score)});
      }
    }
  }
  for (const auto& [name, value] : r.metric_scores) {
    if (!std::isfinite(value) || value < 0.0) {
      out.push_back({"metric_scores." + name, "must be a finite real >= 0"});
    }
  }
  return out;
}

std::vector<Violation> validate_task(const TaskSpec& t) {
  std::vector<Violation> out;
  if (t.task_id.empty()) out.push_back({"task_id", "must be non-empty"});
  const bool has_entry = t.entry_point && !t.entry_point->empty();
  if (t.level == Level::function && !has_entry) {
    out.push_back({"entry_point", "required when level=function"});
  }
  if (t.level == Level::program && has_entry) {
    out.push_back({"entry_point", "must be absent when level=program"});
  }
  if (t.binding_program.empty()) {
    out.push_back({"binding_program", "must be non-empty"});
  }
  return out;
}

std::vector<Violation> validate_thresholds(const RegionThresholds& th) {
  std::vector<Violation> out;
  for (auto [name, v] : {std::pair{"x_lo", th.x_lo}, {"x_hi", th.x_hi},
                         {"y_lo", th.y_lo}, {"y_hi", th.y_hi}}) {
    if (!in_unit(v)) out.push_back({name, "must lie in [0,1]"});
  }
  if (!(th.x_lo < th.x_hi)) out.push_back({"x_lo", "must be < x_hi"});
  if (!(th.y_lo < th.y_hi)) out.push_back({"y_lo", "must be < y_hi"});
  return out;
}

std::vector<Violation> validate_variant(const VariantRecord& v,
                                        std::string_view reference_code) {
  std::vector<Violation> out;
  if (v.variant_id.empty()) out.push_back({"variant_id", "must be non-empty"});
  if (!v.parses_ok) out.push_back({"parses_ok", "must be true for admitted variants"});
  if (v.variant_code == reference_code) {
    out.push_back({"variant_code", "identical to the reference code"});
  }
  return out;
}

ordered_json to_json(const CodePairRecord& r) {
  ordered_json j;
  j["pair_id"] = r.pair_id;
  j["task_id"] = r.task_id;
  j["code_ori"] = r.code_ori;
  j["code_var"] = r.code_var;
  j["level"] = to_string(r.level);
  if (r.surface_sim) j["surface_sim"] = *r.surface_sim;
  if (r.df_score) j["df_score"] = *r.df_score;
  if (r.rep_scores) j["rep_scores"] = *r.rep_scores;
  ordered_json metrics = ordered_json::object();
  for (const auto& [name, value] : r.metric_scores) metrics[name] = value;
  j["metric_scores"] = std::move(metrics);
  return j;
}

ordered_json to_json(const DatasetHeader& h) {
  ordered_json j;
  j["schema"] = h.schema;
  j["tool_version"] = h.tool_version;
  j["config_digest"] = h.config_digest;
  if (h.created) j["created"] = *h.created;
  return j;
}

ordered_json to_json(const TaskSpec& t) {
  ordered_json j;
  j["task_id"] = t.task_id;
  j["source_benchmark"] = t.source_benchmark;
  if (t.nl_description) j["nl_description"] = *t.nl_description;
  j["reference_code"] = t.reference_code;
  j["level"] = to_string(t.level);
  if (t.entry_point) j["entry_point"] = *t.entry_point;
  j["binding_program"] = t.binding_program;
  if (t.example_input) j["example_input"] = *t.example_input;
  return j;
}

ordered_json to_json(const VariantRecord& v) {
  ordered_json j;
  j["variant_id"] = v.variant_id;
  j["task_id"] = v.task_id;
  j["variant_code"] = v.variant_code;
  j["variant_kind"] = to_string(v.variant_kind);
  j["provenance"] = v.provenance;
  j["parses_ok"] = v.parses_ok;
  return j;
}

CodePairRecord record_from_json(const json& j, std::size_t line) {
  CodePairRecord r;
  r.pair_id = get_string(j, "pair_id", line);
  r.task_id = get_string(j, "task_id", line);
  r.code_ori = get_string(j, "code_ori", line);
  r.code_var = get_string(j, "code_var", line);
  try {
    r.level = level_from_string(get_string(j, "level", line));
  } catch (const SchemaError& e) {
    throw SchemaError(line, e.what());
  }
  r.surface_sim = opt_number(j, "surface_sim", line);
  r.df_score = opt_number(j, "df_score", line);
  if (auto it = j.find("rep_scores"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw SchemaError(line, "field 'rep_scores' must be an array");
    std::vector<double> reps;
    for (const auto& v : *it) {
      if (!v.is_number()) throw SchemaError(line, "rep_scores entries must be numbers");
      reps.push_back(v.get<double>());
    }
    r.rep_scores = std::move(reps);
  }
  if (auto it = j.find("metric_scores"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaError(line, "field 'metric_scores' must be an object");
    for (const auto& [name, v] : it->items()) {
      if (!v.is_number()) {
        throw SchemaError(line, "metric_scores['" + name + "'] must be a number");
      }
      r.metric_scores[name] = v.get<double>();
    }
  }
  return r;
}

DatasetHeader header_from_json(const json& j, std::size_t line) {
  DatasetHeader h;
  h.schema = get_string(j, "schema", line);
  if (h.schema != kSchemaTag) {
    throw SchemaError(line, "unsupported schema '" + h.schema + "'");
  }
  h.tool_version = get_string(j, "tool_version", line);
  h.config_digest = get_string(j, "config_digest", line);
  h.created = opt_string(j, "created", line);
  return h;
}

TaskSpec task_from_json(const json& j, std::size_t line) {
  TaskSpec t;
  t.task_id = get_string(j, "task_id", line);
  t.source_benchmark = opt_string(j, "source_benchmark", line).value_or("");
  t.nl_description = opt_string(j, "nl_description", line);
  t.reference_code = get_string(j, "reference_code", line);
  try {
    t.level = level_from_string(get_string(j, "level", line));
  } catch (const SchemaError& e) {
    throw SchemaError(line, e.what());
  }
  t.entry_point = opt_string(j, "entry_point", line);
  t.binding_program = get_string(j, "binding_program", line);
  t.example_input = opt_string(j, "example_input", line);
  return t;
}

VariantRecord variant_from_json(const json& j, std::size_t line) {
  VariantRecord v;
  v.variant_id = get_string(j, "variant_id", line);
  v.task_id = get_string(j, "task_id", line);
  v.variant_code = get_string(j, "variant_code", line);
  try {
    v.variant_kind = variant_kind_from_string(get_string(j, "variant_kind", line));
  } catch (const SchemaError& e) {
    throw SchemaError(line, e.what());
  }
  const json& prov = require(j, "provenance", line);
  if (!prov.is_array()) throw SchemaError(line, "field 'provenance' must be an array");
  for (const auto& p : prov) {
    if (!p.is_string()) throw SchemaError(line, "provenance entries must be strings");
    v.provenance.push_back(p.get<std::string>());
  }
  const json& ok = require(j, "parses_ok", line);
  if (!ok.is_boolean()) throw SchemaError(line, "field 'parses_ok' must be a boolean");
  v.parses_ok = ok.get<bool>();
  return v;
}

std::string record_line(const CodePairRecord& record) {
  return to_json(record).dump();
}

std::string header_line(const DatasetHeader& header) {
  return to_json(header).dump();
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset ds;
  bool have_header = false;
  std::set<std::string> seen;
  read_lines(path, [&](const json& j, std::size_t line) {
    if (!have_header) {
      ds.header = header_from_json(j, line);
      have_header = true;
      return;
    }
    CodePairRecord r = record_from_json(j, line);
    if (auto v = validate_record(r); !v.empty()) {
      throw SchemaError(line, v.front().field + ": " + v.front().rule);
    }
    if (!seen.insert(r.pair_id).second) {
      throw SchemaError(line, "duplicate pair_id '" + r.pair_id + "'");
    }
    ds.records.push_back(std::move(r));
  });
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << header_line(ds.header) << '\n';
  for (const auto& r : ds.records) out << record_line(r) << '\n';
  check_written(out, path);
}

void append_record(const CodePairRecord& record,
                   const std::filesystem::path& path) {
  auto out = open_for_write(path, std::ios::app);
  out << record_line(record) << '\n';
  check_written(out, path);
}

std::vector<TaskSpec> load_tasks(const std::filesystem::path& path) {
  std::vector<TaskSpec> tasks;
  std::set<std::string> seen;
  read_lines(path, [&](const json& j, std::size_t line) {
    TaskSpec t = task_from_json(j, line);
    if (auto v = validate_task(t); !v.empty()) {
      throw SchemaError(line, v.front().field + ": " + v.front().rule);
    }
    if (!seen.insert(t.task_id).second) {
      throw SchemaError(line, "duplicate task_id '" + t.task_id + "'");
    }
    tasks.push_back(std::move(t));
  });
  return tasks;
}

void save_tasks(const std::vector<TaskSpec>& tasks,
                const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& t : tasks) out << to_json(t).dump() << '\n';
  check_written(out, path);
}

std::vector<VariantRecord> load_variants(const std::filesystem::path& path) {
  std::vector<VariantRecord> variants;
  read_lines(path, [&](const json& j, std::size_t line) {
    variants.push_back(variant_from_json(j, line));
  });
  return variants;
}

void save_variants(const std::vector<VariantRecord>& variants,
                   const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& v : variants) out << to_json(v).dump() << '\n';
  check_written(out, path);
}

}  // namespace semdiff
