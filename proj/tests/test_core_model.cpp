#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "semdiff/core_model.hpp"
#include "semdiff/errors.hpp"
#include "semdiff/fuzz.hpp"
#include "temp_dir.hpp"

using namespace semdiff;

namespace {

CodePairRecord valid_record(std::string id = "p1") {
  CodePairRecord r;
  r.pair_id = std::move(id);
  r.task_id = "t1";
  r.code_ori = "def f(x):\n    return x\n";
  r.code_var = "def f(x):\n    return x + 1\n";
  r.surface_sim = 0.875;
  r.df_score = 0.3;
  r.rep_scores = std::vector<double>{0.2, 0.4};
  return r;
}

CodePairRecord random_record(fuzz::Rng& rng, std::size_t i) {
  CodePairRecord r;
  r.pair_id = "pair-" + std::to_string(i);
  r.task_id = "task-" + std::to_string(rng.below(7));
  r.code_ori = "x = " + std::to_string(rng.below(1000)) + "\n";
  r.code_var = "y = \"\\u00e9\\n\"\n";
  r.level = rng.below(2) ? Level::function : Level::program;
  if (rng.below(3)) r.surface_sim = rng.unit();
  switch (rng.below(3)) {
    case 0:
      break;
    case 1:
      r.df_score = kTimedOutSentinel;
      break;
    default: {
      std::vector<double> reps(1 + rng.below(5));
      double s = 0.0;
      for (auto& x : reps) s += (x = static_cast<double>(rng.below(2001)) / 2000.0);
      r.df_score = s / static_cast<double>(reps.size());
      r.rep_scores = std::move(reps);
    }
  }
  for (std::size_t k = rng.below(3); k > 0; --k) r.metric_scores["m" + std::to_string(k)] = rng.unit() * 3;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("validate_record") {
  CHECK(validate_record(valid_record()).empty());

  auto r = valid_record();
  r.df_score = 0.5;
  const auto v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "df_score");
  CHECK(v[0].rule.find("0.3") != std::string::npos);

  r = valid_record();
  r.df_score = kTimedOutSentinel;
  r.rep_scores.reset();
  CHECK(validate_record(r).empty());

  r = valid_record();
  r.surface_sim = 1.5;
  CHECK(validate_record(r).size() == 1);
  r = valid_record();
  r.metric_scores["bleu"] = -0.1;
  CHECK(validate_record(r).size() == 1);
  r = valid_record();
  r.rep_scores = std::vector<double>{0.2, 1.2};
  r.df_score = 0.7;
  CHECK(!validate_record(r).empty());
}

TEST_CASE("validate thresholds, tasks and variants") {
  CHECK(validate_thresholds({0.65, 0.90, 0.10, 0.90}).empty());
  CHECK(validate_thresholds({0.9, 0.65, 0.1, 0.9}).size() == 1);
  CHECK(validate_thresholds({0.1, 0.2, 0.3, 1.2}).size() == 1);

  TaskSpec t;
  t.task_id = "t";
  t.reference_code = "def f(x):\n    return x\n";
  t.binding_program = "int 0 9";
  CHECK(validate_task(t).size() == 1);
  t.entry_point = "f";
  CHECK(validate_task(t).empty());
  t.level = Level::program;
  CHECK(validate_task(t).size() == 1);

  VariantRecord v{"v1", "t", "x = 2\n", VariantKind::mutated, {"CRP@4-5"}, true};
  CHECK(validate_variant(v, "x = 1\n").empty());
  CHECK(validate_variant(v, "x = 2\n").size() == 1);
  v.parses_ok = false;
  CHECK(validate_variant(v, "x = 1\n").size() == 1);
}

TEST_CASE("dataset round trip") {
  TempDir dir;
  fuzz::Rng rng(77);
  Dataset ds;
  ds.header.config_digest = "abc123";
  for (std::size_t i = 0; i < 100; ++i) ds.records.push_back(random_record(rng, i));
  for (const auto& r : ds.records) REQUIRE(validate_record(r).empty());

  const auto path = dir.path() / "ds.jsonl";
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  CHECK(back == ds);

  save_dataset(back, dir.path() / "again.jsonl");
  CHECK(slurp(path) == slurp(dir.path() / "again.jsonl"));
}

TEST_CASE("record line layout") {
  auto r = valid_record();
  r.metric_scores = {{"m1", 0.5}};
  r.surface_sim = 0.1;
  const auto line = record_line(r);
  CHECK(line.find(R"("metric_scores":{"m1":0.5})") != std::string::npos);
  CHECK(line.find(R"("surface_sim":0.1,)") != std::string::npos);
  CHECK(line.rfind(R"({"pair_id":"p1","task_id":"t1",)", 0) == 0);

  r.df_score = kTimedOutSentinel;
  r.rep_scores.reset();
  CHECK(record_line(r).find(R"("df_score":-1.0)") != std::string::npos);

  DatasetHeader h;
  h.config_digest = "ff";
  CHECK(header_line(h) == R"({"schema":"semdiff/1","tool_version":")" + std::string(kToolVersion) +
                              R"(","config_digest":"ff"})");
}

TEST_CASE("load_dataset edge cases") {
  TempDir dir;
  const auto empty = dir.path() / "empty.jsonl";
  { std::ofstream(empty).flush(); }
  const auto ds = load_dataset(empty);
  CHECK(ds.records.empty());
  CHECK(ds.header.schema == kSchemaTag);

  CHECK_THROWS_AS(load_dataset(dir.path() / "missing.jsonl"), IOError);

  auto r = valid_record();
  r.rep_scores.reset();
  r.df_score = 1.5;
  const auto bad = dir.path() / "bad.jsonl";
  {
    std::ofstream out(bad);
    out << header_line({}) << "\n" << record_line(valid_record("a")) << "\n" << record_line(r) << "\n";
  }
  try {
    load_dataset(bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 3);
  }

  const auto dup = dir.path() / "dup.jsonl";
  {
    std::ofstream out(dup);
    out << header_line({}) << "\n" << record_line(valid_record()) << "\n\n" << record_line(valid_record()) << "\n";
  }
  try {
    load_dataset(dup);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 4);
  }

  const auto garbage = dir.path() / "garbage.jsonl";
  { std::ofstream(garbage) << header_line({}) << "\n{\"pair_id\": 3}\n"; }
  CHECK_THROWS_AS(load_dataset(garbage), SchemaError);
  { std::ofstream(garbage) << "not json\n"; }
  CHECK_THROWS_AS(load_dataset(garbage), SchemaError);
  { std::ofstream(garbage) << R"({"schema":"other/9","tool_version":"x","config_digest":""})" << "\n"; }
  CHECK_THROWS_AS(load_dataset(garbage), SchemaError);
}

TEST_CASE("save to an unwritable path") {
  TempDir dir;
  CHECK_THROWS_AS(save_dataset({}, dir.path() / "no" / "such" / "dir" / "ds.jsonl"), IOError);
}

TEST_CASE("append_record checkpoints") {
  TempDir dir;
  const auto path = dir.path() / "ds.jsonl";
  Dataset ds;
  save_dataset(ds, path);
  append_record(valid_record("a"), path);
  append_record(valid_record("b"), path);
  const auto back = load_dataset(path);
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[1].pair_id == "b");
}

TEST_CASE("tasks and variants round trip") {
  TempDir dir;
  TaskSpec t;
  t.task_id = "t1";
  t.source_benchmark = "toy";
  t.nl_description = "identity";
  t.reference_code = "def f(x):\n    return x\n";
  t.entry_point = "f";
  t.binding_program = "int 0 9";
  TaskSpec p = t;
  p.task_id = "t2";
  p.level = Level::program;
  p.entry_point.reset();
  p.nl_description.reset();
  p.example_input = "3\n";
  save_tasks({t, p}, dir.path() / "tasks.jsonl");
  const auto tasks = load_tasks(dir.path() / "tasks.jsonl");
  REQUIRE(tasks.size() == 2);
  CHECK(tasks[0].nl_description == t.nl_description);
  CHECK(tasks[1].level == Level::program);
  CHECK(tasks[1].example_input == "3\n");
  CHECK(!tasks[1].entry_point);

  save_tasks({t, t}, dir.path() / "dup.jsonl");
  CHECK_THROWS_AS(load_tasks(dir.path() / "dup.jsonl"), SchemaError);

  VariantRecord v{"t1:m0", "t1", "def f(x):\n    return x + 1\n", VariantKind::mutated, {"AOR@21-22"}, true};
  save_variants({v}, dir.path() / "v.jsonl");
  const auto vs = load_variants(dir.path() / "v.jsonl");
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].provenance == v.provenance);
  CHECK(vs[0].variant_kind == VariantKind::mutated);
  CHECK(vs[0].parses_ok);
}

TEST_CASE("enum names") {
  CHECK(to_string(Level::function) == "function");
  CHECK(level_from_string("program") == Level::program);
  CHECK_THROWS_AS(level_from_string("module"), SchemaError);
  CHECK(variant_kind_from_string(to_string(VariantKind::optimized)) == VariantKind::optimized);
}
