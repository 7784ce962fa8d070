#include <doctest.h>

#include "semdiff/errors.hpp"
#include "semdiff/harness.hpp"
#include "toy_subject.hpp"

using namespace semdiff;

TEST_CASE("outcome parsing") {
  CHECK(parse_outcome("OUT:3") == Outcome{Outcome::Kind::output, "3"});
  CHECK(parse_outcome("ERROR:ValueError") == Outcome{Outcome::Kind::error, "ERROR:ValueError"});
  CHECK(parse_outcome("BINDERR:X").kind == Outcome::Kind::binding_error);
  CHECK_THROWS_AS(parse_outcome("3"), MalformedResponse);
}

TEST_CASE("canonical_equal") {
  const Outcome three{Outcome::Kind::output, "3"};
  const Outcome three_f{Outcome::Kind::output, "3.0"};
  const Outcome err{Outcome::Kind::error, "ERROR:ValueError"};
  const Outcome other{Outcome::Kind::error, "ERROR:KeyError"};
  CHECK(canonical_equal(three, three, true));
  CHECK_FALSE(canonical_equal(three, three_f, true));
  CHECK(canonical_equal(err, err, true));
  CHECK_FALSE(canonical_equal(err, err, false));
  CHECK_FALSE(canonical_equal(err, other, true));
  CHECK_FALSE(canonical_equal(three, err, true));
}

TEST_CASE("base64") {
  using fuzz::Bytes;
  CHECK(base64_encode(Bytes{}) == "");
  CHECK(base64_encode(Bytes{'f'}) == "Zg==");
  CHECK(base64_encode(Bytes{'f', 'o'}) == "Zm8=");
  CHECK(base64_encode(Bytes{'f', 'o', 'o'}) == "Zm9v");
}

TEST_CASE("config validation") {
  HarnessConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.per_input_timeout_seconds = 100;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = {};
  cfg.repetitions = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  CHECK(effective_inputs(HarnessConfig{}, Level::function) == 2000);
  CHECK(effective_inputs(HarnessConfig{}, Level::program) == 1000);
}

TEST_CASE("identical pair scores exactly one") {
  auto s = toy::score("int -50 50", "add 3\nmul 2", "add 3\nmul 2", 100, 3);
  CHECK(s.df_score == 1.0);
  CHECK(s.rep_scores.size() == 3);
}

TEST_CASE("shifted output scores zero") {
  auto s = toy::score("int 0 1000", "add 0", "add 1", 100, 2);
  CHECK(s.df_score == 0.0);
}

TEST_CASE("partial agreement equals the fraction of matching inputs") {
  // mod 2 vs mod 4 agree exactly when x mod 4 < 2.
  auto s = toy::score("int 0 255", "mod 2", "mod 4", 200, 1);
  REQUIRE(s.repetitions.size() == 1);
  const auto& r = s.repetitions[0];
  CHECK(r.executed == 200);
  CHECK(s.df_score > 0.3);
  CHECK(s.df_score < 0.7);
  CHECK(s.df_score == static_cast<double>(r.matched) / 200.0);
}

TEST_CASE("identical errors count as matches only when enabled") {
  HarnessConfig cfg = toy::config(50, 1);
  auto on = toy::score("int -10 10", "neg_error ValueError", "neg_error ValueError\nadd 0", cfg);
  CHECK(on.df_score == 1.0);
  cfg.errors_match = false;
  auto off = toy::score("int -10 10", "neg_error ValueError", "neg_error ValueError\nadd 0", cfg);
  CHECK(off.df_score < 1.0);
  CHECK(off.df_score <= on.df_score);
  CHECK(on.repetitions[0].matched > off.repetitions[0].matched);
}

TEST_CASE("binding failures are excluded") {
  auto s = toy::score("fail ValueError", "add 1", "add 2", 10, 2);
  CHECK(s.df_score == kTimedOutSentinel);
  CHECK(s.repetitions[0].binding_errors == 10);
  CHECK(s.repetitions[0].status == RepetitionStats::Status::nothing_executed);
}

TEST_CASE("all inputs timing out gives the sentinel") {
  HarnessConfig cfg = toy::config(3, 2);
  cfg.per_input_timeout_seconds = 0.05;
  auto s = toy::score("int 0 9", "sleep 500", "sleep 500", cfg);
  CHECK(s.df_score == kTimedOutSentinel);
  CHECK(s.rep_scores.empty());
  CHECK(s.repetitions[0].timeouts == 3);
  CHECK(s.repetitions[0].score_fixed_n == 0.0);
}

TEST_CASE("over-budget repetitions are discarded") {
  HarnessConfig cfg = toy::config(20, 2);
  cfg.per_input_timeout_seconds = 0.1;
  cfg.repetition_budget_seconds = 0.1;
  auto s = toy::score("int 0 9", "sleep 20", "sleep 20", cfg);
  CHECK(s.df_score == kTimedOutSentinel);
  CHECK(s.repetitions[0].status == RepetitionStats::Status::over_budget);
}

TEST_CASE("symmetric and deterministic") {
  auto ab = toy::score("int 0 255", "mod 3", "mod 5", 150, 2);
  auto ba = toy::score("int 0 255", "mod 5", "mod 3", 150, 2);
  auto ab2 = toy::score("int 0 255", "mod 3", "mod 5", 150, 2);
  CHECK(ab.rep_scores == ba.rep_scores);
  CHECK(ab.rep_scores == ab2.rep_scores);
  CHECK(ab.df_score == ab2.df_score);
}

TEST_CASE("a runner that dies mid-session is a crash") {
  CHECK_THROWS_AS(toy::score("int 0 9", "crash", "add 0", 5, 1), RunnerCrashed);
}

TEST_CASE("a runner that prints garbage is malformed") {
  CHECK_THROWS_AS(toy::score("int 0 9", "garbage", "add 0", 5, 1), MalformedResponse);
}

TEST_CASE("init rejection and missing executable") {
  CHECK_THROWS_AS(toy::score("int 0 9", "nonsense op", "add 0", 5, 1), RunnerCrashed);
  ProcessRunner missing({"/nonexistent/runner-binary"});
  CHECK_THROWS_AS(missing.init({}), RunnerNotFound);
}

TEST_CASE("runner restarts after a timeout and keeps scoring") {
  HarnessConfig cfg = toy::config(40, 1);
  cfg.per_input_timeout_seconds = 0.1;
  ProcessRunner runner({SEMDIFF_TOY_RUNNER});
  auto s = toy::score("int -5 30", "hang_if_neg\nadd 1", "add 1", cfg, runner);
  const auto& r = s.repetitions[0];
  CHECK(r.timeouts > 0);
  CHECK(r.executed + r.timeouts == 40);
  CHECK(s.df_score == 1.0);
  CHECK(r.score_fixed_n < 1.0);
  CHECK(runner.restarts() > 0);
}
