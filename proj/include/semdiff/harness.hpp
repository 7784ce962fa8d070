#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semdiff/core_model.hpp"
#include "semdiff/fuzz.hpp"
#include "semdiff/subprocess.hpp"

namespace semdiff {

struct HarnessConfig {
  // Unset means the level default (2000 function, 1000 program).
  std::optional<std::size_t> n_inputs;
  std::size_t repetitions = 5;
  double repetition_budget_seconds = 60.0;
  double per_input_timeout_seconds = 1.0;
  bool errors_match = true;
};

/// Throws ConfigError.
void validate(const HarnessConfig& cfg);
std::size_t effective_inputs(const HarnessConfig& cfg, Level level);

struct Outcome {
  enum class Kind { output, error, binding_error, timeout };
  Kind kind = Kind::output;
  // Canonical value for outputs, the full "ERROR:<class>" or
  // "BINDERR:<class>" token otherwise.
  std::string text;

  bool operator==(const Outcome&) const = default;
};

/// Parses "OUT:...", "ERROR:..." or "BINDERR:...". Throws MalformedResponse.
Outcome parse_outcome(std::string_view wire);

struct ExecutionResult {
  Outcome a;
  Outcome b;
};

/// Neither side may be a timeout.
bool canonical_equal(const Outcome& a, const Outcome& b, bool errors_match);

struct InitRequest {
  Level mode = Level::function;
  std::string code_a;
  std::string code_b;
  std::string binding;
  std::optional<std::string> entry;
};

InitRequest init_request(const CodePairRecord& pair, const TaskSpec& task);

class Runner {
 public:
  virtual ~Runner() = default;
  virtual void init(const InitRequest& req) = 0;
  virtual ExecutionResult exec(fuzz::ByteView buf, double timeout_seconds) = 0;
};

/// Runner backed by an external process speaking the line-delimited JSON
/// protocol. A timed-out exec kills the process; the next call restarts and
/// re-initialises it.
class ProcessRunner : public Runner {
 public:
  explicit ProcessRunner(std::vector<std::string> command,
                         std::chrono::milliseconds init_timeout = std::chrono::seconds(30));
  ~ProcessRunner() override;

  void init(const InitRequest& req) override;
  ExecutionResult exec(fuzz::ByteView buf, double timeout_seconds) override;
  void shutdown();

  std::size_t restarts() const { return restarts_; }

 private:
  void start();
  nlohmann::json request(const nlohmann::json& msg, Subprocess::Clock::time_point deadline);

  std::vector<std::string> command_;
  std::chrono::milliseconds init_timeout_;
  std::unique_ptr<Subprocess> proc_;
  std::optional<InitRequest> current_;
  std::size_t restarts_ = 0;
};

struct RepetitionStats {
  enum class Status { scored, over_budget, nothing_executed };
  std::size_t index = 0;  // 1-based
  Status status = Status::scored;
  std::size_t n_inputs = 0;
  std::size_t executed = 0;
  std::size_t timeouts = 0;
  std::size_t binding_errors = 0;
  std::size_t matched = 0;
  // matched / executed; the reported score.
  double score = 0.0;
  // matched / n_inputs, i.e. counting exclusions as mismatches.
  double score_fixed_n = 0.0;
};

struct PairScore {
  std::vector<double> rep_scores;
  double df_score = kTimedOutSentinel;
  std::vector<RepetitionStats> repetitions;
};

/// Initialises `runner` with the pair and runs R repetitions of fresh
/// buffers. Buffers for repetition r come from derive_seed(plan.seed, r);
/// plan.n_inputs is replaced by the harness input count.
PairScore score_pair(const CodePairRecord& pair, const TaskSpec& task, const HarnessConfig& cfg,
                     const fuzz::FuzzPlan& plan, Runner& runner);

std::string base64_encode(fuzz::ByteView bytes);

}  // namespace semdiff
