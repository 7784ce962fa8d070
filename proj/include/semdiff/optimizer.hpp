#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semdiff/core_model.hpp"

namespace semdiff {

enum class Strategy { Algorithmic, DataStructures, ColdPath, HotPath, Memoization, None };

std::string_view to_string(Strategy s);
/// Throws MalformedResponse on unknown names.
Strategy strategy_from_string(std::string_view name);

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4";
  // Name of the environment variable holding the API key.
  std::string credential_env = "SEMDIFF_LLM_KEY";
  double timeout_seconds = 120.0;
  int max_retries = 3;
  std::size_t max_in_flight = 4;
  // Every accepted live answer is appended here in fixture format.
  std::optional<std::filesystem::path> cache;
};

/// Throws ConfigError.
void validate(const ProviderConfig& cfg);

struct OptimizedVariant {
  std::string code;
  std::vector<std::string> strategies;

  bool operator==(const OptimizedVariant&) const = default;
};

struct NotOptimizable {
  bool operator==(const NotOptimizable&) const = default;
};

using OptimizationResult = std::variant<OptimizedVariant, NotOptimizable>;

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual OptimizationResult request(const TaskSpec& task) = 0;
};

/// Answers from a JSONL fixture of {"task_id", "code", "strategies"} lines.
/// Throws IOError or SchemaError on load; request() throws MalformedResponse
/// for unknown tasks.
class StubOptimizer : public Optimizer {
 public:
  explicit StubOptimizer(const std::filesystem::path& fixture);
  OptimizationResult request(const TaskSpec& task) override;
  std::size_t size() const { return answers_.size(); }

 private:
  std::map<std::string, OptimizationResult> answers_;
};

/// Chat-completion client. Replies that do not decode or whose code does not
/// parse are retried up to max_retries times.
class HttpOptimizer : public Optimizer {
 public:
  explicit HttpOptimizer(ProviderConfig cfg);
  OptimizationResult request(const TaskSpec& task) override;

 private:
  std::string call(const std::string& prompt, const std::string& key);
  void remember(const std::string& task_id, const OptimizationResult& result);

  ProviderConfig cfg_;
  std::mutex cache_mutex_;
};

std::string build_prompt(const TaskSpec& task);

/// Decodes the model's JSON reply (optionally wrapped in a code fence).
/// Throws MalformedResponse when the shape is wrong, the strategies are
/// unknown, None is mixed with others, or the code does not parse.
OptimizationResult parse_reply(std::string_view content);

std::string strip_code_fence(std::string_view text);

std::string fixture_line(const std::string& task_id, const OptimizationResult& result);

struct OptimizationOutcome {
  std::string task_id;
  std::optional<OptimizationResult> result;
  std::string error;  // set when result is empty
};

/// Runs request() for every task with at most `max_in_flight` concurrent
/// calls. Results come back in task order.
std::vector<OptimizationOutcome> request_all(Optimizer& optimizer,
                                             const std::vector<TaskSpec>& tasks,
                                             std::size_t max_in_flight);

/// Turns an accepted answer into a variant record ("<task>:opt").
VariantRecord optimized_variant_record(const TaskSpec& task, const OptimizedVariant& v);

}  // namespace semdiff
