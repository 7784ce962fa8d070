#pragma once

#include <string>

#include "semdiff/harness.hpp"

// Helpers for scoring pairs written in the toy runner's language.
namespace toy {

inline semdiff::HarnessConfig config(std::size_t n, std::size_t reps) {
  semdiff::HarnessConfig cfg;
  cfg.n_inputs = n;
  cfg.repetitions = reps;
  cfg.per_input_timeout_seconds = 2.0;
  cfg.repetition_budget_seconds = 60.0;
  return cfg;
}

inline semdiff::CodePairRecord pair(const std::string& a, const std::string& b) {
  semdiff::CodePairRecord p;
  p.pair_id = "toy";
  p.task_id = "toy";
  p.code_ori = a;
  p.code_var = b;
  return p;
}

inline semdiff::PairScore score(const std::string& binding, const std::string& a,
                                const std::string& b, const semdiff::HarnessConfig& cfg,
                                semdiff::Runner& runner, std::uint64_t seed = 11) {
  semdiff::TaskSpec task;
  task.task_id = "toy";
  task.binding_program = binding;
  semdiff::fuzz::FuzzPlan plan;
  plan.seed = seed;
  plan.bounds = {4, 64};
  return semdiff::score_pair(pair(a, b), task, cfg, plan, runner);
}

inline semdiff::PairScore score(const std::string& binding, const std::string& a,
                                const std::string& b, const semdiff::HarnessConfig& cfg) {
  semdiff::ProcessRunner runner({SEMDIFF_TOY_RUNNER});
  return score(binding, a, b, cfg, runner);
}

inline semdiff::PairScore score(const std::string& binding, const std::string& a,
                                const std::string& b, std::size_t n, std::size_t reps) {
  return score(binding, a, b, config(n, reps));
}

}  // namespace toy
