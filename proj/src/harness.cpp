#include "semdiff/harness.hpp"

#include <openssl/evp.h>

#include "semdiff/errors.hpp"

namespace semdiff {

using nlohmann::json;
using Clock = Subprocess::Clock;

void validate(const HarnessConfig& cfg) {
  if (cfg.n_inputs && *cfg.n_inputs == 0) throw ConfigError("n_inputs must be >= 1");
  if (cfg.repetitions == 0) throw ConfigError("repetitions must be >= 1");
  if (!(cfg.repetition_budget_seconds > 0)) throw ConfigError("repetition budget must be > 0");
  if (!(cfg.per_input_timeout_seconds > 0)) throw ConfigError("per-input timeout must be > 0");
  if (cfg.per_input_timeout_seconds > cfg.repetition_budget_seconds) {
    throw ConfigError("per-input timeout exceeds the repetition budget");
  }
}

std::size_t effective_inputs(const HarnessConfig& cfg, Level level) {
  if (cfg.n_inputs) return *cfg.n_inputs;
  return level == Level::function ? fuzz::kFunctionLevelInputs : fuzz::kProgramLevelInputs;
}

Outcome parse_outcome(std::string_view wire) {
  auto strip = [&](std::string_view prefix) { return wire.substr(0, prefix.size()) == prefix; };
  if (strip("OUT:")) return {Outcome::Kind::output, std::string(wire.substr(4))};
  if (strip("ERROR:")) return {Outcome::Kind::error, std::string(wire)};
  if (strip("BINDERR:")) return {Outcome::Kind::binding_error, std::string(wire)};
  throw MalformedResponse("unrecognised outcome '" + std::string(wire) + "'");
}

bool canonical_equal(const Outcome& a, const Outcome& b, bool errors_match) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Outcome::Kind::output:
      return a.text == b.text;
    case Outcome::Kind::error:
      return errors_match && a.text == b.text;
    default:
      return false;
  }
}

InitRequest init_request(const CodePairRecord& pair, const TaskSpec& task) {
  return {pair.level, pair.code_ori, pair.code_var, task.binding_program, task.entry_point};
}

std::string base64_encode(fuzz::ByteView bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

ProcessRunner::ProcessRunner(std::vector<std::string> command,
                             std::chrono::milliseconds init_timeout)
    : command_(std::move(command)), init_timeout_(init_timeout) {}

ProcessRunner::~ProcessRunner() {
  try {
    shutdown();
  } catch (...) {
  }
}

void ProcessRunner::start() {
  proc_ = std::make_unique<Subprocess>(command_);
  if (!current_) return;
  json msg = {{"op", "init"},
              {"mode", std::string(to_string(current_->mode))},
              {"code_a", current_->code_a},
              {"code_b", current_->code_b},
              {"binding", current_->binding}};
  if (current_->entry) msg["entry"] = *current_->entry;
  const auto reply = request(msg, Clock::now() + init_timeout_);
  if (!reply.value("ok", false)) {
    throw RunnerCrashed("runner rejected init: " + reply.value("err", std::string("unknown")));
  }
}

json ProcessRunner::request(const json& msg, Clock::time_point deadline) {
  proc_->write_line(msg.dump());
  auto line = proc_->read_line(deadline);
  if (!line) {
    proc_->kill();
    proc_.reset();
    throw RunnerCrashed("runner did not answer '" + msg.value("op", std::string()) + "' in time");
  }
  try {
    return json::parse(*line);
  } catch (const json::parse_error&) {
    throw MalformedResponse("runner sent non-JSON line: " + line->substr(0, 200));
  }
}

void ProcessRunner::init(const InitRequest& req) {
  current_ = req;
  if (proc_) proc_->kill();
  start();
}

ExecutionResult ProcessRunner::exec(fuzz::ByteView buf, double timeout_seconds) {
  if (!current_) throw RunnerCrashed("exec before init");
  if (!proc_) {
    ++restarts_;
    start();
  }
  proc_->write_line(json{{"op", "exec"}, {"buf", base64_encode(buf)}}.dump());
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_seconds));
  const auto line = proc_->read_line(deadline);
  if (!line) {
    proc_->kill();
    proc_.reset();
    const Outcome t{Outcome::Kind::timeout, {}};
    return {t, t};
  }
  json reply;
  try {
    reply = json::parse(*line);
  } catch (const json::parse_error&) {
    throw MalformedResponse("runner sent non-JSON line: " + line->substr(0, 200));
  }
  if (!reply.value("ok", false)) {
    throw RunnerCrashed("runner failed exec: " + reply.value("err", std::string("unknown")));
  }
  if (!reply.contains("out_a") || !reply["out_a"].is_string() || !reply.contains("out_b") ||
      !reply["out_b"].is_string()) {
    throw MalformedResponse("exec reply lacks out_a/out_b");
  }
  return {parse_outcome(reply["out_a"].get<std::string>()),
          parse_outcome(reply["out_b"].get<std::string>())};
}

void ProcessRunner::shutdown() {
  if (!proc_) return;
  try {
    proc_->write_line(R"({"op":"shutdown"})");
  } catch (const RunnerCrashed&) {
  }
  proc_->close(std::chrono::milliseconds(2000));
  proc_.reset();
}

PairScore score_pair(const CodePairRecord& pair, const TaskSpec& task, const HarnessConfig& cfg,
                     const fuzz::FuzzPlan& plan, Runner& runner) {
  validate(cfg);
  fuzz::FuzzPlan rep_plan = plan;
  rep_plan.n_inputs = effective_inputs(cfg, pair.level);
  fuzz::validate(rep_plan);

  runner.init(init_request(pair, task));
  const auto budget = std::chrono::duration<double>(cfg.repetition_budget_seconds);

  PairScore result;
  for (std::size_t r = 1; r <= cfg.repetitions; ++r) {
    rep_plan.seed = fuzz::derive_seed(plan.seed, static_cast<std::uint64_t>(r));
    const auto buffers = fuzz::generate_buffers(rep_plan);

    RepetitionStats st;
    st.index = r;
    st.n_inputs = buffers.size();
    const auto start = Clock::now();
    for (const auto& buf : buffers) {
      if (Clock::now() - start > budget) {
        st.status = RepetitionStats::Status::over_budget;
        break;
      }
      const auto res = runner.exec(buf, cfg.per_input_timeout_seconds);
      if (res.a.kind == Outcome::Kind::timeout || res.b.kind == Outcome::Kind::timeout) {
        ++st.timeouts;
        continue;
      }
      if (res.a.kind == Outcome::Kind::binding_error ||
          res.b.kind == Outcome::Kind::binding_error) {
        ++st.binding_errors;
        continue;
      }
      ++st.executed;
      if (canonical_equal(res.a, res.b, cfg.errors_match)) ++st.matched;
    }
    if (st.status == RepetitionStats::Status::scored && Clock::now() - start > budget) {
      st.status = RepetitionStats::Status::over_budget;
    }
    if (st.status == RepetitionStats::Status::scored && st.executed == 0) {
      st.status = RepetitionStats::Status::nothing_executed;
    }
    if (st.executed > 0) st.score = static_cast<double>(st.matched) / static_cast<double>(st.executed);
    st.score_fixed_n = static_cast<double>(st.matched) / static_cast<double>(st.n_inputs);
    if (st.status == RepetitionStats::Status::scored) result.rep_scores.push_back(st.score);
    result.repetitions.push_back(st);
  }

  if (!result.rep_scores.empty()) {
    double sum = 0.0;
    for (double s : result.rep_scores) sum += s;
    result.df_score = sum / static_cast<double>(result.rep_scores.size());
  }
  return result;
}

}  // namespace semdiff
