#include <httplib.h>

#include "semdiff/optimizer.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "semdiff/errors.hpp"
#include "semdiff/python_syntax.hpp"

namespace semdiff {

using nlohmann::json;

namespace {

constexpr std::string_view kStrategyNames[] = {"Algorithmic", "DataStructures", "ColdPath",
                                               "HotPath",     "Memoization",    "None"};

// Shared by the fixture loader and the reply decoder; `fail` raises the
// caller's error type.
template <class Fail>
OptimizationResult decode_answer(const json& j, Fail fail) {
  if (!j.is_object()) fail("expected a JSON object");
  if (!j.contains("strategies") || !j["strategies"].is_array() || j["strategies"].empty()) {
    fail("'strategies' must be a non-empty list");
  }
  std::vector<std::string> names;
  bool none = false;
  for (const auto& s : j["strategies"]) {
    if (!s.is_string()) fail("strategy names must be strings");
    const auto name = s.get<std::string>();
    const auto* it = std::find(std::begin(kStrategyNames), std::end(kStrategyNames), name);
    if (it == std::end(kStrategyNames)) fail("unknown strategy '" + name + "'");
    if (name == "None") none = true;
    names.push_back(name);
  }
  const bool has_code = j.contains("code") && !j["code"].is_null();
  if (none) {
    if (names.size() != 1) fail("None cannot be combined with other strategies");
    if (has_code && !(j["code"].is_string() && j["code"].get<std::string>().empty())) {
      fail("a None answer carries no code");
    }
    return NotOptimizable{};
  }
  if (!has_code || !j["code"].is_string() || j["code"].get<std::string>().empty()) {
    fail("'code' must be a non-empty string");
  }
  OptimizedVariant v{j["code"].get<std::string>(), std::move(names)};
  try {
    python::parse(v.code);
  } catch (const ParseError& e) {
    fail(std::string("code does not parse: ") + e.what());
  }
  return v;
}

class AuthError : public TransportError {
 public:
  using TransportError::TransportError;
};

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string_view to_string(Strategy s) { return kStrategyNames[static_cast<int>(s)]; }

Strategy strategy_from_string(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kStrategyNames[i] == name) return static_cast<Strategy>(i);
  }
  throw MalformedResponse("unknown strategy '" + std::string(name) + "'");
}

void validate(const ProviderConfig& cfg) {
  if (!(cfg.timeout_seconds > 0)) throw ConfigError("request timeout must be > 0");
  if (cfg.max_retries < 0) throw ConfigError("max retries must be >= 0");
  if (cfg.max_in_flight == 0) throw ConfigError("max in-flight requests must be >= 1");
  if (cfg.credential_env.empty()) throw ConfigError("credential variable name is empty");
  split_url(cfg.endpoint);
}

StubOptimizer::StubOptimizer(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw IOError("cannot open fixture " + fixture.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(lineno, e.what());
    }
    auto fail = [&](const std::string& what) -> void { throw SchemaError(lineno, what); };
    if (!j.is_object() || !j.contains("task_id") || !j["task_id"].is_string()) {
      fail("missing task_id");
    }
    const auto id = j["task_id"].get<std::string>();
    if (answers_.count(id)) fail("duplicate task_id '" + id + "'");
    answers_.emplace(id, decode_answer(j, fail));
  }
}

OptimizationResult StubOptimizer::request(const TaskSpec& task) {
  const auto it = answers_.find(task.task_id);
  if (it == answers_.end()) {
    throw MalformedResponse("fixture has no answer for task '" + task.task_id + "'");
  }
  return it->second;
}

std::string build_prompt(const TaskSpec& task) {
  std::string p =
      "Optimize the following Python program for speed while keeping its behaviour "
      "identical.\n"
      "Apply one or more of these five strategies:\n"
      "- Algorithmic: replace the algorithm with an asymptotically better one\n"
      "- DataStructures: switch to more suitable data structures\n"
      "- ColdPath: simplify rarely executed code\n"
      "- HotPath: speed up the most frequently executed code\n"
      "- Memoization: cache results of repeated computations\n"
      "If the program cannot be improved, return \"None\" as the only strategy and no "
      "code.\n"
      "Reply with a single JSON object and nothing else:\n"
      "{\"strategies\": [\"<strategy>\", ...], \"code\": \"<complete optimized program>\"}\n";
  if (task.level == Level::function && task.entry_point) {
    p += "Keep the function name `" + *task.entry_point + "` and its signature.\n";
  }
  if (task.nl_description) p += "\nProblem description:\n" + *task.nl_description + "\n";
  p += "\nProgram:\n```python\n" + task.reference_code + "\n```\n";
  return p;
}

std::string strip_code_fence(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  text.remove_prefix(first);
  if (text.substr(0, 3) != "```") return std::string(text);
  const auto nl = text.find('\n');
  if (nl == std::string_view::npos) return {};
  text.remove_prefix(nl + 1);
  const auto close = text.rfind("```");
  if (close != std::string_view::npos) text = text.substr(0, close);
  return std::string(text);
}

OptimizationResult parse_reply(std::string_view content) {
  json j;
  try {
    j = json::parse(strip_code_fence(content));
  } catch (const json::parse_error& e) {
    throw MalformedResponse(std::string("reply is not JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("code") && j["code"].is_string()) {
    j["code"] = strip_code_fence(j["code"].get<std::string>());
  }
  auto fail = [](const std::string& what) -> void { throw MalformedResponse(what); };
  return decode_answer(j, fail);
}

std::string fixture_line(const std::string& task_id, const OptimizationResult& result) {
  nlohmann::ordered_json j;
  j["task_id"] = task_id;
  if (const auto* v = std::get_if<OptimizedVariant>(&result)) {
    j["code"] = v->code;
    j["strategies"] = v->strategies;
  } else {
    j["strategies"] = {"None"};
  }
  return j.dump();
}

HttpOptimizer::HttpOptimizer(ProviderConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

std::string HttpOptimizer::call(const std::string& prompt, const std::string& key) {
  const auto ep = split_url(cfg_.endpoint);
  httplib::Client cli(ep.base);
  const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);

  const json body = {{"model", cfg_.model},
                     {"temperature", 0},
                     {"messages",
                      {{{"role", "system"},
                        {"content", "You are an expert Python performance engineer."}},
                       {{"role", "user"}, {"content", prompt}}}}};
  const httplib::Headers headers = {{"Authorization", "Bearer " + key}};
  auto res = cli.Post(ep.path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) {
    throw AuthError("endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status != 200) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto j = json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("unexpected completion payload: ") + e.what());
  }
}

void HttpOptimizer::remember(const std::string& task_id, const OptimizationResult& result) {
  if (!cfg_.cache) return;
  std::lock_guard lock(cache_mutex_);
  std::ofstream out(*cfg_.cache, std::ios::app);
  if (!out) throw IOError("cannot append to cache " + cfg_.cache->string());
  out << fixture_line(task_id, result) << '\n';
}

OptimizationResult HttpOptimizer::request(const TaskSpec& task) {
  const char* key = std::getenv(cfg_.credential_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw TransportError("credential variable " + cfg_.credential_env + " is not set");
  }
  const auto prompt = build_prompt(task);
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    std::string content;
    try {
      content = call(prompt, key);
    } catch (const AuthError&) {
      throw;
    } catch (const TransportError& e) {
      last_error = e.what();
      if (attempt == cfg_.max_retries) throw;
      continue;
    } catch (const MalformedResponse& e) {
      last_error = e.what();
      continue;
    }
    try {
      auto result = parse_reply(content);
      remember(task.task_id, result);
      return result;
    } catch (const MalformedResponse& e) {
      last_error = e.what();
    }
  }
  throw MalformedResponse("no usable reply for task '" + task.task_id + "' after " +
                          std::to_string(cfg_.max_retries + 1) + " attempt(s): " + last_error);
}

std::vector<OptimizationOutcome> request_all(Optimizer& optimizer,
                                             const std::vector<TaskSpec>& tasks,
                                             std::size_t max_in_flight) {
  std::vector<OptimizationOutcome> out(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      out[i].task_id = tasks[i].task_id;
      try {
        out[i].result = optimizer.request(tasks[i]);
      } catch (const Error& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(max_in_flight, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

VariantRecord optimized_variant_record(const TaskSpec& task, const OptimizedVariant& v) {
  VariantRecord r;
  r.variant_id = task.task_id + ":opt";
  r.task_id = task.task_id;
  r.variant_code = v.code;
  r.variant_kind = VariantKind::optimized;
  r.provenance = v.strategies;
  r.parses_ok = python::parses(v.code);
  return r;
}

}  // namespace semdiff
