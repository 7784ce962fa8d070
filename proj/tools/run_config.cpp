#include "run_config.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "semdiff/errors.hpp"

namespace semdiff::cli {

namespace {

namespace pt = boost::property_tree;

template <typename T>
T get_value(const pt::ptree& node, const std::string& where) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("bad value '" + node.data() + "' for " + where);
  }
}

bool get_bool(const pt::ptree& node, const std::string& where) {
  const auto v = boost::algorithm::to_lower_copy(node.data());
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError("bad boolean '" + node.data() + "' for " + where);
}

bool looks_like_secret(std::string key) {
  boost::algorithm::to_lower(key);
  for (const char* word : {"key", "token", "secret", "password"}) {
    if (key.find(word) != std::string::npos && key != "credential_env") return true;
  }
  return false;
}

}  // namespace

void load_ini(RunConfig& cfg, const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' outside a section");
    }
    for (const auto& [key, node] : body) {
      const std::string where = "[" + section + "] " + key;
      if (looks_like_secret(key)) {
        throw ConfigError(where + ": credentials are read from the environment only");
      }
      if (section == "run" && key == "seed") {
        cfg.seed = get_value<std::uint64_t>(node, where);
      } else if (section == "run" && key == "jobs") {
        cfg.jobs = get_value<std::size_t>(node, where);
      } else if (section == "fuzz" && key == "min_len") {
        cfg.bounds.min_len = get_value<std::size_t>(node, where);
      } else if (section == "fuzz" && key == "max_len") {
        cfg.bounds.max_len = get_value<std::size_t>(node, where);
      } else if (section == "fuzz" && key == "corpus_fraction") {
        cfg.corpus_fraction = get_value<double>(node, where);
      } else if (section == "harness" && key == "inputs") {
        cfg.harness.n_inputs = get_value<std::size_t>(node, where);
      } else if (section == "harness" && key == "repetitions") {
        cfg.harness.repetitions = get_value<std::size_t>(node, where);
      } else if (section == "harness" && key == "budget_seconds") {
        cfg.harness.repetition_budget_seconds = get_value<double>(node, where);
      } else if (section == "harness" && key == "timeout_seconds") {
        cfg.harness.per_input_timeout_seconds = get_value<double>(node, where);
      } else if (section == "harness" && key == "errors_match") {
        cfg.harness.errors_match = get_bool(node, where);
      } else if (section == "harness" && key == "runner") {
        cfg.runner = split_command(node.data());
      } else if (section == "mutation" && key == "max_mutants") {
        cfg.mutation.max_mutants = get_value<std::size_t>(node, where);
      } else if (section == "mutation" && key == "operators") {
        cfg.mutation.operators = parse_operator_list(node.data());
      } else if (section == "optimizer" && key == "endpoint") {
        cfg.provider.endpoint = node.data();
      } else if (section == "optimizer" && key == "model") {
        cfg.provider.model = node.data();
      } else if (section == "optimizer" && key == "credential_env") {
        cfg.provider.credential_env = node.data();
      } else if (section == "optimizer" && key == "timeout_seconds") {
        cfg.provider.timeout_seconds = get_value<double>(node, where);
      } else if (section == "optimizer" && key == "max_retries") {
        cfg.provider.max_retries = get_value<int>(node, where);
      } else if (section == "optimizer" && key == "max_in_flight") {
        cfg.provider.max_in_flight = get_value<std::size_t>(node, where);
      } else if (section == "optimizer" && key == "cache") {
        cfg.provider.cache = node.data();
      } else if (section == "optimizer" && key == "stub_fixture") {
        cfg.stub_fixture = node.data();
      } else if (section == "surface" && key == "edit_weight") {
        cfg.surface.edit_weight = get_value<double>(node, where);
      } else if (section == "surface" && key == "ast_weight") {
        cfg.surface.ast_weight = get_value<double>(node, where);
      } else if (section == "surface" && key == "max_tree_nodes") {
        cfg.surface.max_tree_nodes = get_value<std::size_t>(node, where);
      } else if (section == "regions" && key == "delta") {
        cfg.delta = get_value<double>(node, where);
      } else if (section == "regions" && key == "error_flavor") {
        cfg.error_flavor = error_flavor_from_string(node.data());
      } else {
        throw ConfigError("unknown setting " + where);
      }
    }
  }
}

void validate(const RunConfig& cfg) {
  fuzz::FuzzPlan plan;
  plan.bounds = cfg.bounds;
  plan.corpus_fraction = cfg.corpus_fraction;
  fuzz::validate(plan);
  semdiff::validate(cfg.harness);
  semdiff::validate(cfg.provider);
  if (cfg.mutation.max_mutants == 0) throw ConfigError("max_mutants must be >= 1");
  if (cfg.mutation.operators.empty()) throw ConfigError("no mutation operators selected");
  const auto& s = cfg.surface;
  if (!(s.edit_weight >= 0 && s.ast_weight >= 0 && s.edit_weight + s.ast_weight > 0)) {
    throw ConfigError("surface weights must be >= 0 with a positive sum");
  }
  if (s.max_tree_nodes == 0) throw ConfigError("max_tree_nodes must be >= 1");
  threshold_grid(cfg.delta);
}

std::size_t worker_count(const RunConfig& cfg) {
  if (cfg.jobs > 0) return cfg.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string canonical_config(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["fuzz"] = {{"min_len", cfg.bounds.min_len},
               {"max_len", cfg.bounds.max_len},
               {"corpus_fraction", cfg.corpus_fraction}};
  nlohmann::ordered_json h;
  h["inputs"] = cfg.harness.n_inputs ? nlohmann::ordered_json(*cfg.harness.n_inputs) : nullptr;
  h["repetitions"] = cfg.harness.repetitions;
  h["budget_seconds"] = cfg.harness.repetition_budget_seconds;
  h["timeout_seconds"] = cfg.harness.per_input_timeout_seconds;
  h["errors_match"] = cfg.harness.errors_match;
  h["runner"] = cfg.runner;
  j["harness"] = std::move(h);
  std::vector<std::string> ops;
  for (auto op : cfg.mutation.operators) ops.emplace_back(operator_code(op));
  j["mutation"] = {{"max_mutants", cfg.mutation.max_mutants}, {"operators", ops}};
  nlohmann::ordered_json o;
  if (cfg.stub_fixture) {
    o["stub_fixture"] = cfg.stub_fixture->string();
  } else {
    o["endpoint"] = cfg.provider.endpoint;
    o["model"] = cfg.provider.model;
    o["max_retries"] = cfg.provider.max_retries;
  }
  j["optimizer"] = std::move(o);
  j["surface"] = {{"edit_weight", cfg.surface.edit_weight},
                  {"ast_weight", cfg.surface.ast_weight},
                  {"max_tree_nodes", cfg.surface.max_tree_nodes}};
  j["regions"] = {{"delta", cfg.delta}, {"error_flavor", std::string(to_string(cfg.error_flavor))}};
  return j.dump();
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  return fuzz::to_hex(fuzz::ByteView(md, len));
}

std::string config_digest(const RunConfig& cfg) { return sha256_hex(canonical_config(cfg)); }

std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> parts;
  std::string text(command);
  boost::algorithm::split(parts, text, [](char c) { return std::isspace(static_cast<unsigned char>(c)); },
                          boost::algorithm::token_compress_on);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

}  // namespace semdiff::cli
