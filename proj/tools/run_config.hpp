#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semdiff/fuzz.hpp"
#include "semdiff/harness.hpp"
#include "semdiff/mutation.hpp"
#include "semdiff/optimizer.hpp"
#include "semdiff/regions.hpp"
#include "semdiff/surface_sim.hpp"

namespace semdiff::cli {

/// Resolved settings shared by every subcommand.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0 = logical cores
  fuzz::LengthBounds bounds{};
  double corpus_fraction = 0.25;
  HarnessConfig harness{};
  std::vector<std::string> runner;  // argv of the runner process
  MutationLimits mutation{};
  ProviderConfig provider{};
  std::optional<std::filesystem::path> stub_fixture;
  SurfaceOptions surface{};
  double delta = 0.05;
  ErrorFlavor error_flavor = ErrorFlavor::absolute;
};

/// Reads an INI file with sections [run] [fuzz] [harness] [mutation]
/// [optimizer] [surface] [regions]. Unknown keys and any credential-looking
/// key are rejected with ConfigError.
void load_ini(RunConfig& cfg, const std::filesystem::path& path);

/// Checks every component invariant. Throws ConfigError.
void validate(const RunConfig& cfg);

std::size_t worker_count(const RunConfig& cfg);

/// Canonical JSON of every setting that can change results (`jobs` and the
/// credential variable's value are excluded).
std::string canonical_config(const RunConfig& cfg);

/// Hex SHA-256 of `canonical_config`.
std::string config_digest(const RunConfig& cfg);

std::string sha256_hex(std::string_view data);

/// Splits a runner command line on whitespace.
std::vector<std::string> split_command(std::string_view command);

}  // namespace semdiff::cli
