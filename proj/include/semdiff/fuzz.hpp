#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semdiff::fuzz {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kFunctionLevelInputs = 2000;
inline constexpr std::size_t kProgramLevelInputs = 1000;

struct LengthBounds {
  std::size_t min_len = 16;
  std::size_t max_len = 4096;
};

struct FuzzPlan {
  std::uint64_t seed = 0;
  std::size_t n_inputs = kFunctionLevelInputs;
  LengthBounds bounds{};
  // Share of buffers (after the first) derived by mutating an earlier one.
  double corpus_fraction = 0.25;
};

/// Throws ConfigError when min > max, n_inputs == 0 or the fraction lies
/// outside [0,1].
void validate(const FuzzPlan& plan);

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view text);
/// splitmix64 of (base ^ golden-ratio-scrambled salt); used for per-pair and
/// per-repetition seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);
std::uint64_t derive_seed(std::uint64_t base, std::string_view salt);

/// Platform-stable random source: std::mt19937_64 (its output sequence is
/// fixed by the standard) with hand-written range reduction, since the
/// standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [0, 1) with 53 bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::uint8_t byte() { return static_cast<std::uint8_t>(next() >> 56); }

 private:
  std::mt19937_64 engine_;
};

/// Applies 1-4 of {bit flip, byte overwrite, block insert, block delete,
/// block duplicate, truncate/extend}; the result is clamped into `bounds`.
Bytes mutate_buffer(ByteView buf, Rng& rng, const LengthBounds& bounds);

/// `plan.n_inputs` buffers, fully determined by `plan.seed`.
std::vector<Bytes> generate_buffers(const FuzzPlan& plan);

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

}  // namespace semdiff::fuzz
