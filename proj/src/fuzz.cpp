#include "semdiff/fuzz.hpp"

#include <algorithm>
#include <limits>

#include "semdiff/errors.hpp"

namespace semdiff::fuzz {

void validate(const FuzzPlan& plan) {
  if (plan.n_inputs == 0) throw ConfigError("n_inputs must be >= 1");
  if (plan.bounds.min_len > plan.bounds.max_len) {
    throw ConfigError("min buffer length exceeds max buffer length");
  }
  if (!(plan.corpus_fraction >= 0.0 && plan.corpus_fraction <= 1.0)) {
    throw ConfigError("corpus_fraction must lie in [0,1]");
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t state = base ^ (salt * 0x9E3779B97F4A7C15ULL);
  return splitmix64(state);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view salt) {
  return derive_seed(base, fnv1a64(salt));
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the reduction unbiased and portable.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

namespace {

enum class Edit { bit_flip, overwrite, insert, erase, duplicate, resize };

constexpr std::size_t kMaxBlock = 32;

std::size_t block_len(Rng& rng, std::size_t cap) {
  return 1 + static_cast<std::size_t>(rng.below(std::min(cap, kMaxBlock)));
}

void apply_edit(Edit e, Bytes& b, Rng& rng, const LengthBounds& bounds) {
  switch (e) {
    case Edit::bit_flip: {
      const auto pos = rng.below(b.size());
      b[pos] ^= static_cast<std::uint8_t>(1u << rng.below(8));
      break;
    }
    case Edit::overwrite:
      b[rng.below(b.size())] = rng.byte();
      break;
    case Edit::insert: {
      const auto pos = static_cast<std::ptrdiff_t>(rng.below(b.size() + 1));
      const std::size_t len = block_len(rng, kMaxBlock);
      Bytes block(len);
      for (auto& x : block) x = rng.byte();
      b.insert(b.begin() + pos, block.begin(), block.end());
      break;
    }
    case Edit::erase: {
      const std::size_t len = block_len(rng, b.size());
      const auto pos = static_cast<std::ptrdiff_t>(rng.below(b.size() - len + 1));
      b.erase(b.begin() + pos, b.begin() + pos + static_cast<std::ptrdiff_t>(len));
      break;
    }
    case Edit::duplicate: {
      const std::size_t len = block_len(rng, b.size());
      const auto from = static_cast<std::ptrdiff_t>(rng.below(b.size() - len + 1));
      const Bytes block(b.begin() + from, b.begin() + from + static_cast<std::ptrdiff_t>(len));
      const auto to = static_cast<std::ptrdiff_t>(rng.below(b.size() + 1));
      b.insert(b.begin() + to, block.begin(), block.end());
      break;
    }
    case Edit::resize: {
      const std::size_t lo = bounds.min_len;
      const std::size_t hi = std::max(bounds.max_len, lo);
      const std::size_t target = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
      if (target < b.size()) {
        b.resize(target);
      } else {
        while (b.size() < target) b.push_back(rng.byte());
      }
      break;
    }
  }
}

void clamp_length(Bytes& b, Rng& rng, const LengthBounds& bounds) {
  if (b.size() > bounds.max_len) b.resize(bounds.max_len);
  while (b.size() < bounds.min_len) b.push_back(rng.byte());
}

}  // namespace

Bytes mutate_buffer(ByteView buf, Rng& rng, const LengthBounds& bounds) {
  Bytes b(buf.begin(), buf.end());
  const auto edits = 1 + rng.below(4);
  for (std::uint64_t i = 0; i < edits; ++i) {
    auto e = static_cast<Edit>(rng.below(6));
    // An empty buffer always grows first.
    if (b.empty()) e = Edit::insert;
    apply_edit(e, b, rng, bounds);
  }
  clamp_length(b, rng, bounds);
  return b;
}

std::vector<Bytes> generate_buffers(const FuzzPlan& plan) {
  validate(plan);
  Rng rng(plan.seed);
  std::vector<Bytes> out;
  out.reserve(plan.n_inputs);
  const std::size_t span = plan.bounds.max_len - plan.bounds.min_len + 1;
  for (std::size_t i = 0; i < plan.n_inputs; ++i) {
    if (i > 0 && plan.corpus_fraction > 0.0 && rng.unit() < plan.corpus_fraction) {
      const Bytes& parent = out[static_cast<std::size_t>(rng.below(i))];
      out.push_back(mutate_buffer(parent, rng, plan.bounds));
      continue;
    }
    Bytes b(plan.bounds.min_len + static_cast<std::size_t>(rng.below(span)));
    for (auto& x : b) x = rng.byte();
    out.push_back(std::move(b));
  }
  return out;
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw SchemaError(0, "odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw SchemaError(0, "invalid hex digit");
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

}  // namespace semdiff::fuzz
