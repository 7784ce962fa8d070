#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semdiff/fuzz.hpp"

namespace semdiff::fuzz {

// Byte-level input provider. Every primitive reads from the front of the
// remaining buffer and never fails on exhaustion: it returns its minimum
// (lo, false, 0.0, "", list of lo) instead.
//
//   int_in_range(lo, hi)  k = smallest k with 256^k >= hi-lo+1; read k bytes
//                         big-endian (missing trailing bytes count as 0);
//                         value = lo + u mod (hi-lo+1)
//   bool                  low bit of one byte
//   probability           4 bytes big-endian / 2^32
//   ascii_string(max)     one length byte mod (max+1), then that many bytes,
//                         each mapped to 0x20 + (b mod 95)
//   int_list(n, lo, hi)   n successive int_in_range calls
class ReferenceProvider {
 public:
  explicit ReferenceProvider(ByteView data) : rest_(data) {}
  explicit ReferenceProvider(Bytes&&) = delete;

  std::int64_t consume_int_in_range(std::int64_t lo, std::int64_t hi);
  bool consume_bool();
  double consume_probability();
  std::string consume_ascii_string(std::size_t max_len);
  std::vector<std::int64_t> consume_int_list(std::size_t count, std::int64_t lo,
                                             std::int64_t hi);

  ByteView remaining() const { return rest_; }

 private:
  std::uint64_t take_big_endian(std::size_t k);
  ByteView rest_;
};

/// Functional form: (value, remaining bytes). Throws InvalidRange if lo > hi.
std::pair<std::int64_t, Bytes> reference_consume_int_in_range(ByteView buf, std::int64_t lo,
                                                               std::int64_t hi);

/// One line of the shared golden file:
///   <hex buffer> <primitive> <args> -> <value> <hex rest>
/// Empty hex and empty argument lists are written as "-".
struct ConformanceVector {
  Bytes buffer;
  std::string primitive;
  std::vector<std::int64_t> args;
  std::string value;
  Bytes rest;
};

ConformanceVector parse_vector_line(std::string_view line);
std::string format_vector_line(const ConformanceVector& v);

/// Reads a vector file; blank lines and lines starting with '#' are skipped.
std::vector<ConformanceVector> load_vectors(const std::filesystem::path& path);

/// Runs the named primitive on `buffer` with the reference provider and
/// returns (canonical value text, rest). Values are rendered as: decimal
/// integers, true/false, shortest round-trip reals, JSON string literals,
/// and integer lists "[a,b,c]".
std::pair<std::string, Bytes> evaluate_reference(std::string_view primitive,
                                                 std::span<const std::int64_t> args,
                                                 ByteView buffer);

}  // namespace semdiff::fuzz
