#include "semdiff/provider.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semdiff/errors.hpp"

namespace semdiff::fuzz {

namespace {

using u128 = unsigned __int128;

std::size_t bytes_for_range(u128 range) {
  std::size_t k = 0;
  u128 cap = 1;
  while (cap < range) {
    cap <<= 8;
    ++k;
  }
  return k;
}

// Python repr() of a double: shortest round-trip digits, scientific notation
// when the decimal exponent is < -4 or >= 16.
std::string python_repr(double x) {
  if (x == 0.0) return std::signbit(x) ? "-0.0" : "0.0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  const auto e_pos = sci.find('e');
  std::string mant = sci.substr(0, e_pos);
  const int exp = std::stoi(sci.substr(e_pos + 1));
  bool neg = false;
  if (mant[0] == '-') {
    neg = true;
    mant.erase(0, 1);
  }
  std::string digits;
  for (char c : mant) {
    if (c != '.') digits.push_back(c);
  }
  std::string out;
  if (exp < -4 || exp >= 16) {
    out = digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    char ebuf[16];
    std::snprintf(ebuf, sizeof ebuf, "e%c%02d", exp < 0 ? '-' : '+', exp < 0 ? -exp : exp);
    out += ebuf;
  } else if (exp < 0) {
    out = "0." + std::string(static_cast<std::size_t>(-exp - 1), '0') + digits;
  } else {
    const auto point = static_cast<std::size_t>(exp) + 1;
    if (digits.size() <= point) {
      out = digits + std::string(point - digits.size(), '0') + ".0";
    } else {
      out = digits.substr(0, point) + "." + digits.substr(point);
    }
  }
  return neg ? "-" + out : out;
}

std::string json_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw SchemaError(0, "bad integer '" + std::string(text) + "'");
  }
  return v;
}

std::size_t as_size(std::int64_t v, std::string_view what) {
  if (v < 0) throw InvalidRange(std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

void expect_args(std::string_view primitive, std::span<const std::int64_t> args,
                 std::size_t n) {
  if (args.size() != n) {
    throw SchemaError(0, std::string(primitive) + " takes " + std::to_string(n) +
                             " argument(s), got " + std::to_string(args.size()));
  }
}

}  // namespace

std::uint64_t ReferenceProvider::take_big_endian(std::size_t k) {
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < k; ++i) {
    u <<= 8;
    if (i < rest_.size()) u |= rest_[i];
  }
  rest_ = rest_.subspan(std::min(k, rest_.size()));
  return u;
}

std::int64_t ReferenceProvider::consume_int_in_range(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) {
    throw InvalidRange("lo " + std::to_string(lo) + " > hi " + std::to_string(hi));
  }
  const u128 range = static_cast<u128>(static_cast<__int128>(hi) - lo) + 1;
  const std::size_t k = bytes_for_range(range);
  u128 u = 0;
  for (std::size_t i = 0; i < k; ++i) {
    u <<= 8;
    if (i < rest_.size()) u |= rest_[i];
  }
  rest_ = rest_.subspan(std::min(k, rest_.size()));
  return static_cast<std::int64_t>(static_cast<__int128>(lo) + static_cast<__int128>(u % range));
}

bool ReferenceProvider::consume_bool() {
  if (rest_.empty()) return false;
  return (take_big_endian(1) & 1u) != 0;
}

double ReferenceProvider::consume_probability() {
  return static_cast<double>(take_big_endian(4)) / 4294967296.0;
}

std::string ReferenceProvider::consume_ascii_string(std::size_t max_len) {
  if (rest_.empty()) return {};
  const std::size_t len = static_cast<std::size_t>(take_big_endian(1) % (max_len + 1));
  const std::size_t n = std::min(len, rest_.size());
  std::string out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(0x20 + rest_[i] % 95));
  rest_ = rest_.subspan(n);
  return out;
}

std::vector<std::int64_t> ReferenceProvider::consume_int_list(std::size_t count, std::int64_t lo,
                                                              std::int64_t hi) {
  if (lo > hi) {
    throw InvalidRange("lo " + std::to_string(lo) + " > hi " + std::to_string(hi));
  }
  std::vector<std::int64_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(consume_int_in_range(lo, hi));
  return out;
}

std::pair<std::int64_t, Bytes> reference_consume_int_in_range(ByteView buf, std::int64_t lo,
                                                               std::int64_t hi) {
  ReferenceProvider p(buf);
  const auto v = p.consume_int_in_range(lo, hi);
  const auto rest = p.remaining();
  return {v, Bytes(rest.begin(), rest.end())};
}

std::pair<std::string, Bytes> evaluate_reference(std::string_view primitive,
                                                 std::span<const std::int64_t> args,
                                                 ByteView buffer) {
  ReferenceProvider p(buffer);
  std::string value;
  if (primitive == "int_in_range") {
    expect_args(primitive, args, 2);
    value = std::to_string(p.consume_int_in_range(args[0], args[1]));
  } else if (primitive == "bool") {
    expect_args(primitive, args, 0);
    value = p.consume_bool() ? "true" : "false";
  } else if (primitive == "probability") {
    expect_args(primitive, args, 0);
    value = python_repr(p.consume_probability());
  } else if (primitive == "ascii_string") {
    expect_args(primitive, args, 1);
    value = json_string(p.consume_ascii_string(as_size(args[0], "max_len")));
  } else if (primitive == "int_list") {
    expect_args(primitive, args, 3);
    const auto xs = p.consume_int_list(as_size(args[0], "count"), args[1], args[2]);
    value = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) value += ",";
      value += std::to_string(xs[i]);
    }
    value += "]";
  } else {
    throw SchemaError(0, "unknown primitive '" + std::string(primitive) + "'");
  }
  const auto rest = p.remaining();
  return {value, Bytes(rest.begin(), rest.end())};
}

ConformanceVector parse_vector_line(std::string_view line) {
  const auto arrow = line.find(" -> ");
  if (arrow == std::string_view::npos) throw SchemaError(0, "missing ' -> '");
  ConformanceVector v;

  std::istringstream lhs{std::string(line.substr(0, arrow))};
  std::string hex, prim, args;
  if (!(lhs >> hex >> prim >> args)) throw SchemaError(0, "expected '<hex> <primitive> <args>'");
  std::string extra;
  if (lhs >> extra) throw SchemaError(0, "trailing text before ' -> '");
  v.buffer = hex == "-" ? Bytes{} : from_hex(hex);
  v.primitive = prim;
  if (args != "-") {
    std::string_view a = args;
    while (true) {
      const auto comma = a.find(',');
      v.args.push_back(parse_int(a.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      a.remove_prefix(comma + 1);
    }
  }

  std::string_view rhs = line.substr(arrow + 4);
  while (!rhs.empty() && (rhs.back() == ' ' || rhs.back() == '\r')) rhs.remove_suffix(1);
  const auto space = rhs.rfind(' ');
  if (space == std::string_view::npos) throw SchemaError(0, "expected '<value> <hex rest>'");
  v.value = std::string(rhs.substr(0, space));
  const auto rest = rhs.substr(space + 1);
  v.rest = rest == "-" ? Bytes{} : from_hex(rest);
  return v;
}

std::string format_vector_line(const ConformanceVector& v) {
  std::string out = v.buffer.empty() ? "-" : to_hex(v.buffer);
  out += " " + v.primitive + " ";
  if (v.args.empty()) {
    out += "-";
  } else {
    for (std::size_t i = 0; i < v.args.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(v.args[i]);
    }
  }
  out += " -> " + v.value + " ";
  out += v.rest.empty() ? "-" : to_hex(v.rest);
  return out;
}

std::vector<ConformanceVector> load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path.string());
  std::vector<ConformanceVector> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(parse_vector_line(line));
    } catch (const SchemaError& e) {
      throw SchemaError(lineno, e.what());
    }
  }
  return out;
}

}  // namespace semdiff::fuzz
