#include "semdiff/mutation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "semdiff/errors.hpp"
#include "semdiff/python_syntax.hpp"

namespace semdiff {

namespace {

struct OperatorInfo {
  MutationOperator op;
  std::string_view code;
  std::string_view description;
};

constexpr std::array<OperatorInfo, kOperatorCount> kOperators = {{
    {MutationOperator::AOR, "AOR", "arithmetic operator replacement"},
    {MutationOperator::AOD, "AOD", "arithmetic operator deletion"},
    {MutationOperator::ROR, "ROR", "relational operator replacement"},
    {MutationOperator::COD, "COD", "conditional operator deletion"},
    {MutationOperator::LOR, "LOR", "logical operator replacement"},
    {MutationOperator::ZIL, "ZIL", "zero iteration loop"},
    {MutationOperator::CRP, "CRP", "constant replacement"},
    {MutationOperator::BCR, "BCR", "break/continue replacement"},
    {MutationOperator::EXS, "EXS", "statement deletion"},
    {MutationOperator::SIR, "SIR", "slice index removal"},
}};

const OperatorInfo& info(MutationOperator op) {
  return kOperators[static_cast<std::size_t>(op)];
}

}  // namespace

std::string_view operator_code(MutationOperator op) { return info(op).code; }

std::string_view operator_description(MutationOperator op) { return info(op).description; }

MutationOperator operator_from_code(std::string_view code) {
  for (const auto& i : kOperators) {
    if (i.code == code) return i.op;
  }
  throw ConfigError("unknown mutation operator '" + std::string(code) + "'");
}

std::set<MutationOperator> all_operators() {
  std::set<MutationOperator> ops;
  for (const auto& i : kOperators) ops.insert(i.op);
  return ops;
}

std::set<MutationOperator> parse_operator_list(std::string_view list) {
  std::set<MutationOperator> ops;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t comma = std::min(list.find(',', pos), list.size());
    std::string_view item = list.substr(pos, comma - pos);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) ops.insert(operator_from_code(item));
    pos = comma + 1;
  }
  if (ops.empty()) throw ConfigError("operator list is empty");
  return ops;
}

namespace {

using python::SyntaxNode;
using python::SyntaxTree;

bool ident_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

class SiteCollector {
 public:
  SiteCollector(std::string_view src, const SyntaxTree& tree) : src_(src), tree_(tree) {
    for (const auto& n : tree.nodes()) {
      if (n.block >= 0) ++block_sizes_[n.block];
    }
  }

  std::vector<MutationSite> run() {
    for (int id : tree_.preorder()) visit(id);
    std::stable_sort(sites_.begin(), sites_.end(), [](const MutationSite& a, const MutationSite& b) {
      if (a.begin != b.begin) return a.begin < b.begin;
      return operator_code(a.op) < operator_code(b.op);
    });
    return std::move(sites_);
  }

 private:
  std::string_view text(const SyntaxNode& n) const {
    return src_.substr(n.begin, n.end - n.begin);
  }
  const SyntaxNode& child(const SyntaxNode& n, std::size_t i) const {
    return tree_.node(n.children[i]);
  }

  // Records a site; pads the replacement with a space where splicing would
  // otherwise fuse two identifier characters (e.g. `return-x` -> `return x`).
  void add(MutationOperator op, std::size_t begin, std::size_t end, std::string replacement) {
    const std::string_view original = src_.substr(begin, end - begin);
    if (!replacement.empty()) {
      if (begin > 0 && ident_char(src_[begin - 1]) && ident_char(replacement.front())) {
        replacement.insert(replacement.begin(), ' ');
      }
      if (end < src_.size() && ident_char(src_[end]) && ident_char(replacement.back())) {
        replacement.push_back(' ');
      }
    }
    if (replacement == original) return;
    sites_.push_back(MutationSite{op, begin, end, std::string(original), std::move(replacement)});
  }

  void add_node(MutationOperator op, const SyntaxNode& n, std::string replacement) {
    add(op, n.begin, n.end, std::move(replacement));
  }

  bool is_docstring(const SyntaxNode& n) const {
    if (n.kind != "Constant" && n.kind != "JoinedStr") return false;
    if (n.parent < 0) return false;
    const SyntaxNode& p = tree_.node(n.parent);
    return p.kind == "Expr" && is_string_literal(n);
  }

  bool is_docstring_statement(const SyntaxNode& stmt) const {
    return stmt.kind == "Expr" && !stmt.children.empty() && is_docstring(child(stmt, 0));
  }

  static bool is_string_literal(const SyntaxNode& n) {
    for (char c : n.text) {
      if (c == '"' || c == '\'') return true;
      if (!std::isalpha(static_cast<unsigned char>(c)) && c != '(' && !std::isspace(static_cast<unsigned char>(c))) {
        return false;
      }
    }
    return false;
  }

  void visit(int id) {
    const SyntaxNode& n = tree_.node(id);
    const std::string_view k = n.kind;
    if (k == "BinOp") {
      visit_binop(n);
    } else if (k == "UnaryOp") {
      visit_unary(n);
    } else if (k == "Compare") {
      visit_compare(n);
    } else if (k == "BoolOp") {
      for (std::size_t i = 1; i < n.children.size(); i += 2) {
        const SyntaxNode& op = child(n, i);
        add_node(MutationOperator::LOR, op, op.kind == "And" ? "or" : "and");
      }
    } else if (k == "For") {
      const SyntaxNode& iter = child(n, 1);
      if (text(iter) != "[]") add_node(MutationOperator::ZIL, iter, "[]");
    } else if (k == "Constant" || k == "JoinedStr") {
      visit_constant(n);
    } else if (k == "Break") {
      add_node(MutationOperator::BCR, n, "continue");
    } else if (k == "Continue") {
      add_node(MutationOperator::BCR, n, "break");
    } else if (k == "Slice") {
      for (int c : n.children) add_node(MutationOperator::SIR, tree_.node(c), "");
    }
    visit_statement(n);
  }

  void visit_binop(const SyntaxNode& n) {
    const SyntaxNode& left = child(n, 0);
    const SyntaxNode& op = child(n, 1);
    const SyntaxNode& right = child(n, 2);
    const std::string_view spelled = op.text;
    auto aor = [&](std::string_view to) {
      add(MutationOperator::AOR, op.begin, op.end, std::string(to));
    };
    if (spelled == "+") {
      aor("-");
      aor("*");
    } else if (spelled == "-") {
      aor("+");
    } else if (spelled == "*") {
      aor("/");
    } else if (spelled == "/") {
      aor("*");
    } else if (spelled == "%") {
      aor("*");
    }
    static constexpr std::array<std::string_view, 7> kArithmetic = {"+", "-", "*", "/", "//", "%", "**"};
    if (std::find(kArithmetic.begin(), kArithmetic.end(), spelled) != kArithmetic.end()) {
      add_node(MutationOperator::AOD, n, std::string(text(left)));
      add_node(MutationOperator::AOD, n, std::string(text(right)));
    }
  }

  void visit_unary(const SyntaxNode& n) {
    const SyntaxNode& op = child(n, 0);
    const SyntaxNode& operand = child(n, 1);
    if (op.kind == "USub" || op.kind == "UAdd") {
      add_node(MutationOperator::AOD, n, std::string(text(operand)));
    } else if (op.kind == "Not") {
      add_node(MutationOperator::COD, n, std::string(text(operand)));
    }
  }

  void visit_compare(const SyntaxNode& n) {
    for (std::size_t i = 1; i < n.children.size(); i += 2) {
      const SyntaxNode& op = child(n, i);
      std::string_view to;
      if (op.kind == "Lt") to = ">=";
      else if (op.kind == "GtE") to = "<";
      else if (op.kind == "Gt") to = "<=";
      else if (op.kind == "LtE") to = ">";
      else if (op.kind == "Eq") to = "!=";
      else if (op.kind == "NotEq") to = "==";
      if (!to.empty()) add_node(MutationOperator::ROR, op, std::string(to));
    }
  }

  void visit_constant(const SyntaxNode& n) {
    if (is_docstring(n)) return;
    const std::string_view t = n.text;
    if (n.kind == "Constant" && t == "True") {
      add_node(MutationOperator::CRP, n, "False");
      return;
    }
    if (n.kind == "Constant" && t == "False") {
      add_node(MutationOperator::CRP, n, "True");
      return;
    }
    if (t.empty()) return;
    if (std::isdigit(static_cast<unsigned char>(t.front())) || t.front() == '.') {
      if (auto next = increment_integer(t)) add_node(MutationOperator::CRP, n, *next);
      return;
    }
    if (is_string_literal(n)) {
      if (auto empty = empty_string_like(text(n))) add_node(MutationOperator::CRP, n, *empty);
    }
  }

  // n+1 for integer literals (any radix); nullopt for floats/imaginary or
  // values beyond 64 bits.
  static std::optional<std::string> increment_integer(std::string_view literal) {
    std::string digits;
    for (char c : literal) {
      if (c != '_') digits.push_back(c);
    }
    int base = 10;
    std::string_view body = digits;
    if (body.size() > 2 && body[0] == '0') {
      const char r = static_cast<char>(std::tolower(static_cast<unsigned char>(body[1])));
      if (r == 'x') base = 16;
      else if (r == 'o') base = 8;
      else if (r == 'b') base = 2;
      if (base != 10) body.remove_prefix(2);
    }
    if (base == 10 && body.find_first_not_of("0123456789") != std::string_view::npos) {
      return std::nullopt;
    }
    unsigned long long value = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value, base);
    if (ec != std::errc() || ptr != body.data() + body.size()) return std::nullopt;
    if (value == std::numeric_limits<unsigned long long>::max()) return std::nullopt;
    return std::to_string(value + 1);
  }

  // "" (keeping a bytes prefix and the quote style) when any concatenated
  // piece has a non-empty body.
  static std::optional<std::string> empty_string_like(std::string_view span) {
    bool non_empty = false;
    std::string prefix;
    char quote = 0;
    for (const auto& tok : python::tokenize(span)) {
      if (tok.type != python::TokenType::string) continue;
      std::size_t p = 0;
      while (p < tok.text.size() && tok.text[p] != '"' && tok.text[p] != '\'') ++p;
      const char q = tok.text[p];
      const bool triple = tok.text.size() >= p + 6 && tok.text[p + 1] == q && tok.text[p + 2] == q;
      const std::size_t qlen = triple ? 3 : 1;
      if (tok.text.size() > p + 2 * qlen) non_empty = true;
      if (quote == 0) {
        quote = q;
        for (std::size_t i = 0; i < p; ++i) {
          if (tok.text[i] == 'b' || tok.text[i] == 'B') prefix.push_back(tok.text[i]);
        }
      }
    }
    if (!non_empty || quote == 0) return std::nullopt;
    return prefix + quote + quote;
  }

  void visit_statement(const SyntaxNode& n) {
    if (n.block < 0) return;
    const std::string_view k = n.kind;
    const bool simple = k == "Expr" || k == "Assign" || k == "AugAssign" || k == "AnnAssign" ||
                        k == "Return" || k == "Raise" || k == "Assert" || k == "Delete";
    if (!simple || is_docstring_statement(n)) return;
    if (k == "Return" && block_sizes_[n.block] == 1) return;
    add_node(MutationOperator::EXS, n, "pass");
  }

  std::string_view src_;
  const SyntaxTree& tree_;
  std::unordered_map<int, int> block_sizes_;
  std::vector<MutationSite> sites_;
};

}  // namespace

std::vector<MutationSite> enumerate_sites(std::string_view code) {
  const SyntaxTree tree = python::parse(code);
  return SiteCollector(code, tree).run();
}

std::string apply_mutation(std::string_view code, const MutationSite& site) {
  if (site.begin > site.end || site.end > code.size() ||
      code.substr(site.begin, site.end - site.begin) != site.original) {
    throw StaleSiteError("site " + site_provenance(site) + " does not match the code");
  }
  if (site.original == site.replacement) {
    throw StaleSiteError("site " + site_provenance(site) + " changes nothing");
  }
  std::string out;
  out.reserve(code.size() + site.replacement.size());
  out.append(code.substr(0, site.begin));
  out.append(site.replacement);
  out.append(code.substr(site.end));
  return out;
}

std::string site_provenance(const MutationSite& site) {
  return std::string(operator_code(site.op)) + "@" + std::to_string(site.begin) + "-" +
         std::to_string(site.end);
}

std::vector<VariantRecord> generate_mutants(std::string_view code, const MutationLimits& limits,
                                            std::string_view task_id) {
  if (limits.max_mutants == 0) throw ConfigError("max_mutants must be >= 1");
  std::vector<VariantRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& site : enumerate_sites(code)) {
    if (out.size() >= limits.max_mutants) break;
    if (!limits.operators.contains(site.op)) continue;
    std::string mutant = apply_mutation(code, site);
    if (mutant == code || !python::parses(mutant) || !seen.insert(mutant).second) continue;
    VariantRecord v;
    v.variant_id = (task_id.empty() ? std::string() : std::string(task_id) + ":") + "m" +
                   std::to_string(out.size() + 1);
    v.task_id = std::string(task_id);
    v.variant_code = std::move(mutant);
    v.variant_kind = VariantKind::mutated;
    v.provenance = {site_provenance(site)};
    v.parses_ok = true;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace semdiff
