#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_map>

#include "semdiff/errors.hpp"
#include "semdiff/python_syntax.hpp"

namespace semdiff::python {

int SyntaxTree::add(std::string kind, std::size_t begin, std::size_t end,
                    std::string_view text) {
  SyntaxNode n;
  n.kind = std::move(kind);
  n.text = text;
  n.begin = begin;
  n.end = end;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size() - 1);
}

void SyntaxTree::attach(int parent, int child) {
  node(parent).children.push_back(child);
  node(child).parent = parent;
}

std::vector<int> SyntaxTree::preorder() const {
  std::vector<int> order;
  if (nodes_.empty()) return order;
  order.reserve(nodes_.size());
  std::vector<int> stack{root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& ch = node(id).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::string SyntaxTree::dump() const {
  std::ostringstream out;
  auto rec = [&](auto&& self, int id) -> void {
    const auto& n = node(id);
    out << '(' << n.kind;
    for (int c : n.children) {
      out << ' ';
      self(self, c);
    }
    out << ')';
  };
  if (!nodes_.empty()) rec(rec, root());
  return out.str();
}

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async",
    "await", "break",  "class",   "continue", "def",      "del",    "elif",
    "else",  "except", "finally", "for",      "from",     "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};

bool is_keyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

const std::unordered_map<std::string_view, std::string_view>& binary_op_kinds() {
  static const std::unordered_map<std::string_view, std::string_view> kinds = {
      {"+", "Add"},     {"-", "Sub"},     {"*", "Mult"},   {"/", "Div"},
      {"//", "FloorDiv"}, {"%", "Mod"},   {"**", "Pow"},   {"@", "MatMult"},
      {"<<", "LShift"}, {">>", "RShift"}, {"|", "BitOr"},  {"^", "BitXor"},
      {"&", "BitAnd"}};
  return kinds;
}

const std::unordered_map<std::string_view, std::string_view>& compare_op_kinds() {
  static const std::unordered_map<std::string_view, std::string_view> kinds = {
      {"<", "Lt"}, {">", "Gt"}, {"==", "Eq"}, {">=", "GtE"}, {"<=", "LtE"}, {"!=", "NotEq"}};
  return kinds;
}

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> tokens)
      : src_(src), toks_(std::move(tokens)) {}

  SyntaxTree run() {
    const int module = tree_.add("Module", 0, src_.size());
    while (!at(TokenType::end_marker)) {
      if (at(TokenType::newline)) {
        advance();
        continue;
      }
      for (int s : statement()) attach_statement(module, s, 0);
    }
    return std::move(tree_);
  }

 private:
  // ---- token helpers -------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(TokenType t) const { return peek().type == t; }
  bool at_op(std::string_view op, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == TokenType::op && t.text == op;
  }
  bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == TokenType::name && t.text == kw;
  }
  bool at_identifier() const {
    return at(TokenType::name) && !is_keyword(peek().text);
  }

  const Token& advance() {
    const Token& t = toks_[pos_];
    last_end_ = t.end;
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string near;
    switch (t.type) {
      case TokenType::newline: near = "NEWLINE"; break;
      case TokenType::indent: near = "INDENT"; break;
      case TokenType::dedent: near = "DEDENT"; break;
      case TokenType::end_marker: near = "end of input"; break;
      default: near = "'" + std::string(t.text) + "'";
    }
    throw ParseError(t.line, t.column, what + " near " + near);
  }

  const Token& expect_op(std::string_view op) {
    if (!at_op(op)) fail("expected '" + std::string(op) + "'");
    return advance();
  }
  const Token& expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail("expected '" + std::string(kw) + "'");
    return advance();
  }
  const Token& expect_identifier() {
    if (!at_identifier()) fail("expected identifier");
    return advance();
  }
  void expect(TokenType t, const char* what) {
    if (!at(t)) fail(std::string("expected ") + what);
    advance();
  }

  std::size_t here() const { return peek().begin; }

  int make(std::string_view kind, std::size_t begin, std::string_view text = {}) {
    return tree_.add(std::string(kind), begin, last_end_, text);
  }
  int make_token(std::string_view kind, const Token& t) {
    return tree_.add(std::string(kind), t.begin, t.end, t.text);
  }
  void finish(int id) { tree_.node(id).end = last_end_; }
  void attach(int parent, int child) { tree_.attach(parent, child); }
  void attach_statement(int parent, int child, int block_id) {
    tree_.attach(parent, child);
    tree_.node(child).block = block_id;
  }

  // ---- statements ----------------------------------------------------

  std::vector<int> statement() {
    if (at_op("@")) return {decorated()};
    if (at(TokenType::name)) {
      const auto w = peek().text;
      if (w == "if") return {if_stmt()};
      if (w == "while") return {while_stmt()};
      if (w == "for") return {for_stmt(here(), false)};
      if (w == "try") return {try_stmt()};
      if (w == "with") return {with_stmt(here(), false)};
      if (w == "def") return {funcdef(here(), false, {})};
      if (w == "class") return {classdef(here(), {})};
      if (w == "async") {
        const std::size_t begin = here();
        advance();
        if (at_kw("def")) return {funcdef(begin, true, {})};
        if (at_kw("for")) return {for_stmt(begin, true)};
        if (at_kw("with")) return {with_stmt(begin, true)};
        fail("expected def, for or with after async");
      }
    }
    return simple_statements();
  }

  std::vector<int> simple_statements() {
    std::vector<int> out;
    out.push_back(small_statement());
    while (at_op(";")) {
      advance();
      if (at(TokenType::newline)) break;
      out.push_back(small_statement());
    }
    if (at(TokenType::end_marker)) return out;
    expect(TokenType::newline, "end of statement");
    return out;
  }

  int small_statement() {
    const std::size_t begin = here();
    if (at(TokenType::name)) {
      const auto w = peek().text;
      if (w == "pass") { advance(); return make("Pass", begin); }
      if (w == "break") { advance(); return make("Break", begin); }
      if (w == "continue") { advance(); return make("Continue", begin); }
      if (w == "return") {
        advance();
        const int n = tree_.add("Return", begin, last_end_);
        if (!at_statement_end()) attach(n, testlist_star_expr());
        finish(n);
        return n;
      }
      if (w == "raise") {
        advance();
        const int n = tree_.add("Raise", begin, last_end_);
        if (!at_statement_end()) {
          attach(n, test());
          if (at_kw("from")) {
            advance();
            attach(n, test());
          }
        }
        finish(n);
        return n;
      }
      if (w == "global" || w == "nonlocal") {
        advance();
        expect_identifier();
        while (at_op(",")) {
          advance();
          expect_identifier();
        }
        return make(w == "global" ? "Global" : "Nonlocal", begin);
      }
      if (w == "del") {
        advance();
        const int n = tree_.add("Delete", begin, last_end_);
        attach(n, target());
        while (at_op(",")) {
          advance();
          if (at_statement_end()) break;
          attach(n, target());
        }
        finish(n);
        return n;
      }
      if (w == "assert") {
        advance();
        const int n = tree_.add("Assert", begin, last_end_);
        attach(n, test());
        if (at_op(",")) {
          advance();
          attach(n, test());
        }
        finish(n);
        return n;
      }
      if (w == "import") return import_name();
      if (w == "from") return import_from();
    }
    return expression_statement();
  }

  bool at_statement_end() const {
    return at(TokenType::newline) || at(TokenType::end_marker) || at_op(";");
  }

  int import_name() {
    const std::size_t begin = here();
    expect_kw("import");
    const int n = tree_.add("Import", begin, last_end_);
    do {
      if (at_op(",")) advance();
      attach(n, dotted_alias());
    } while (at_op(","));
    finish(n);
    return n;
  }

  int dotted_alias() {
    const std::size_t begin = here();
    const Token& first = expect_identifier();
    while (at_op(".")) {
      advance();
      expect_identifier();
    }
    if (at_kw("as")) {
      advance();
      expect_identifier();
    }
    return tree_.add("alias", begin, last_end_, first.text);
  }

  int import_from() {
    const std::size_t begin = here();
    expect_kw("from");
    bool any = false;
    while (at_op(".") || at_op("...")) {
      advance();
      any = true;
    }
    if (!at_kw("import")) {
      expect_identifier();
      while (at_op(".")) {
        advance();
        expect_identifier();
      }
      any = true;
    }
    if (!any) fail("expected module name");
    expect_kw("import");
    const int n = tree_.add("ImportFrom", begin, last_end_);
    if (at_op("*")) {
      const Token& star = advance();
      attach(n, make_token("alias", star));
    } else {
      const bool paren = at_op("(");
      if (paren) advance();
      attach(n, plain_alias());
      while (at_op(",")) {
        advance();
        if (paren && at_op(")")) break;
        attach(n, plain_alias());
      }
      if (paren) expect_op(")");
    }
    finish(n);
    return n;
  }

  int plain_alias() {
    const std::size_t begin = here();
    const Token& name = expect_identifier();
    if (at_kw("as")) {
      advance();
      expect_identifier();
    }
    return tree_.add("alias", begin, last_end_, name.text);
  }

  static bool is_augassign(const Token& t) {
    if (t.type != TokenType::op || t.text.size() < 2 || t.text.back() != '=') return false;
    const auto op = t.text.substr(0, t.text.size() - 1);
    return binary_op_kinds().count(op) > 0;
  }

  int expression_statement() {
    const std::size_t begin = here();
    const int first = at_kw("yield") ? yield_expr() : testlist_star_expr();
    if (is_augassign(peek())) {
      const Token& op = advance();
      const int n = tree_.add("AugAssign", begin, last_end_);
      attach(n, first);
      const auto spelled = op.text.substr(0, op.text.size() - 1);
      attach(n, tree_.add(std::string(binary_op_kinds().at(spelled)), op.begin, op.end, op.text));
      attach(n, at_kw("yield") ? yield_expr() : testlist_star_expr());
      finish(n);
      return n;
    }
    if (at_op(":")) {
      advance();
      const int n = tree_.add("AnnAssign", begin, last_end_);
      attach(n, first);
      attach(n, test());
      if (at_op("=")) {
        advance();
        attach(n, at_kw("yield") ? yield_expr() : testlist_star_expr());
      }
      finish(n);
      return n;
    }
    if (at_op("=")) {
      const int n = tree_.add("Assign", begin, last_end_);
      attach(n, first);
      while (at_op("=")) {
        advance();
        attach(n, at_kw("yield") ? yield_expr() : testlist_star_expr());
      }
      finish(n);
      return n;
    }
    const int n = tree_.add("Expr", begin, last_end_);
    attach(n, first);
    finish(n);
    return n;
  }

  // Block after ':' -- either an indented suite or statements on the same line.
  void block(int parent) {
    const int id = ++block_count_;
    if (at(TokenType::newline)) {
      advance();
      expect(TokenType::indent, "an indented block");
      while (!at(TokenType::dedent) && !at(TokenType::end_marker)) {
        if (at(TokenType::newline)) {
          advance();
          continue;
        }
        for (int s : statement()) attach_statement(parent, s, id);
      }
      if (at(TokenType::dedent)) advance();
    } else {
      for (int s : simple_statements()) attach_statement(parent, s, id);
    }
    finish(parent);
  }

  int if_stmt() {
    const std::size_t begin = here();
    advance();  // 'if' or 'elif'
    const int n = tree_.add("If", begin, last_end_);
    attach(n, named_expr_test());
    expect_op(":");
    block(n);
    if (at_kw("elif")) {
      attach(n, if_stmt());
    } else if (at_kw("else")) {
      advance();
      expect_op(":");
      block(n);
    }
    finish(n);
    return n;
  }

  int while_stmt() {
    const std::size_t begin = here();
    expect_kw("while");
    const int n = tree_.add("While", begin, last_end_);
    attach(n, named_expr_test());
    expect_op(":");
    block(n);
    if (at_kw("else")) {
      advance();
      expect_op(":");
      block(n);
    }
    finish(n);
    return n;
  }

  // For children: target, iter, body..., orelse...
  int for_stmt(std::size_t begin, bool is_async) {
    expect_kw("for");
    const int n = tree_.add(is_async ? "AsyncFor" : "For", begin, last_end_);
    attach(n, target_list());
    expect_kw("in");
    attach(n, testlist_star_expr());
    expect_op(":");
    block(n);
    if (at_kw("else")) {
      advance();
      expect_op(":");
      block(n);
    }
    finish(n);
    return n;
  }

  int try_stmt() {
    const std::size_t begin = here();
    expect_kw("try");
    const int n = tree_.add("Try", begin, last_end_);
    expect_op(":");
    block(n);
    bool handlers = false;
    while (at_kw("except")) {
      handlers = true;
      const std::size_t hb = here();
      advance();
      const int h = tree_.add("ExceptHandler", hb, last_end_);
      if (!at_op(":")) {
        attach(h, test());
        if (at_op(",")) {
          // Legacy tuple-without-parens is rejected by Python 3.
          fail("multiple exception types must be parenthesized");
        }
        if (at_kw("as")) {
          advance();
          expect_identifier();
        }
      }
      expect_op(":");
      block(h);
      attach(n, h);
    }
    if (handlers && at_kw("else")) {
      advance();
      expect_op(":");
      block(n);
    }
    bool final_block = false;
    if (at_kw("finally")) {
      final_block = true;
      advance();
      expect_op(":");
      block(n);
    }
    if (!handlers && !final_block) fail("expected 'except' or 'finally'");
    finish(n);
    return n;
  }

  int with_stmt(std::size_t begin, bool is_async) {
    expect_kw("with");
    const int n = tree_.add(is_async ? "AsyncWith" : "With", begin, last_end_);
    do {
      if (at_op(",")) advance();
      const std::size_t ib = here();
      const int item = tree_.add("withitem", ib, last_end_);
      attach(item, test());
      if (at_kw("as")) {
        advance();
        attach(item, target());
      }
      finish(item);
      attach(n, item);
    } while (at_op(","));
    expect_op(":");
    block(n);
    finish(n);
    return n;
  }

  int decorated() {
    const std::size_t begin = here();
    std::vector<int> decorators;
    while (at_op("@")) {
      advance();
      decorators.push_back(named_expr_test());
      expect(TokenType::newline, "newline after decorator");
    }
    if (at_kw("def")) return funcdef(begin, false, decorators);
    if (at_kw("class")) return classdef(begin, decorators);
    if (at_kw("async") && at_kw("def", 1)) {
      advance();
      return funcdef(begin, true, decorators);
    }
    fail("expected def or class after decorator");
  }

  int funcdef(std::size_t begin, bool is_async, const std::vector<int>& decorators) {
    expect_kw("def");
    const Token& name = expect_identifier();
    const int n = tree_.add(is_async ? "AsyncFunctionDef" : "FunctionDef", begin,
                            last_end_, name.text);
    for (int d : decorators) attach(n, d);
    expect_op("(");
    attach(n, parameters(")", true));
    expect_op(")");
    if (at_op("->")) {
      advance();
      attach(n, test());
    }
    expect_op(":");
    block(n);
    return n;
  }

  int classdef(std::size_t begin, const std::vector<int>& decorators) {
    expect_kw("class");
    const Token& name = expect_identifier();
    const int n = tree_.add("ClassDef", begin, last_end_, name.text);
    for (int d : decorators) attach(n, d);
    if (at_op("(")) {
      advance();
      call_arguments(n, ")");
      expect_op(")");
    }
    expect_op(":");
    block(n);
    return n;
  }

  // Parameter list up to (not including) `close`. Annotations only when
  // `annotated` (def), not for lambda.
  int parameters(std::string_view close, bool annotated) {
    const std::size_t begin = here();
    const int args = tree_.add("arguments", begin, begin);
    std::vector<int> defaults;
    while (!at_op(close)) {
      if (at_op("/")) {
        advance();
      } else if (at_op("*") && (at_op(",", 1) || at_op(close, 1))) {
        advance();
      } else {
        const std::size_t pb = here();
        if (at_op("*") || at_op("**")) advance();
        const Token& pname = expect_identifier();
        const int arg = tree_.add("arg", pb, last_end_, pname.text);
        if (annotated && at_op(":")) {
          advance();
          attach(arg, test());
        }
        finish(arg);
        attach(args, arg);
        if (at_op("=")) {
          advance();
          defaults.push_back(test());
        }
      }
      if (!at_op(",")) break;
      advance();
    }
    for (int d : defaults) attach(args, d);
    if (tree_.node(args).children.empty()) {
      tree_.node(args).end = begin;
    } else {
      finish(args);
    }
    return args;
  }

  // ---- expressions ---------------------------------------------------

  // Comma-separated (test | star_expr); a bare comma list becomes a Tuple.
  int testlist_star_expr() {
    const std::size_t begin = here();
    const int first = star_or_named();
    if (!at_op(",")) return first;
    const int tup = tree_.add("Tuple", begin, last_end_);
    attach(tup, first);
    while (at_op(",")) {
      advance();
      if (!starts_expression()) break;
      attach(tup, star_or_named());
    }
    finish(tup);
    return tup;
  }

  int star_or_named() {
    if (at_op("*")) return star_expr();
    return named_expr_test();
  }

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.type) {
      case TokenType::number:
      case TokenType::string:
        return true;
      case TokenType::name:
        return !is_keyword(t.text) || t.text == "None" || t.text == "True" ||
               t.text == "False" || t.text == "not" || t.text == "lambda" ||
               t.text == "await" || t.text == "yield";
      case TokenType::op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "*" || t.text == "..." ||
               t.text == "**";
      default:
        return false;
    }
  }

  // Assignment / loop / del targets: exprs (and starred) separated by commas.
  int target_list() {
    const std::size_t begin = here();
    const int first = target();
    if (!at_op(",")) return first;
    const int tup = tree_.add("Tuple", begin, last_end_);
    attach(tup, first);
    while (at_op(",")) {
      advance();
      if (at_kw("in") || at_op("=") || at_statement_end() || at_op(")")) break;
      attach(tup, target());
    }
    finish(tup);
    return tup;
  }

  int target() {
    if (at_op("*")) return star_expr();
    return expr();
  }

  int star_expr() {
    const std::size_t begin = here();
    expect_op("*");
    const int n = tree_.add("Starred", begin, last_end_);
    attach(n, expr());
    finish(n);
    return n;
  }

  int named_expr_test() {
    const std::size_t begin = here();
    const int lhs = test();
    if (at_op(":=")) {
      if (tree_.node(lhs).kind != "Name") fail("cannot use assignment expression here");
      advance();
      const int n = tree_.add("NamedExpr", begin, last_end_);
      attach(n, lhs);
      attach(n, test());
      finish(n);
      return n;
    }
    return lhs;
  }

  int test() {
    if (at_kw("lambda")) return lambda_def(true);
    const std::size_t begin = here();
    const int body = or_test();
    if (at_kw("if")) {
      advance();
      const int cond = or_test();
      expect_kw("else");
      const int orelse = test();
      const int n = tree_.add("IfExp", begin, last_end_);
      attach(n, cond);
      attach(n, body);
      attach(n, orelse);
      return n;
    }
    return body;
  }

  // Condition / iterable positions inside comprehensions (no bare ternary).
  int test_no_cond() {
    if (at_kw("lambda")) return lambda_def(false);
    return or_test();
  }

  int lambda_def(bool allow_cond) {
    const std::size_t begin = here();
    expect_kw("lambda");
    const int n = tree_.add("Lambda", begin, last_end_);
    attach(n, parameters(":", false));
    expect_op(":");
    attach(n, allow_cond ? test() : test_no_cond());
    finish(n);
    return n;
  }

  int bool_chain(std::string_view keyword, std::string_view op_kind, int (Parser::*operand)()) {
    const std::size_t begin = here();
    const int first = (this->*operand)();
    if (!at_kw(keyword)) return first;
    const int n = tree_.add("BoolOp", begin, last_end_);
    attach(n, first);
    while (at_kw(keyword)) {
      const Token& op = advance();
      attach(n, make_token(op_kind, op));
      attach(n, (this->*operand)());
    }
    finish(n);
    return n;
  }

  int or_test() { return bool_chain("or", "Or", &Parser::and_test); }
  int and_test() { return bool_chain("and", "And", &Parser::not_test); }

  int not_test() {
    if (at_kw("not")) {
      const std::size_t begin = here();
      const Token& op = advance();
      const int n = tree_.add("UnaryOp", begin, last_end_);
      attach(n, make_token("Not", op));
      attach(n, not_test());
      finish(n);
      return n;
    }
    return comparison();
  }

  // Returns the comparison operator kind at the cursor and its token count,
  // or an empty kind when there is none.
  std::pair<std::string_view, int> comparison_operator() const {
    const Token& t = peek();
    if (t.type == TokenType::op) {
      auto it = compare_op_kinds().find(t.text);
      if (it != compare_op_kinds().end()) return {it->second, 1};
      return {{}, 0};
    }
    if (at_kw("in")) return {"In", 1};
    if (at_kw("not") && at_kw("in", 1)) return {"NotIn", 2};
    if (at_kw("is")) return at_kw("not", 1) ? std::pair<std::string_view, int>{"IsNot", 2}
                                            : std::pair<std::string_view, int>{"Is", 1};
    return {{}, 0};
  }

  int comparison() {
    const std::size_t begin = here();
    const int left = expr();
    auto [kind, count] = comparison_operator();
    if (count == 0) return left;
    const int n = tree_.add("Compare", begin, last_end_);
    attach(n, left);
    while (count > 0) {
      const Token& first = peek();
      for (int i = 0; i < count; ++i) advance();
      const std::size_t op_end = last_end_;
      attach(n, tree_.add(std::string(kind), first.begin, op_end,
                          src_.substr(first.begin, op_end - first.begin)));
      attach(n, expr());
      std::tie(kind, count) = comparison_operator();
    }
    finish(n);
    return n;
  }

  // Left-associative binary level over the given spellings.
  int binary_level(std::initializer_list<std::string_view> ops, int (Parser::*operand)()) {
    const std::size_t begin = here();
    int left = (this->*operand)();
    while (peek().type == TokenType::op &&
           std::find(ops.begin(), ops.end(), peek().text) != ops.end()) {
      const Token& op = advance();
      const int n = tree_.add("BinOp", begin, last_end_);
      attach(n, left);
      attach(n, tree_.add(std::string(binary_op_kinds().at(op.text)), op.begin, op.end, op.text));
      attach(n, (this->*operand)());
      finish(n);
      left = n;
    }
    return left;
  }

  int expr() { return binary_level({"|"}, &Parser::xor_expr); }
  int xor_expr() { return binary_level({"^"}, &Parser::and_expr); }
  int and_expr() { return binary_level({"&"}, &Parser::shift_expr); }
  int shift_expr() { return binary_level({"<<", ">>"}, &Parser::arith_expr); }
  int arith_expr() { return binary_level({"+", "-"}, &Parser::term); }
  int term() { return binary_level({"*", "/", "//", "%", "@"}, &Parser::factor); }

  int factor() {
    if (at_op("-") || at_op("+") || at_op("~")) {
      const std::size_t begin = here();
      const Token& op = advance();
      const std::string_view kind = op.text == "-" ? "USub" : op.text == "+" ? "UAdd" : "Invert";
      const int n = tree_.add("UnaryOp", begin, last_end_);
      attach(n, make_token(kind, op));
      attach(n, factor());
      finish(n);
      return n;
    }
    return power();
  }

  int power() {
    const std::size_t begin = here();
    const int base = await_primary();
    if (!at_op("**")) return base;
    const Token& op = advance();
    const int n = tree_.add("BinOp", begin, last_end_);
    attach(n, base);
    attach(n, tree_.add("Pow", op.begin, op.end, op.text));
    attach(n, factor());
    finish(n);
    return n;
  }

  int await_primary() {
    if (at_kw("await")) {
      const std::size_t begin = here();
      advance();
      const int n = tree_.add("Await", begin, last_end_);
      attach(n, await_primary());
      finish(n);
      return n;
    }
    const std::size_t begin = here();
    int node = atom();
    while (true) {
      if (at_op("(")) {
        advance();
        const int call = tree_.add("Call", begin, last_end_);
        attach(call, node);
        call_arguments(call, ")");
        expect_op(")");
        finish(call);
        node = call;
      } else if (at_op("[")) {
        advance();
        const int sub = tree_.add("Subscript", begin, last_end_);
        attach(sub, node);
        attach(sub, subscript_list());
        expect_op("]");
        finish(sub);
        node = sub;
      } else if (at_op(".")) {
        advance();
        const Token& attr = expect_identifier();
        const int a = tree_.add("Attribute", begin, last_end_, attr.text);
        attach(a, node);
        node = a;
      } else {
        return node;
      }
    }
  }

  void call_arguments(int call, std::string_view close) {
    while (!at_op(close)) {
      const std::size_t begin = here();
      if (at_op("*")) {
        attach(call, star_expr());
      } else if (at_op("**")) {
        advance();
        const int kw = tree_.add("keyword", begin, last_end_);
        attach(kw, test());
        finish(kw);
        attach(call, kw);
      } else if (at_identifier() && at_op("=", 1)) {
        const Token& name = advance();
        advance();
        const int kw = tree_.add("keyword", begin, last_end_, name.text);
        attach(kw, test());
        finish(kw);
        attach(call, kw);
      } else {
        const int value = named_expr_test();
        if (at_kw("for") || at_kw("async")) {
          attach(call, comprehension_tail("GeneratorExp", begin, value));
        } else {
          attach(call, value);
        }
      }
      if (!at_op(",")) break;
      advance();
    }
  }

  int subscript_list() {
    const std::size_t begin = here();
    const int first = subscript();
    if (!at_op(",")) return first;
    const int tup = tree_.add("Tuple", begin, last_end_);
    attach(tup, first);
    while (at_op(",")) {
      advance();
      if (at_op("]")) break;
      attach(tup, subscript());
    }
    finish(tup);
    return tup;
  }

  // Slice children are exactly the bounds that are spelled out.
  int subscript() {
    const std::size_t begin = here();
    if (at_op("*")) return star_expr();
    int lower = -1;
    if (!at_op(":")) {
      lower = named_expr_test();
      if (!at_op(":")) return lower;
    }
    const int sl = tree_.add("Slice", begin, last_end_);
    if (lower >= 0) attach(sl, lower);
    expect_op(":");
    if (!at_op(":") && !at_op("]") && !at_op(",")) attach(sl, test());
    if (at_op(":")) {
      advance();
      if (!at_op("]") && !at_op(",")) attach(sl, test());
    }
    finish(sl);
    return sl;
  }

  int comprehension_tail(std::string_view kind, std::size_t begin, int element) {
    const int n = tree_.add(std::string(kind), begin, last_end_);
    attach(n, element);
    comprehension_clauses(n);
    finish(n);
    return n;
  }

  int dict_comprehension_tail(std::size_t begin, int key, int value) {
    const int n = tree_.add("DictComp", begin, last_end_);
    attach(n, key);
    attach(n, value);
    comprehension_clauses(n);
    finish(n);
    return n;
  }

  void comprehension_clauses(int parent) {
    while (at_kw("for") || at_kw("async")) {
      const std::size_t cb = here();
      if (at_kw("async")) advance();
      expect_kw("for");
      const int comp = tree_.add("comprehension", cb, last_end_);
      attach(comp, target_list());
      expect_kw("in");
      attach(comp, or_test());
      while (at_kw("if")) {
        advance();
        attach(comp, test_no_cond());
      }
      finish(comp);
      attach(parent, comp);
    }
  }

  int yield_expr() {
    const std::size_t begin = here();
    expect_kw("yield");
    if (at_kw("from")) {
      advance();
      const int n = tree_.add("YieldFrom", begin, last_end_);
      attach(n, test());
      finish(n);
      return n;
    }
    const int n = tree_.add("Yield", begin, last_end_);
    if (starts_expression()) attach(n, testlist_star_expr());
    finish(n);
    return n;
  }

  // Marks `node` as parenthesized: its span grows to cover the brackets.
  int widen(int node, std::size_t begin) {
    tree_.node(node).begin = begin;
    tree_.node(node).end = last_end_;
    return node;
  }

  int atom() {
    const Token& t = peek();
    const std::size_t begin = t.begin;
    switch (t.type) {
      case TokenType::number:
        advance();
        return make_token("Constant", t);
      case TokenType::string:
        return strings();
      case TokenType::name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          advance();
          return make_token("Constant", t);
        }
        if (is_keyword(t.text)) fail("unexpected keyword");
        advance();
        return make_token("Name", t);
      }
      case TokenType::op:
        break;
      default:
        fail("expected expression");
    }
    if (t.text == "...") {
      advance();
      return make_token("Constant", t);
    }
    if (t.text == "(") {
      advance();
      if (at_op(")")) {
        advance();
        return make("Tuple", begin);
      }
      if (at_kw("yield")) {
        const int y = yield_expr();
        expect_op(")");
        return widen(y, begin);
      }
      const int first = star_or_named();
      if (at_kw("for") || at_kw("async")) {
        const int g = comprehension_tail("GeneratorExp", begin, first);
        expect_op(")");
        return widen(g, begin);
      }
      if (!at_op(",")) {
        expect_op(")");
        return widen(first, begin);
      }
      const int tup = tree_.add("Tuple", begin, last_end_);
      attach(tup, first);
      while (at_op(",")) {
        advance();
        if (at_op(")")) break;
        attach(tup, star_or_named());
      }
      expect_op(")");
      finish(tup);
      return tup;
    }
    if (t.text == "[") {
      advance();
      if (at_op("]")) {
        advance();
        return make("List", begin);
      }
      const int first = star_or_named();
      if (at_kw("for") || at_kw("async")) {
        const int c = comprehension_tail("ListComp", begin, first);
        expect_op("]");
        return widen(c, begin);
      }
      const int list = tree_.add("List", begin, last_end_);
      attach(list, first);
      while (at_op(",")) {
        advance();
        if (at_op("]")) break;
        attach(list, star_or_named());
      }
      expect_op("]");
      finish(list);
      return list;
    }
    if (t.text == "{") {
      advance();
      if (at_op("}")) {
        advance();
        return make("Dict", begin);
      }
      return dict_or_set(begin);
    }
    fail("expected expression");
  }

  int dict_or_set(std::size_t begin) {
    // First element decides between dict and set.
    if (at_op("**")) return dict_body(begin, -1, -1);
    const int first = star_or_named();
    if (at_op(":")) {
      advance();
      const int value = test();
      if (at_kw("for") || at_kw("async")) {
        const int c = dict_comprehension_tail(begin, first, value);
        expect_op("}");
        return widen(c, begin);
      }
      return dict_body(begin, first, value);
    }
    if (at_kw("for") || at_kw("async")) {
      const int c = comprehension_tail("SetComp", begin, first);
      expect_op("}");
      return widen(c, begin);
    }
    const int set = tree_.add("Set", begin, last_end_);
    attach(set, first);
    while (at_op(",")) {
      advance();
      if (at_op("}")) break;
      attach(set, star_or_named());
    }
    expect_op("}");
    finish(set);
    return set;
  }

  int dict_body(std::size_t begin, int key, int value) {
    const int dict = tree_.add("Dict", begin, last_end_);
    auto entry = [&]() {
      if (at_op("**")) {
        advance();
        attach(dict, expr());
        return;
      }
      attach(dict, test());
      expect_op(":");
      attach(dict, test());
    };
    if (key >= 0) {
      attach(dict, key);
      attach(dict, value);
    } else {
      entry();
    }
    while (at_op(",")) {
      advance();
      if (at_op("}")) break;
      entry();
    }
    expect_op("}");
    finish(dict);
    return dict;
  }

  // Adjacent literals concatenate into a single constant.
  int strings() {
    const std::size_t begin = here();
    bool formatted = false;
    while (at(TokenType::string)) {
      const Token& s = advance();
      for (char c : s.text) {
        if (c == '\'' || c == '"') break;
        if (c == 'f' || c == 'F') formatted = true;
      }
    }
    return tree_.add(formatted ? "JoinedStr" : "Constant", begin, last_end_,
                     src_.substr(begin, last_end_ - begin));
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  int block_count_ = 0;
  SyntaxTree tree_;
};

}  // namespace

SyntaxTree parse(std::string_view source) {
  return Parser(source, tokenize(source)).run();
}

bool parses(std::string_view source) noexcept {
  try {
    parse(source);
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace semdiff::python
