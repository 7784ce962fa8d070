#include <algorithm>
#include <array>
#include <cctype>

#include "semdiff/errors.hpp"
#include "semdiff/python_syntax.hpp"

namespace semdiff::python {

namespace {

// Longest first so that prefix matching picks the maximal munch.
constexpr std::array<std::string_view, 24> kMultiCharOps = {
    "**=", "//=", ">>=", "<<=", "...", "!=", "->", ":=", "**", "//", "<<", ">>",
    "<=",  ">=",  "==",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@="};
constexpr std::string_view kOps1 = "+-*/%@&|^~<>()[]{},:;.=";

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

class Tokenizer {
 public:
  explicit Tokenizer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0) {
        if (!handle_indentation()) continue;
      }
      scan_token();
    }
    if (line_has_tokens_) push(TokenType::newline, pos_, pos_);
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(TokenType::dedent, pos_, pos_);
    }
    push(TokenType::end_marker, pos_, pos_);
    return std::move(tokens_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_, pos_ - line_begin_ + 1, what);
  }

  void push(TokenType type, std::size_t begin, std::size_t end) {
    tokens_.push_back(Token{type, src_.substr(begin, end - begin), begin, end,
                            line_, begin - line_begin_ + 1});
  }

  void new_line(std::size_t next) {
    ++line_;
    line_begin_ = next;
  }

  // Measures the indentation of a fresh logical line. Returns false when the
  // line is blank or comment-only (the caller loops without emitting).
  bool handle_indentation() {
    std::size_t width = 0;
    std::size_t p = pos_;
    while (p < src_.size()) {
      const char c = src_[p];
      if (c == ' ') {
        ++width;
      } else if (c == '\t') {
        width = (width / 8 + 1) * 8;
      } else if (c == '\f') {
        width = 0;
      } else {
        break;
      }
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return false;
    }
    const char c = src_[p];
    if (c == '#' || c == '\n' || c == '\r' ||
        (c == '\\' && p + 1 < src_.size() && src_[p + 1] == '\n')) {
      while (p < src_.size() && src_[p] != '\n') ++p;
      if (p < src_.size()) {
        ++p;
        new_line(p);
      }
      pos_ = p;
      return false;
    }
    pos_ = p;
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(TokenType::indent, pos_, pos_);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(TokenType::dedent, pos_, pos_);
      }
      if (width != indents_.back()) fail("unindent does not match any outer level");
    }
    return true;
  }

  void scan_token() {
    const char c = src_[pos_];
    if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
      ++pos_;
      return;
    }
    if (c == '#') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return;
    }
    if (c == '\\') {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && src_[p] == '\r') ++p;
      if (p < src_.size() && src_[p] == '\n') {
        pos_ = p + 1;
        new_line(pos_);
        return;
      }
      fail("unexpected character after line continuation");
    }
    if (c == '\n') {
      if (depth_ == 0 && line_has_tokens_) {
        push(TokenType::newline, pos_, pos_ + 1);
        line_has_tokens_ = false;
        at_line_start_ = true;
      } else if (depth_ == 0) {
        at_line_start_ = true;
      }
      ++pos_;
      new_line(pos_);
      return;
    }
    line_has_tokens_ = true;
    const auto uc = static_cast<unsigned char>(c);
    if (is_ident_start(uc)) {
      if (try_string_with_prefix()) return;
      const std::size_t begin = pos_;
      while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
      push(TokenType::name, begin, pos_);
      return;
    }
    if (c == '"' || c == '\'') {
      scan_string(pos_, pos_);
      return;
    }
    if (std::isdigit(uc) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      scan_number();
      return;
    }
    scan_operator();
  }

  bool try_string_with_prefix() {
    std::size_t p = pos_;
    while (p < src_.size() && p - pos_ < 3 &&
           std::string_view("rRbBuUfF").find(src_[p]) != std::string_view::npos) {
      ++p;
    }
    if (p == pos_ || p - pos_ > 2 || p >= src_.size()) return false;
    if (src_[p] != '"' && src_[p] != '\'') return false;
    scan_string(pos_, p);
    return true;
  }

  void scan_string(std::size_t begin, std::size_t quote_pos) {
    const char q = src_[quote_pos];
    const bool triple = quote_pos + 2 < src_.size() && src_[quote_pos + 1] == q &&
                        src_[quote_pos + 2] == q;
    std::size_t p = quote_pos + (triple ? 3 : 1);
    const std::size_t start_line = line_;
    const std::size_t start_column = begin - line_begin_ + 1;
    while (true) {
      if (p >= src_.size()) {
        pos_ = p;
        throw ParseError(start_line, start_column, "unterminated string literal");
      }
      const char c = src_[p];
      if (c == '\\') {
        if (p + 1 < src_.size() && src_[p + 1] == '\n') new_line(p + 2);
        p += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) {
          pos_ = p;
          fail("unterminated string literal");
        }
        new_line(p + 1);
        ++p;
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++p;
          break;
        }
        if (p + 2 < src_.size() && src_[p + 1] == q && src_[p + 2] == q) {
          p += 3;
          break;
        }
      }
      ++p;
    }
    // Multi-line literals report the position they started at.
    tokens_.push_back(Token{TokenType::string, src_.substr(begin, p - begin), begin, p,
                            start_line, start_column});
    pos_ = p;
  }

  void scan_number() {
    const std::size_t begin = pos_;
    const bool radix = src_[pos_] == '0' && pos_ + 1 < src_.size() &&
                       std::string_view("xXoObB").find(src_[pos_ + 1]) != std::string_view::npos;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        ++pos_;
        continue;
      }
      if ((c == '+' || c == '-') && !radix && pos_ > begin &&
          (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E')) {
        ++pos_;
        continue;
      }
      break;
    }
    push(TokenType::number, begin, pos_);
  }

  void scan_operator() {
    const std::string_view rest = src_.substr(pos_);
    std::size_t len = 0;
    for (auto op : kMultiCharOps) {
      if (rest.starts_with(op)) {
        len = op.size();
        break;
      }
    }
    if (len == 0 && kOps1.find(rest.front()) != std::string_view::npos) len = 1;
    if (len == 0) fail(std::string("unexpected character '") + rest.front() + "'");
    const char c = rest.front();
    if (len == 1) {
      if (c == '(' || c == '[' || c == '{') {
        ++depth_;
      } else if (c == ')' || c == ']' || c == '}') {
        if (depth_ == 0) fail(std::string("unmatched '") + c + "'");
        --depth_;
      }
    }
    push(TokenType::op, pos_, pos_ + len);
    pos_ += len;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_begin_ = 0;
  int depth_ = 0;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<std::size_t> indents_{0};
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
  return Tokenizer(source).run();
}

}  // namespace semdiff::python
