#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semdiff::python {

enum class TokenType : std::uint8_t {
  name,
  number,
  string,
  op,
  newline,
  indent,
  dedent,
  end_marker,
};

struct Token {
  TokenType type;
  std::string_view text;  // view into the tokenized source
  std::size_t begin;      // byte offsets
  std::size_t end;
  std::size_t line;       // 1-based
  std::size_t column;     // 1-based, in bytes
};

/// Splits Python source into tokens, synthesizing NEWLINE/INDENT/DEDENT the
/// way the reference tokenizer does. Comments and blank lines produce no
/// tokens. Throws ParseError on unterminated strings or bad dedents.
std::vector<Token> tokenize(std::string_view source);

/// Ordered syntax tree stored as a flat arena. Node 0 is the root (Module).
/// `kind` carries only the syntactic category (ast-style names such as
/// "FunctionDef", "Compare", "NotEq"); identifier and literal text is kept
/// separately in `text` and never participates in structural comparison.
struct SyntaxNode {
  std::string kind;
  std::string_view text;  // identifier/literal/operator spelling, may be empty
  std::size_t begin = 0;  // byte span; includes enclosing parentheses
  std::size_t end = 0;
  int parent = -1;
  int block = -1;  // statements only: id of the enclosing statement block
  std::vector<int> children;
};

class SyntaxTree {
 public:
  SyntaxTree() = default;

  const SyntaxNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  SyntaxNode& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  int root() const { return 0; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<SyntaxNode>& nodes() const { return nodes_; }

  int add(std::string kind, std::size_t begin, std::size_t end,
          std::string_view text = {});
  void attach(int parent, int child);

  /// Node ids in preorder (document order).
  std::vector<int> preorder() const;

  /// S-expression of kinds, e.g. "(Module (Expr (Name)))". Handy in tests.
  std::string dump() const;

 private:
  std::vector<SyntaxNode> nodes_;
};

/// Parses a module. The returned tree holds string_views into `source`, so
/// the source must outlive it. Throws ParseError.
SyntaxTree parse(std::string_view source);

/// True when `source` parses; never throws.
bool parses(std::string_view source) noexcept;

}  // namespace semdiff::python
