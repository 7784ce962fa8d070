#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semdiff/python_syntax.hpp"

namespace semdiff {

/// Ordered tree with string labels, node 0 is the root.
struct LabeledTree {
  std::vector<std::string> labels;
  std::vector<std::vector<int>> children;

  std::size_t size() const { return labels.size(); }
  int add(std::string label);
  void attach(int parent, int child) { children[static_cast<std::size_t>(parent)].push_back(child); }
};

/// Kind-labelled copy of a syntax tree (identifier and literal text dropped).
LabeledTree kind_tree(const python::SyntaxTree& tree);

/// Ordered tree edit distance (Zhang-Shasha), unit insert/delete/relabel.
std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b);

/// Unit-cost Levenshtein distance over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// "\r\n" and lone "\r" become "\n".
std::string normalize_newlines(std::string_view text);

/// UTF-8 to code points; invalid bytes map to U+DC80..U+DCFF so distinct
/// inputs stay distinct.
std::u32string decode_utf8(std::string_view text);

struct SurfaceOptions {
  double edit_weight = 0.5;
  double ast_weight = 0.5;
  std::size_t max_tree_nodes = 5000;
};

struct SurfaceBreakdown {
  double edit = 0.0;
  double ast = 0.0;
  double surface = 0.0;

  bool operator==(const SurfaceBreakdown&) const = default;
};

/// 1 - ED / max(|c1|, |c2|) on newline-normalized text; 1 when both empty.
double edit_similarity(std::string_view c1, std::string_view c2);

/// 1 - TED / (|T1| + |T2|). Throws SideParseError naming the failing side,
/// TreeTooLarge beyond `opts.max_tree_nodes`.
double ast_similarity(std::string_view c1, std::string_view c2,
                      const SurfaceOptions& opts = {});

/// Weighted mean of edit and AST similarity (equal weights by default).
double surface_sim(std::string_view c1, std::string_view c2,
                   const SurfaceOptions& opts = {});

SurfaceBreakdown surface_breakdown(std::string_view c1, std::string_view c2,
                                   const SurfaceOptions& opts = {});

using CodePair = std::pair<std::string_view, std::string_view>;

/// Outcome of one pair in a batch; `error` is set instead of throwing.
struct SurfaceResult {
  SurfaceBreakdown scores;
  std::string error;
  bool ok() const { return error.empty(); }
};

/// Data-parallel batch (OpenMP over pairs).
std::vector<SurfaceResult> surface_batch(std::span<const CodePair> pairs,
                                         const SurfaceOptions& opts = {});

/// Serial reference for `surface_batch`; identical results by construction.
std::vector<SurfaceResult> surface_batch_serial(std::span<const CodePair> pairs,
                                                const SurfaceOptions& opts = {});

}  // namespace semdiff
