#include "semdiff/surface_sim.hpp"

#include <algorithm>
#include <unordered_map>

#include "semdiff/errors.hpp"

namespace semdiff {

int LabeledTree::add(std::string label) {
  labels.push_back(std::move(label));
  children.emplace_back();
  return static_cast<int>(labels.size() - 1);
}

LabeledTree kind_tree(const python::SyntaxTree& tree) {
  LabeledTree out;
  if (tree.size() == 0) return out;
  // Preorder copy keeps child order; ids are remapped.
  std::vector<std::pair<int, int>> stack{{tree.root(), -1}};
  while (!stack.empty()) {
    auto [src, parent] = stack.back();
    stack.pop_back();
    const int id = out.add(tree.node(src).kind);
    if (parent >= 0) out.attach(parent, id);
    const auto& ch = tree.node(src).children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.emplace_back(*it, id);
  }
  return out;
}

namespace {

// Postorder view of a tree used by the Zhang-Shasha recurrences. Arrays are
// 1-based; index 0 is the empty forest.
struct PostorderTree {
  std::vector<int> label;     // interned label per postorder index
  std::vector<int> leftmost;  // leftmost leaf descendant (postorder index)
  std::vector<int> keyroots;  // ascending

  PostorderTree(const LabeledTree& t, std::unordered_map<std::string, int>& intern) {
    const std::size_t n = t.size();
    label.assign(n + 1, 0);
    leftmost.assign(n + 1, 0);
    if (n == 0) return;
    std::vector<int> post_of(n, 0);
    int counter = 0;
    // Iterative postorder: (node, next child index).
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& ch = t.children[static_cast<std::size_t>(node)];
      if (next < ch.size()) {
        const int child = ch[next++];
        stack.emplace_back(child, 0);
        continue;
      }
      const int idx = ++counter;
      post_of[static_cast<std::size_t>(node)] = idx;
      auto [it, inserted] = intern.try_emplace(t.labels[static_cast<std::size_t>(node)],
                                               static_cast<int>(intern.size()));
      label[static_cast<std::size_t>(idx)] = it->second;
      leftmost[static_cast<std::size_t>(idx)] =
          ch.empty() ? idx : leftmost[static_cast<std::size_t>(post_of[static_cast<std::size_t>(ch.front())])];
      stack.pop_back();
    }
    // A keyroot is the highest node for each distinct leftmost leaf.
    std::vector<int> highest(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) highest[static_cast<std::size_t>(leftmost[i])] = static_cast<int>(i);
    for (std::size_t i = 1; i <= n; ++i) {
      if (highest[static_cast<std::size_t>(leftmost[i])] == static_cast<int>(i)) {
        keyroots.push_back(static_cast<int>(i));
      }
    }
  }
};

}  // namespace

std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b) {
  if (a.size() == 0) return b.size();
  if (b.size() == 0) return a.size();
  std::unordered_map<std::string, int> intern;
  const PostorderTree ta(a, intern);
  const PostorderTree tb(b, intern);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t stride = m + 1;
  std::vector<int> treedist((n + 1) * stride, 0);
  std::vector<int> forest((n + 1) * stride, 0);
  auto fd = [&](std::size_t i, std::size_t j) -> int& { return forest[i * stride + j]; };
  auto td = [&](std::size_t i, std::size_t j) -> int& { return treedist[i * stride + j]; };

  for (int ki : ta.keyroots) {
    for (int kj : tb.keyroots) {
      const auto i = static_cast<std::size_t>(ki);
      const auto j = static_cast<std::size_t>(kj);
      const auto li = static_cast<std::size_t>(ta.leftmost[i]);
      const auto lj = static_cast<std::size_t>(tb.leftmost[j]);
      fd(li - 1, lj - 1) = 0;
      for (std::size_t x = li; x <= i; ++x) fd(x, lj - 1) = fd(x - 1, lj - 1) + 1;
      for (std::size_t y = lj; y <= j; ++y) fd(li - 1, y) = fd(li - 1, y - 1) + 1;
      for (std::size_t x = li; x <= i; ++x) {
        for (std::size_t y = lj; y <= j; ++y) {
          const int del = fd(x - 1, y) + 1;
          const int ins = fd(x, y - 1) + 1;
          const auto lx = static_cast<std::size_t>(ta.leftmost[x]);
          const auto ly = static_cast<std::size_t>(tb.leftmost[y]);
          if (lx == li && ly == lj) {
            const int rel = fd(x - 1, y - 1) + (ta.label[x] == tb.label[y] ? 0 : 1);
            fd(x, y) = std::min({del, ins, rel});
            td(x, y) = fd(x, y);
          } else {
            fd(x, y) = std::min({del, ins, fd(lx - 1, ly - 1) + td(x, y)});
          }
        }
      }
    }
  }
  return static_cast<std::size_t>(td(n, m));
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string normalize_newlines(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      out.push_back(0xDC00 + c);
      ++i;
      continue;
    }
    bool valid = i + static_cast<std::size_t>(extra) < text.size();
    for (int k = 1; valid && k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    if (!valid) {
      out.push_back(0xDC00 + c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

double edit_similarity(std::string_view c1, std::string_view c2) {
  const std::u32string a = decode_utf8(normalize_newlines(c1));
  const std::u32string b = decode_utf8(normalize_newlines(c2));
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

namespace {

LabeledTree parse_side(std::string_view code, int side, const SurfaceOptions& opts) {
  python::SyntaxTree tree;
  try {
    tree = python::parse(code);
  } catch (const ParseError& e) {
    throw SideParseError(side, e);
  }
  if (tree.size() > opts.max_tree_nodes) {
    throw TreeTooLarge("side " + std::to_string(side) + " has " + std::to_string(tree.size()) +
                       " nodes, limit is " + std::to_string(opts.max_tree_nodes));
  }
  return kind_tree(tree);
}

}  // namespace

double ast_similarity(std::string_view c1, std::string_view c2, const SurfaceOptions& opts) {
  const LabeledTree t1 = parse_side(c1, 1, opts);
  const LabeledTree t2 = parse_side(c2, 2, opts);
  const double ted = static_cast<double>(tree_edit_distance(t1, t2));
  return 1.0 - ted / static_cast<double>(t1.size() + t2.size());
}

SurfaceBreakdown surface_breakdown(std::string_view c1, std::string_view c2,
                                   const SurfaceOptions& opts) {
  SurfaceBreakdown out;
  out.ast = ast_similarity(c1, c2, opts);
  out.edit = edit_similarity(c1, c2);
  out.surface = opts.edit_weight * out.edit + opts.ast_weight * out.ast;
  return out;
}

double surface_sim(std::string_view c1, std::string_view c2, const SurfaceOptions& opts) {
  return surface_breakdown(c1, c2, opts).surface;
}

namespace {

SurfaceResult guarded(const CodePair& p, const SurfaceOptions& opts) {
  SurfaceResult r;
  try {
    r.scores = surface_breakdown(p.first, p.second, opts);
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace

std::vector<SurfaceResult> surface_batch(std::span<const CodePair> pairs,
                                         const SurfaceOptions& opts) {
  std::vector<SurfaceResult> out(pairs.size());
  const auto n = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = guarded(pairs[static_cast<std::size_t>(i)], opts);
  }
  return out;
}

std::vector<SurfaceResult> surface_batch_serial(std::span<const CodePair> pairs,
                                                const SurfaceOptions& opts) {
  std::vector<SurfaceResult> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(guarded(p, opts));
  return out;
}

}  // namespace semdiff
