#include <doctest.h>

#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles/edit_oracle.hpp"
#include "semdiff/errors.hpp"
#include "semdiff/fuzz.hpp"
#include "semdiff/surface_sim.hpp"

using namespace semdiff;
using namespace gen;

namespace {

const std::string kFigA =
    "def is_palindrome(text: str) -> bool:\n"
    "    for i in range(len(text)):\n"
    "        if text[i] != text[len(text) - 1 - i]:\n"
    "            return False\n"
    "    return True\n";
const std::string kFigB =
    "def is_palindrome(text: str) -> bool:\n"
    "    for i in range(len(text)):\n"
    "        if text[i] == text[len(text) - 1 - i]:\n"
    "            return False\n"
    "    return True\n";
const std::string kFigC =
    "def is_palindrome(input_str: str) -> bool:\n"
    "    return input_str == input_str[::-1]\n";

}  // namespace

TEST_CASE("edit similarity examples") {
  CHECK(edit_similarity("kitten", "sitting") == 1.0 - 3.0 / 7.0);
  CHECK(edit_similarity("", "abc") == 0.0);
  CHECK(edit_similarity("", "") == 1.0);
  CHECK(edit_similarity("abc", "abc") == 1.0);
  CHECK(edit_similarity("a\r\nb", "a\nb") == 1.0);
  CHECK(edit_similarity("a\rb", "a\nb") == 1.0);
  // Two code points, not four bytes.
  CHECK(edit_similarity("\xc3\xa9\xc3\xa9", "\xc3\xa9x") == 0.5);
}

TEST_CASE("levenshtein agrees with the full table oracle") {
  fuzz::Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_text(rng, 50, "abcd \n");
    const auto b = random_text(rng, 50, "abcd \n");
    const auto ua = decode_utf8(a), ub = decode_utf8(b);
    const std::size_t ed = oracle::levenshtein_table(ua, ub);
    CAPTURE(a);
    CAPTURE(b);
    CHECK(levenshtein(ua, ub) == ed);
    const double expect =
        a.empty() && b.empty() ? 1.0 : 1.0 - static_cast<double>(ed) / static_cast<double>(std::max(a.size(), b.size()));
    CHECK(edit_similarity(a, b) == expect);
  }
}

TEST_CASE("newline normalization and utf-8 decoding") {
  CHECK(normalize_newlines("a\r\nb\rc\n") == "a\nb\nc\n");
  CHECK(decode_utf8("a\xc3\xa9") == std::u32string{U'a', U'é'});
  const auto bad = decode_utf8("\xff");
  REQUIRE(bad.size() == 1);
  CHECK(bad[0] == 0xDCFF);
}

TEST_CASE("tree edit distance on hand-built trees") {
  // a(b, c, d) vs a(b, e(c, d), f)
  LabeledTree t1;
  t1.add("a");
  for (const char* l : {"b", "c", "d"}) t1.attach(0, t1.add(l));
  LabeledTree t2;
  t2.add("a");
  t2.attach(0, t2.add("b"));
  const int e = t2.add("e");
  t2.attach(0, e);
  t2.attach(e, t2.add("c"));
  t2.attach(e, t2.add("d"));
  t2.attach(0, t2.add("f"));
  CHECK(oracle::tree_edit_distance_exhaustive(t1, t2) == 2);
  CHECK(tree_edit_distance(t1, t2) == 2);
  CHECK(tree_edit_distance(t1, t1) == 0);

  LabeledTree single;
  single.add("x");
  CHECK(tree_edit_distance(single, t1) == 4);
}

TEST_CASE("tree edit distance agrees with the exhaustive mapping oracle") {
  fuzz::Rng rng(7);
  for (int t = 0; t < 400; ++t) {
    const auto a = random_tree(rng, 6);
    const auto b = random_tree(rng, 6);
    CAPTURE(t);
    const std::size_t expect = oracle::tree_edit_distance_exhaustive(a, b);
    CHECK(tree_edit_distance(a, b) == expect);
    CHECK(tree_edit_distance(b, a) == expect);
  }
}

TEST_CASE("ast similarity") {
  CHECK(ast_similarity(kFigA, kFigA) == 1.0);
  const std::string renamed =
      "def check(s: str) -> bool:\n"
      "    for k in range(len(s)):\n"
      "        if s[k] != s[len(s) - 1 - k]:\n"
      "            return False\n"
      "    return True\n";
  CHECK(ast_similarity(kFigA, renamed) == 1.0);
  // Literal values are not part of the structure either.
  CHECK(ast_similarity("x = 1\n", "y = 2\n") == 1.0);
  CHECK(ast_similarity("x = 1\n", "x = 'a'\n") == 1.0);
  CHECK(ast_similarity("x = a + b\n", "x = a - b\n") < 1.0);

  const auto ta = kind_tree(python::parse(kFigA));
  const auto tc = kind_tree(python::parse(kFigC));
  const double expect = 1.0 - static_cast<double>(tree_edit_distance(ta, tc)) /
                                  static_cast<double>(ta.size() + tc.size());
  CHECK(ast_similarity(kFigA, kFigC) == expect);
}

TEST_CASE("ast similarity errors") {
  try {
    ast_similarity("x = 1\n", "x = (\n");
    FAIL("expected SideParseError");
  } catch (const SideParseError& e) {
    CHECK(e.side() == 2);
  }
  try {
    ast_similarity("def :\n", "x = 1\n");
    FAIL("expected SideParseError");
  } catch (const SideParseError& e) {
    CHECK(e.side() == 1);
  }
  SurfaceOptions tiny;
  tiny.max_tree_nodes = 5;
  CHECK_THROWS_AS(ast_similarity(kFigA, kFigA, tiny), TreeTooLarge);
}

TEST_CASE("surface similarity") {
  CHECK(surface_sim(kFigA, kFigA) == 1.0);
  const auto b = surface_breakdown(kFigA, kFigB);
  CHECK(b.surface == 0.5 * b.edit + 0.5 * b.ast);
  CHECK(b.surface == surface_sim(kFigA, kFigB));
  CHECK(b.surface >= 0.90);
  CHECK(surface_sim(kFigA, kFigC) <= 0.70);
  CHECK(surface_sim(kFigA, kFigB) > surface_sim(kFigA, kFigC));

  SurfaceOptions w;
  w.edit_weight = 1.0;
  w.ast_weight = 0.0;
  CHECK(surface_sim(kFigA, kFigC, w) == edit_similarity(kFigA, kFigC));
}

TEST_CASE("identity, symmetry and range on random programs") {
  fuzz::Rng rng(99);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_program(rng);
    const auto b = rng.below(4) == 0 ? a : random_program(rng);
    CAPTURE(a);
    CAPTURE(b);
    REQUIRE(python::parses(a));
    REQUIRE(python::parses(b));
    const auto ab = surface_breakdown(a, b);
    const auto ba = surface_breakdown(b, a);
    CHECK(ab == ba);
    for (double v : {ab.edit, ab.ast, ab.surface}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(surface_sim(a, a) == 1.0);
  }
}

TEST_CASE("edit similarity range on arbitrary bytes") {
  fuzz::Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    std::string a(rng.below(40), '\0'), b(rng.below(40), '\0');
    for (auto& c : a) c = static_cast<char>(rng.byte());
    for (auto& c : b) c = static_cast<char>(rng.byte());
    const double s = edit_similarity(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == edit_similarity(b, a));
    CHECK(edit_similarity(a, a) == 1.0);
  }
}

TEST_CASE("parallel batch equals the serial reference") {
  fuzz::Rng rng(3);
  std::vector<std::string> codes;
  for (int i = 0; i < 60; ++i) codes.push_back(random_program(rng));
  codes.push_back("def broken(:\n");
  std::vector<CodePair> pairs;
  for (std::size_t i = 0; i + 1 < codes.size(); ++i) pairs.emplace_back(codes[i], codes[i + 1]);
  pairs.emplace_back(codes.back(), codes.front());

  const auto par = surface_batch(pairs);
  const auto ser = surface_batch_serial(pairs);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].scores == ser[i].scores);
    CHECK(par[i].error == ser[i].error);
  }
  CHECK(!par[pairs.size() - 2].ok());
  CHECK(!par.back().ok());
  CHECK(par.front().ok());
}
