#include "ssparse/chart_parser.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "ssparse/tree.hpp"

using namespace ssparse;
using testutil::toks;

namespace {

const char* kNpAttach =
    "(S (NP Alex) (VP (V eats) (NP (NP fish) (PP (P with) (NP fork)))))";
const char* kVpAttach =
    "(S (NP Alex) (VP (VP (V eats) (NP fish)) (PP (P with) (NP fork))))";

std::string bracket(const ParseTree& t) {
  return render_tree(t, TreeFormat::Bracketed);
}

}  // namespace

TEST_CASE("unambiguous sentence") {
  Pcfg g = testutil::pp_grammar();
  auto r = viterbi_parse(g, toks("Alex eats fish"));
  CHECK(bracket(r.tree) == "(S (NP Alex) (VP (V eats) (NP fish)))");
  CHECK(r.probability == doctest::Approx(2.268e-2).epsilon(1e-12));

  auto all = enumerate_parses(g, toks("Alex eats fish"));
  REQUIRE(all.size() == 1);
  CHECK(all[0].tree == r.tree);
  CHECK(inside_probability(g, toks("Alex eats fish")) ==
        doctest::Approx(2.268e-2).epsilon(1e-12));
}

TEST_CASE("the ambiguous PP sentence has two parses and Viterbi picks "
          "NP attachment") {
  Pcfg g = testutil::pp_grammar();
  auto tokens = toks("Alex eats fish with fork");

  auto all = enumerate_parses(g, tokens);
  REQUIRE(all.size() == 2);
  CHECK(bracket(all[0].tree) == kNpAttach);
  CHECK(bracket(all[1].tree) == kVpAttach);
  CHECK(all[0].probability == doctest::Approx(4.536e-4).epsilon(1e-12));
  CHECK(all[1].probability == doctest::Approx(2.7216e-4).epsilon(1e-12));

  auto r = viterbi_parse(g, tokens);
  CHECK(r.tree == all[0].tree);
  CHECK(r.probability == doctest::Approx(4.536e-4).epsilon(1e-12));

  CHECK(inside_probability(g, tokens) ==
        doctest::Approx(7.2576e-4).epsilon(1e-12));
}

TEST_CASE("unknown tokens are reported with their position") {
  Pcfg g = testutil::pp_grammar();
  try {
    (void)viterbi_parse(g, toks("Alex eats telescope"));
    FAIL("expected TokenError");
  } catch (const TokenError& e) {
    CHECK(e.token() == "telescope");
    CHECK(e.position() == 2);
  }
}

TEST_CASE("no-parse cases") {
  Pcfg g = testutil::pp_grammar();
  CHECK(enumerate_parses(g, toks("with with")).empty());
  CHECK(inside_probability(g, toks("with with")) == 0.0);
  CHECK_THROWS_AS((void)viterbi_parse(g, toks("with with")), NoParseError);
}

TEST_CASE("single-rule grammar") {
  Pcfg g = load_grammar("S -> 'a' 1.0");
  CHECK(inside_probability(g, {"a"}) == 1.0);
  auto r = viterbi_parse(g, {"a"});
  CHECK(r.probability == 1.0);
  CHECK(tree_probability(g, r.tree) == 1.0);
}

TEST_CASE("tree_probability recomputes hand products") {
  Pcfg g = testutil::pp_grammar();
  auto all = enumerate_parses(g, toks("Alex eats fish with fork"));
  REQUIRE(all.size() == 2);
  CHECK(tree_probability(g, all[0].tree) ==
        doctest::Approx(4.536e-4).epsilon(1e-12));
  CHECK(tree_probability(g, all[1].tree) ==
        doctest::Approx(2.7216e-4).epsilon(1e-12));

  SUBCASE("a rule outside the grammar is an error") {
    ParseTree t = all[0].tree;
    t.rule->probability = 0.9;
    t.rule->rhs = {"VP", "VP"};
    CHECK_THROWS_AS((void)tree_probability(g, t), GrammarError);
  }
}

TEST_CASE("render formats") {
  Pcfg g = testutil::pp_grammar();
  auto r = viterbi_parse(g, toks("Alex eats fish"));

  CHECK(render_tree(r.tree, TreeFormat::Bracketed) ==
        "(S (NP Alex) (VP (V eats) (NP fish)))");

  std::string ascii = render_tree(r.tree, TreeFormat::Ascii);
  CHECK(ascii.find("S [0,3)") != std::string::npos);
  CHECK(ascii.find("  NP [0,1)") != std::string::npos);

  ParseTree leaf{"fish", std::nullopt, {}, 0, 1};
  CHECK(render_tree(leaf, TreeFormat::Bracketed) == "fish");

  SUBCASE("json round-trip") {
    auto j = tree_to_json(r.tree);
    CHECK(tree_from_json(j) == r.tree);
    auto all = enumerate_parses(g, toks("Alex eats fish with fork"));
    for (const auto& p : all)
      CHECK(tree_from_json(tree_to_json(p.tree)) == p.tree);
  }
}

TEST_CASE("enumeration preconditions and cap") {
  Pcfg g = load_grammar("X -> X X 0.5\nX -> 'x' 0.5");
  CHECK(enumerate_parses(g, std::vector<std::string>(8, "x")).size() == 429);
  CHECK_THROWS_AS(
      (void)enumerate_parses(g, std::vector<std::string>(8, "x"), 100),
      Error);
  CHECK_THROWS_AS(
      (void)enumerate_parses(g, std::vector<std::string>(13, "x")), Error);
  CHECK_THROWS_AS((void)enumerate_parses(g, {"x"}, 0), Error);
}

TEST_CASE("chart cell entries are consistent and sorted") {
  std::mt19937 rng(23);
  for (int round = 0; round < 20; ++round) {
    Pcfg g = round == 0 ? testutil::pp_grammar() : testutil::random_grammar(rng);
    std::vector<std::string> tokens;
    if (round == 0) {
      tokens = toks("Alex eats fish with fork");
    } else {
      auto drawn = testutil::sample_sentence(g, rng, 7);
      if (!drawn) continue;
      tokens = *drawn;
    }
    Chart chart = viterbi_parse(g, tokens).chart;

    for (const auto& [key, entries] : chart.cells()) {
      auto [begin, end, nt] = key;
      for (size_t i = 0; i + 1 < entries.size(); ++i)
        CHECK(entries[i].probability >= entries[i + 1].probability);
      for (const CellEntry& e : entries) {
        if (e.rule.lexical) {
          CHECK(e.probability ==
                doctest::Approx(e.rule.probability).epsilon(1e-12));
          continue;
        }
        const auto* left = chart.entries(begin, e.split, e.rule.rhs[0]);
        const auto* right = chart.entries(e.split, end, e.rule.rhs[1]);
        REQUIRE(left != nullptr);
        REQUIRE(right != nullptr);
        double product = e.rule.probability * left->front().probability *
                         right->front().probability;
        CHECK(e.probability ==
              doctest::Approx(product).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("ties break on grammar rule order, then smaller split") {
  SUBCASE("rule order") {
    Pcfg g = load_grammar(
        "S -> B B 0.5\nS -> A A 0.5\nA -> 'x' 0.5\nB -> 'x' 0.5\n"
        "A -> 'y' 0.5\nB -> 'y' 0.5");
    auto r = viterbi_parse(g, {"x", "x"});
    CHECK(render_tree(r.tree, TreeFormat::Bracketed) == "(S (B x) (B x))");
    auto all = enumerate_parses(g, {"x", "x"});
    REQUIRE(all.size() == 2);
    CHECK(all[0].tree == r.tree);
  }

  SUBCASE("split point") {
    // both bracketings of three tokens carry identical probability
    Pcfg g = load_grammar("X -> X X 0.5\nX -> 'x' 0.5");
    auto r = viterbi_parse(g, {"x", "x", "x"});
    CHECK(render_tree(r.tree, TreeFormat::Bracketed) ==
          "(X (X x) (X (X x) (X x)))");
    auto all = enumerate_parses(g, {"x", "x", "x"});
    REQUIRE(all.size() == 2);
    CHECK(all[0].probability == all[1].probability);
    CHECK(all[0].tree == r.tree);
  }
}

TEST_CASE("viterbi agrees with the enumeration oracle") {
  std::mt19937 rng(101);
  int tested = 0;
  while (tested < 60) {
    Pcfg g = testutil::random_grammar(rng);
    auto drawn = testutil::sample_sentence(g, rng, 8);
    if (!drawn || drawn->empty()) continue;

    std::vector<EnumeratedParse> all;
    try {
      all = enumerate_parses(g, *drawn);
    } catch (const Error&) {
      continue;  // pathological ambiguity blew the cap; resample
    }
    if (all.empty()) continue;
    ++tested;

    auto vit = viterbi_parse(g, *drawn);
    CHECK(vit.tree == all[0].tree);
    CHECK(vit.probability == all[0].probability);

    double sum = 0.0;
    for (const auto& p : all) sum += p.probability;
    double inside = inside_probability(g, *drawn);
    CHECK(inside == doctest::Approx(sum).epsilon(1e-12));
    CHECK(vit.probability <= inside * (1 + 1e-12));
    CHECK(inside <= 1.0 + 1e-12);
    CHECK(vit.probability > 0.0);
  }
}

TEST_CASE("log-space and linear-space runs select identical trees") {
  // Power-of-two probabilities keep both arithmetics exact, so agreement
  // is bit-for-bit rather than approximate.
  std::mt19937 rng(303);
  int tested = 0;
  while (tested < 40) {
    Pcfg g = testutil::random_grammar(rng, /*pow2=*/true);
    auto drawn = testutil::sample_sentence(g, rng, 8);
    if (!drawn || drawn->empty()) continue;
    ++tested;

    auto log_run = detail::cyk_run(g, *drawn, true, nullptr);
    auto lin_run = detail::cyk_run(g, *drawn, false, nullptr);
    CHECK(log_run.parsed == lin_run.parsed);
    if (log_run.parsed) {
      CHECK(log_run.tree == lin_run.tree);
      CHECK(log_run.probability == lin_run.probability);
    }
  }

  Pcfg g = testutil::pp_grammar();
  auto tokens = toks("Alex eats fish with fork");
  CHECK(detail::cyk_run(g, tokens, true, nullptr).tree ==
        detail::cyk_run(g, tokens, false, nullptr).tree);
}
