#include "ssparse/grammar.hpp"

#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace ssparse;

TEST_CASE("minimal grammar loads with inferred symbol sets") {
  Pcfg g = load_grammar(
      "S -> NP VP 1.0\nNP -> 'alex' 1.0\nVP -> V NP 1.0\nV -> 'eats' 1.0");
  CHECK(g.rules().size() == 4);
  CHECK(g.start() == "S");
  CHECK(g.nonterminals() == std::vector<std::string>{"S", "NP", "VP", "V"});
  CHECK(g.terminals() == std::vector<std::string>{"alex", "eats"});
}

TEST_CASE("the worked PP grammar") {
  Pcfg g = testutil::pp_grammar();
  CHECK(g.rules().size() == 11);
  CHECK(g.start() == "S");
  CHECK(g.nonterminals().size() == 6);
  // fish, eggs, fork, Alex, eats, with
  CHECK(g.terminals().size() == 6);
  CHECK(g.is_nonterminal("PP"));
  CHECK(g.is_terminal("fork"));

  SUBCASE("normalization holds") {
    CHECK(validate_normalization(g).empty());
  }

  SUBCASE("rules_for preserves file order") {
    auto vp = g.rules_for("VP");
    REQUIRE(vp.size() == 2);
    CHECK(vp[0].rhs == std::vector<std::string>{"V", "NP"});
    CHECK(vp[0].probability == 0.7);
    CHECK(vp[1].rhs == std::vector<std::string>{"VP", "PP"});
    CHECK(vp[1].probability == 0.3);

    auto s = g.rules_for("S");
    REQUIRE(s.size() == 1);
    CHECK(s[0].rhs == std::vector<std::string>{"NP", "VP"});

    CHECK_THROWS_AS((void)g.rules_for("X"), GrammarError);
  }
}

TEST_CASE("load_grammar rejects malformed input") {
  CHECK_THROWS_AS((void)load_grammar("S -> NP VP PP 1.0"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> NP 1.0"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> 'a' NP 1.0"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> 'a' 0.0"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> 'a' 1.5"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> 'a' -0.2"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> 'a' zero"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> 'a' 0.5\nS -> 'a' 0.5"),
                  GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S -> A B 1.0\nC -> 'A' 1.0"),
                  GrammarError);
  CHECK_THROWS_AS((void)load_grammar("%start X\nS -> 'a' 1.0"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("S ->"), GrammarError);
  CHECK_THROWS_AS((void)load_grammar("'s' -> 'a' 1.0"), GrammarError);

  SUBCASE("errors carry line numbers") {
    try {
      (void)load_grammar("S -> A B 1.0\nA -> B C D 1.0");
      FAIL("expected GrammarError");
    } catch (const GrammarError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
}

TEST_CASE("comments, blank lines and %start") {
  Pcfg g = load_grammar(
      "# comment\n\n%start T\nS -> 'a' 1.0  # trailing\nT -> 'b' 1.0\n");
  CHECK(g.start() == "T");
  CHECK(g.rules().size() == 2);
}

TEST_CASE("empty grammar") {
  Pcfg g = load_grammar("");
  CHECK(g.rules().empty());
  CHECK(validate_normalization(g).empty());
}

TEST_CASE("validate_normalization reports per-lhs sums") {
  Pcfg g = load_grammar(
      "S -> VP VP 1.0\nVP -> V NP 0.7\nVP -> VP PP 0.2\nPP -> P NP 1.0\n"
      "NP -> 'x' 1.0\nV -> 'v' 1.0\nP -> 'p' 1.0");
  auto violations = validate_normalization(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].nonterminal == "VP");
  CHECK(violations[0].sum == doctest::Approx(0.9));
}

TEST_CASE("a 1e-6 perturbation is one violation") {
  Pcfg base = testutil::pp_grammar();
  std::vector<Rule> rules = base.rules();
  for (Rule& r : rules)
    if (r.lexical && r.rhs[0] == "fork") r.probability += 1e-6;
  Pcfg g = Pcfg::from_rules(std::move(rules));
  auto violations = validate_normalization(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].nonterminal == "NP");
}

TEST_CASE("serialize round-trips rule lists") {
  std::mt19937 rng(7);
  for (int i = 0; i < 25; ++i) {
    Pcfg g = testutil::random_grammar(rng);
    Pcfg back = load_grammar(serialize_grammar(g));
    CHECK(back.rules() == g.rules());
    CHECK(back.start() == g.start());
  }
  Pcfg g = testutil::pp_grammar();
  CHECK(load_grammar(serialize_grammar(g)).rules() == g.rules());
}

TEST_CASE("rule order is stable under rules_for") {
  std::mt19937 rng(11);
  for (int i = 0; i < 10; ++i) {
    Pcfg g = testutil::random_grammar(rng);
    for (const auto& nt : g.nonterminals()) {
      auto mine = g.rules_for(nt);
      // must appear as a subsequence of the full rule list
      size_t pos = 0;
      for (const Rule& r : g.rules())
        if (pos < mine.size() && r == mine[pos]) ++pos;
      CHECK(pos == mine.size());
    }
  }
}
