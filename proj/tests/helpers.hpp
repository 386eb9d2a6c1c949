#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssparse/chart_parser.hpp"
#include "ssparse/grammar.hpp"
#include "ssparse/mebn.hpp"

namespace testutil {

inline const char* kPpGrammarText = R"(# PP-attachment demonstration grammar
S  -> NP VP 1.0
NP -> NP PP 0.5
PP -> P NP 1.0
VP -> V NP 0.7
VP -> VP PP 0.3
NP -> 'fish' 0.18
NP -> 'eggs' 0.1
NP -> 'fork' 0.04
NP -> 'Alex' 0.18
V  -> 'eats' 1.0
P  -> 'with' 1.0
)";

inline ssparse::Pcfg pp_grammar() {
  return ssparse::load_grammar(kPpGrammarText);
}

inline std::vector<std::string> toks(const std::string& sentence) {
  std::vector<std::string> out;
  std::istringstream in(sentence);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

/// Random normalized CNF grammar. With `pow2` set, every probability is an
/// exact power of two, which keeps both linear products and base-2 log sums
/// exact in floating point.
inline ssparse::Pcfg random_grammar(std::mt19937& rng, bool pow2 = false) {
  auto pick = [&](int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng);
  };
  int n_nt = 2 + pick(3);
  int n_t = 2 + pick(3);
  std::vector<std::string> nts, ts;
  for (int i = 0; i < n_nt; ++i) nts.emplace_back(1, static_cast<char>('A' + i));
  for (int i = 0; i < n_t; ++i) ts.emplace_back(1, static_cast<char>('a' + i));

  std::vector<ssparse::Rule> rules;
  for (const std::string& lhs : nts) {
    std::set<std::pair<bool, std::vector<std::string>>> seen;
    std::vector<std::pair<bool, std::vector<std::string>>> shapes;
    int n_lex = 1 + pick(2);  // every nonterminal can reach a terminal
    int n_bin = pick(3);
    for (int k = 0; k < n_lex; ++k) {
      std::vector<std::string> rhs{ts[static_cast<size_t>(pick(n_t))]};
      if (seen.insert({true, rhs}).second) shapes.emplace_back(true, rhs);
    }
    for (int k = 0; k < n_bin; ++k) {
      std::vector<std::string> rhs{nts[static_cast<size_t>(pick(n_nt))],
                                   nts[static_cast<size_t>(pick(n_nt))]};
      if (seen.insert({false, rhs}).second) shapes.emplace_back(false, rhs);
    }

    std::vector<double> probs(shapes.size());
    if (pow2) {
      std::vector<double> parts{1.0};
      while (parts.size() < shapes.size()) {
        auto it = std::max_element(parts.begin(), parts.end());
        *it /= 2;
        parts.push_back(*it);
      }
      std::shuffle(parts.begin(), parts.end(), rng);
      probs = parts;
    } else {
      double sum = 0.0;
      for (double& p : probs) {
        p = 0.05 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        sum += p;
      }
      for (double& p : probs) p /= sum;
    }

    for (size_t i = 0; i < shapes.size(); ++i) {
      ssparse::Rule r;
      r.lhs = lhs;
      r.lexical = shapes[i].first;
      r.rhs = shapes[i].second;
      r.probability = probs[i];
      rules.push_back(std::move(r));
    }
  }
  return ssparse::Pcfg::from_rules(std::move(rules), nts[0]);
}

/// Samples a sentence from the grammar by top-down expansion, forcing
/// lexical rules once the remaining budget is tight. Returns nullopt when
/// the draw overruns max_len.
inline std::optional<std::vector<std::string>> sample_sentence(
    const ssparse::Pcfg& g, std::mt19937& rng, int max_len) {
  std::vector<std::string> out;
  std::vector<std::pair<std::string, int>> work{{g.start(), 0}};
  int budget = max_len;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  while (!work.empty()) {
    auto [nt, depth] = work.back();
    work.pop_back();
    if (budget <= 0) return std::nullopt;

    std::vector<ssparse::Rule> options = g.rules_for(nt);
    bool force_lexical = depth > 6 || budget <= static_cast<int>(work.size()) + 1;
    if (force_lexical) {
      std::vector<ssparse::Rule> lex;
      for (const auto& r : options)
        if (r.lexical) lex.push_back(r);
      if (!lex.empty()) options = lex;
    }

    double total = 0.0;
    for (const auto& r : options) total += r.probability;
    double draw = unit(rng) * total;
    const ssparse::Rule* chosen = &options.back();
    for (const auto& r : options) {
      draw -= r.probability;
      if (draw <= 0) {
        chosen = &r;
        break;
      }
    }

    if (chosen->lexical) {
      out.push_back(chosen->rhs[0]);
      --budget;
    } else {
      work.emplace_back(chosen->rhs[1], depth + 1);
      work.emplace_back(chosen->rhs[0], depth + 1);
    }
  }
  // Expansion is depth-first with the left branch on top, so `out` is the
  // left-to-right yield.
  return out;
}

/// Single-MFrag theory of zero-ary residents with a random DAG and strictly
/// positive CPTs (so every evidence assignment stays consistent). Joint
/// state count is kept at or below joint_cap.
inline ssparse::mebn::MTheory random_theory(std::mt19937& rng, int max_nodes,
                                            long long joint_cap) {
  auto pick = [&](int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  ssparse::mebn::MTheory t;
  t.name = "random";
  ssparse::mebn::MFrag m;
  m.name = "m";

  long long joint = 1;
  int n_nodes = 2 + pick(max_nodes - 1);
  std::vector<int> cards;
  for (int i = 0; i < n_nodes; ++i) {
    int card = 2 + (pick(4) == 0 ? 1 : 0);  // mostly binary, some ternary
    if (joint * card > joint_cap) break;
    joint *= card;
    cards.push_back(card);
  }

  for (size_t i = 0; i < cards.size(); ++i) {
    ssparse::mebn::ResidentVariable r;
    r.tmpl.name = "v" + std::to_string(i);
    r.tmpl.kind = ssparse::mebn::VariableKind::Resident;
    r.tmpl.states.clear();
    for (int s = 0; s < cards[i]; ++s)
      r.tmpl.states.push_back("s" + std::to_string(s));

    std::vector<int> parents;
    for (size_t p = 0; p < i && parents.size() < 3; ++p)
      if (unit(rng) < 0.4) parents.push_back(static_cast<int>(p));
    for (int p : parents) r.parents.push_back("v" + std::to_string(p));

    auto random_dist = [&](int card) {
      std::vector<double> d(static_cast<size_t>(card));
      double sum = 0.0;
      for (double& x : d) {
        x = 0.05 + unit(rng);
        sum += x;
      }
      for (double& x : d) x /= sum;
      return d;
    };

    size_t combos = 1;
    for (int p : parents) combos *= static_cast<size_t>(cards[static_cast<size_t>(p)]);
    std::vector<int> assign(parents.size(), 0);
    for (size_t c = 0; c < combos; ++c) {
      ssparse::mebn::CptRow row;
      for (size_t pi = 0; pi < parents.size(); ++pi)
        row.given.emplace_back("v" + std::to_string(parents[pi]),
                               "s" + std::to_string(assign[pi]));
      row.dist = random_dist(cards[i]);
      r.cpt.rows.push_back(std::move(row));
      for (int pi = static_cast<int>(assign.size()) - 1; pi >= 0; --pi) {
        if (++assign[static_cast<size_t>(pi)] <
            cards[static_cast<size_t>(parents[static_cast<size_t>(pi)])])
          break;
        assign[static_cast<size_t>(pi)] = 0;
      }
    }
    r.cpt.default_row = random_dist(cards[i]);
    m.residents.push_back(std::move(r));
  }

  t.mfrags.push_back(std::move(m));
  return t;
}

/// Knowledge base asserting hasProbability = [q, 1-q] for the instrument
/// reading of "eats fish with fork" under VP -> VP PP; everything else
/// falls back to the neutral default.
inline ssparse::mebn::MTheory instrument_kb(double q) {
  ssparse::mebn::MTheory t;
  t.name = "instrument_kb";
  t.add_entity("eats_fish_with_fork");
  t.add_entity("vp->vp_pp");

  ssparse::mebn::MFrag m;
  m.name = "pp_attachment";
  m.ordinary_vars = {{"d", "Derivation"}, {"r", "Rule"}};
  ssparse::mebn::ResidentVariable hp;
  hp.tmpl.name = "hasProbability";
  hp.tmpl.kind = ssparse::mebn::VariableKind::Resident;
  hp.tmpl.args = {"d", "r"};
  hp.cpt.rows = {{{{"d", "eats_fish_with_fork"}, {"r", "vp->vp_pp"}},
                  {q, 1 - q}}};
  hp.cpt.default_row = {0.5, 0.5};
  m.residents.push_back(std::move(hp));
  t.mfrags.push_back(std::move(m));
  return t;
}

inline ssparse::mebn::Evidence random_evidence(const ssparse::mebn::MTheory& t,
                                               std::mt19937& rng,
                                               double prob_each) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ssparse::mebn::Evidence out;
  for (const auto& r : t.mfrags.front().residents) {
    if (unit(rng) >= prob_each) continue;
    size_t s = std::uniform_int_distribution<size_t>(
        0, r.tmpl.states.size() - 1)(rng);
    out[{r.tmpl.name, {}}] = r.tmpl.states[s];
  }
  return out;
}

}  // namespace testutil
