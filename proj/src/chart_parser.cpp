#include "ssparse/chart_parser.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ssparse/errors.hpp"

namespace ssparse {

namespace {

struct IndexedRule {
  int index = -1;  // position in grammar order
  int lhs = -1;
  int left = -1;   // binary: nonterminal ids
  int right = -1;
  int terminal = -1;  // lexical: terminal id
  double prob = 0.0;
  double logp = 0.0;
};

struct GrammarIndex {
  const Pcfg* g = nullptr;
  std::map<std::string, int> nt_id;
  std::map<std::string, int> term_id;
  std::vector<IndexedRule> rules;
  std::vector<std::vector<int>> lexical_by_terminal;  // grammar order
  std::vector<int> binary_rules;                      // grammar order

  explicit GrammarIndex(const Pcfg& grammar) : g(&grammar) {
    for (const auto& n : grammar.nonterminals())
      nt_id.emplace(n, static_cast<int>(nt_id.size()));
    for (const auto& t : grammar.terminals())
      term_id.emplace(t, static_cast<int>(term_id.size()));
    lexical_by_terminal.resize(term_id.size());
    for (size_t i = 0; i < grammar.rules().size(); ++i) {
      const Rule& r = grammar.rules()[i];
      IndexedRule ir;
      ir.index = static_cast<int>(i);
      ir.lhs = nt_id.at(r.lhs);
      ir.prob = r.probability;
      ir.logp = std::log2(r.probability);
      if (r.lexical) {
        ir.terminal = term_id.at(r.rhs[0]);
        lexical_by_terminal[ir.terminal].push_back(ir.index);
      } else {
        ir.left = nt_id.at(r.rhs[0]);
        ir.right = nt_id.at(r.rhs[1]);
        binary_rules.push_back(ir.index);
      }
      rules.push_back(ir);
    }
  }

  std::vector<int> token_ids(const std::vector<std::string>& tokens) const {
    std::vector<int> out;
    for (size_t i = 0; i < tokens.size(); ++i) {
      auto it = term_id.find(tokens[i]);
      if (it == term_id.end())
        throw TokenError(tokens[i], static_cast<int>(i));
      out.push_back(it->second);
    }
    return out;
  }
};

bool candidate_before(const detail::Candidate& a, const detail::Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.rule_index != b.rule_index) return a.rule_index < b.rule_index;
  return a.split < b.split;
}

struct CellList {
  std::vector<detail::Candidate> candidates;
  int winner = 0;
};

using CellTable = std::map<std::tuple<int, int, int>, CellList>;

ParseTree backtrace(const Pcfg& g, const GrammarIndex& ix,
                    const std::vector<std::string>& tokens,
                    const CellTable& table, int begin, int end, int nt) {
  const CellList& cell = table.at({begin, end, nt});
  const detail::Candidate& c = cell.candidates[cell.winner];
  const Rule& r = g.rules()[c.rule_index];

  ParseTree node;
  node.label = r.lhs;
  node.rule = r;
  node.begin = begin;
  node.end = end;
  if (r.lexical) {
    ParseTree leaf;
    leaf.label = tokens[begin];
    leaf.begin = begin;
    leaf.end = end;
    node.children.push_back(std::move(leaf));
  } else {
    node.children.push_back(
        backtrace(g, ix, tokens, table, begin, c.split, ix.rules[c.rule_index].left));
    node.children.push_back(
        backtrace(g, ix, tokens, table, c.split, end, ix.rules[c.rule_index].right));
  }
  return node;
}

}  // namespace

const std::vector<CellEntry>* Chart::entries(
    int begin, int end, const std::string& nonterminal) const {
  auto it = cells_.find({begin, end, nonterminal});
  return it == cells_.end() ? nullptr : &it->second;
}

namespace detail {

CykResult cyk_run(const Pcfg& g, const std::vector<std::string>& tokens,
                  bool log_space, const Resolver* resolver) {
  if (tokens.empty()) throw Error("cannot parse an empty sentence");
  GrammarIndex ix(g);
  std::vector<int> toks = ix.token_ids(tokens);
  const int n = static_cast<int>(tokens.size());

  CellTable table;
  auto settle = [&](int begin, int end, int nt, CellList& cell) {
    std::sort(cell.candidates.begin(), cell.candidates.end(),
              candidate_before);
    cell.winner = 0;
    if (resolver && cell.candidates.size() >= 2)
      cell.winner = (*resolver)(begin, end, g.nonterminals()[nt],
                                cell.candidates);
  };

  for (int i = 0; i < n; ++i) {
    std::vector<int> touched;
    for (int ri : ix.lexical_by_terminal[toks[i]]) {
      const IndexedRule& r = ix.rules[ri];
      Candidate c;
      c.rule_index = ri;
      c.split = -1;
      c.score = log_space ? r.logp : r.prob;
      c.probability = r.prob;
      table[{i, i + 1, r.lhs}].candidates.push_back(c);
      touched.push_back(r.lhs);
    }
    for (int nt : touched) settle(i, i + 1, nt, table[{i, i + 1, nt}]);
  }

  for (int len = 2; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      std::map<int, CellList> by_nt;
      for (int k = i + 1; k < j; ++k) {
        for (int ri : ix.binary_rules) {
          const IndexedRule& r = ix.rules[ri];
          auto li = table.find({i, k, r.left});
          if (li == table.end()) continue;
          auto rj = table.find({k, j, r.right});
          if (rj == table.end()) continue;
          const Candidate& lw = li->second.candidates[li->second.winner];
          const Candidate& rw = rj->second.candidates[rj->second.winner];
          Candidate c;
          c.rule_index = ri;
          c.split = k;
          c.score = log_space ? r.logp + lw.score + rw.score
                              : r.prob * lw.score * rw.score;
          c.probability = log_space ? std::exp2(c.score) : c.score;
          by_nt[r.lhs].candidates.push_back(c);
        }
      }
      for (auto& [nt, cell] : by_nt) {
        settle(i, j, nt, cell);
        table[{i, j, nt}] = std::move(cell);
      }
    }
  }

  CykResult out;
  out.chart = Chart(n);
  for (const auto& [key, cell] : table) {
    auto& entries =
        out.chart.mutable_cells()[{std::get<0>(key), std::get<1>(key),
                                   g.nonterminals()[std::get<2>(key)]}];
    for (const Candidate& c : cell.candidates) {
      CellEntry e;
      e.rule = g.rules()[c.rule_index];
      e.split = c.split;
      e.probability = c.probability;
      entries.push_back(std::move(e));
    }
  }

  auto start_it = ix.nt_id.find(g.start());
  if (start_it == ix.nt_id.end()) return out;
  auto root = table.find({0, n, start_it->second});
  if (root == table.end()) return out;

  out.parsed = true;
  out.tree = backtrace(g, ix, tokens, table, 0, n, start_it->second);
  out.probability =
      root->second.candidates[root->second.winner].probability;
  return out;
}

}  // namespace detail

ViterbiResult viterbi_parse(const Pcfg& g,
                            const std::vector<std::string>& tokens) {
  detail::CykResult r = detail::cyk_run(g, tokens, true, nullptr);
  if (!r.parsed)
    throw NoParseError("no parse: start symbol '" + g.start() +
                       "' does not span the input");
  return {std::move(r.tree), r.probability, std::move(r.chart)};
}

double inside_probability(const Pcfg& g,
                          const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw Error("cannot parse an empty sentence");
  GrammarIndex ix(g);
  std::vector<int> toks = ix.token_ids(tokens);
  const int n = static_cast<int>(tokens.size());

  std::map<std::tuple<int, int, int>, double> inside;
  for (int i = 0; i < n; ++i)
    for (int ri : ix.lexical_by_terminal[toks[i]])
      inside[{i, i + 1, ix.rules[ri].lhs}] += ix.rules[ri].prob;

  for (int len = 2; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      const int j = i + len;
      for (int k = i + 1; k < j; ++k) {
        for (int ri : ix.binary_rules) {
          const IndexedRule& r = ix.rules[ri];
          auto li = inside.find({i, k, r.left});
          if (li == inside.end()) continue;
          auto rj = inside.find({k, j, r.right});
          if (rj == inside.end()) continue;
          inside[{i, j, r.lhs}] += r.prob * li->second * rj->second;
        }
      }
    }
  }

  auto start_it = ix.nt_id.find(g.start());
  if (start_it == ix.nt_id.end()) return 0.0;
  auto it = inside.find({0, n, start_it->second});
  return it == inside.end() ? 0.0 : it->second;
}

namespace {

// Enumeration oracle. Scores are accumulated with the same floating-point
// grouping the chart uses (rule + left + right) so that the argmax and its
// tie-break are comparable value-for-value with viterbi_parse.
struct Derivation {
  ParseTree tree;
  double logp = 0.0;
  std::vector<int> key;  // preorder (rule_index, split) pairs
};

struct Enumerator {
  const Pcfg& g;
  const GrammarIndex& ix;
  const std::vector<std::string>& tokens;
  const std::vector<int>& toks;
  int cap;
  std::map<std::tuple<int, int, int>, std::vector<Derivation>> memo;

  const std::vector<Derivation>& derivs(int i, int j, int nt) {
    auto key = std::make_tuple(i, j, nt);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;

    std::vector<Derivation> out;
    if (j - i == 1) {
      for (int ri : ix.lexical_by_terminal[toks[i]]) {
        const IndexedRule& r = ix.rules[ri];
        if (r.lhs != nt) continue;
        Derivation d;
        d.logp = r.logp;
        d.key = {ri, -1};
        d.tree.label = g.rules()[ri].lhs;
        d.tree.rule = g.rules()[ri];
        d.tree.begin = i;
        d.tree.end = j;
        d.tree.children.push_back({tokens[i], std::nullopt, {}, i, j});
        out.push_back(std::move(d));
      }
    }
    for (int k = i + 1; k < j; ++k) {
      for (int ri : ix.binary_rules) {
        const IndexedRule& r = ix.rules[ri];
        if (r.lhs != nt) continue;
        const auto& ls = derivs(i, k, r.left);
        if (ls.empty()) continue;
        const auto& rs = derivs(k, j, r.right);
        for (const Derivation& dl : ls) {
          for (const Derivation& dr : rs) {
            Derivation d;
            d.logp = r.logp + dl.logp + dr.logp;
            d.key.reserve(2 + dl.key.size() + dr.key.size());
            d.key = {ri, k};
            d.key.insert(d.key.end(), dl.key.begin(), dl.key.end());
            d.key.insert(d.key.end(), dr.key.begin(), dr.key.end());
            d.tree.label = g.rules()[ri].lhs;
            d.tree.rule = g.rules()[ri];
            d.tree.begin = i;
            d.tree.end = j;
            d.tree.children.push_back(dl.tree);
            d.tree.children.push_back(dr.tree);
            out.push_back(std::move(d));
            if (static_cast<int>(out.size()) > cap)
              throw Error("enumeration cap of " + std::to_string(cap) +
                          " derivations exceeded");
          }
        }
      }
    }
    return memo.emplace(key, std::move(out)).first->second;
  }
};

}  // namespace

std::vector<EnumeratedParse> enumerate_parses(
    const Pcfg& g, const std::vector<std::string>& tokens, int cap) {
  if (tokens.empty()) throw Error("cannot parse an empty sentence");
  if (static_cast<int>(tokens.size()) > kEnumerationMaxTokens)
    throw Error("enumerate_parses handles at most " +
                std::to_string(kEnumerationMaxTokens) + " tokens");
  if (cap < 1) throw Error("enumeration cap must be at least 1");

  GrammarIndex ix(g);
  std::vector<int> toks = ix.token_ids(tokens);
  Enumerator en{g, ix, tokens, toks, cap, {}};

  auto start_it = ix.nt_id.find(g.start());
  if (start_it == ix.nt_id.end()) return {};
  std::vector<Derivation> roots =
      en.derivs(0, static_cast<int>(tokens.size()), start_it->second);

  std::sort(roots.begin(), roots.end(),
            [](const Derivation& a, const Derivation& b) {
              if (a.logp != b.logp) return a.logp > b.logp;
              return a.key < b.key;
            });
  std::vector<EnumeratedParse> out;
  out.reserve(roots.size());
  for (Derivation& d : roots)
    out.push_back({std::move(d.tree), std::exp2(d.logp)});
  return out;
}

double tree_probability(const Pcfg& g, const ParseTree& t) {
  if (t.leaf()) return 1.0;
  if (!t.rule) throw GrammarError("internal node '" + t.label + "' has no rule");
  const Rule* found = nullptr;
  for (const Rule& r : g.rules()) {
    if (r.lhs == t.rule->lhs && r.rhs == t.rule->rhs &&
        r.lexical == t.rule->lexical) {
      found = &r;
      break;
    }
  }
  if (!found)
    throw GrammarError("rule '" + t.rule->text() + "' not in grammar");
  double p = found->probability;
  for (const auto& c : t.children) p *= tree_probability(g, c);
  return p;
}

}  // namespace ssparse
