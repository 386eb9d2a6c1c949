#pragma once

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "ssparse/grammar.hpp"
#include "ssparse/tree.hpp"

namespace ssparse {

/// One candidate derivation of a nonterminal over a chart cell: the rule,
/// the split point (-1 for lexical entries), and the derivation probability.
struct CellEntry {
  Rule rule;
  int split = -1;
  double probability = 0.0;
};

/// CYK chart: (span, nonterminal) -> candidate entries sorted descending by
/// probability, ties broken by grammar rule order, then smaller split.
class Chart {
 public:
  Chart() = default;
  explicit Chart(int n_tokens) : n_tokens_(n_tokens) {}

  int tokens() const { return n_tokens_; }

  /// Null when the cell has no entry for that nonterminal.
  const std::vector<CellEntry>* entries(int begin, int end,
                                        const std::string& nonterminal) const;

  using CellKey = std::tuple<int, int, std::string>;
  const std::map<CellKey, std::vector<CellEntry>>& cells() const {
    return cells_;
  }

  std::map<CellKey, std::vector<CellEntry>>& mutable_cells() { return cells_; }

 private:
  int n_tokens_ = 0;
  std::map<CellKey, std::vector<CellEntry>> cells_;
};

struct ViterbiResult {
  ParseTree tree;
  double probability = 0.0;
  Chart chart;
};

/// Maximum-probability parse rooted at g.start() spanning all tokens.
/// Scores are accumulated in log space; the reported probability is
/// exponentiated at the boundary. Throws TokenError for tokens outside the
/// grammar and NoParseError when the start symbol does not span the input.
ViterbiResult viterbi_parse(const Pcfg& g,
                            const std::vector<std::string>& tokens);

/// Sum of derivation probabilities over all complete parses; 0 when the
/// sentence has no parse. Throws TokenError for unknown tokens.
double inside_probability(const Pcfg& g,
                          const std::vector<std::string>& tokens);

struct EnumeratedParse {
  ParseTree tree;
  double probability = 0.0;
};

inline constexpr int kDefaultEnumerationCap = 10000;
inline constexpr int kEnumerationMaxTokens = 12;

/// Exhaustive test oracle: every distinct complete parse exactly once,
/// sorted descending by probability with the Viterbi tie-break order
/// (earlier rule, then smaller split, applied in preorder). Only defined
/// for sentences of at most kEnumerationMaxTokens tokens; errors when any
/// derivation list exceeds `cap`. Independent of the chart code path.
std::vector<EnumeratedParse> enumerate_parses(
    const Pcfg& g, const std::vector<std::string>& tokens,
    int cap = kDefaultEnumerationCap);

/// Product of rule probabilities over the internal nodes of `t`, with every
/// rule looked up in `g`. Throws GrammarError when a node's rule is absent.
double tree_probability(const Pcfg& g, const ParseTree& t);

namespace detail {

/// One (rule, split) candidate inside the CYK loop. `score` is the working
/// value (base-2 log, or linear in linear-space runs); `probability` is
/// always linear.
struct Candidate {
  int rule_index = -1;
  int split = -1;
  double score = 0.0;
  double probability = 0.0;
};

/// Called for every cell where one nonterminal has two or more candidate
/// derivations; returns the index of the winning candidate. Candidates
/// arrive sorted descending by score with the standard tie-break.
using Resolver = std::function<int(int begin, int end, const std::string& lhs,
                                   const std::vector<Candidate>&)>;

struct CykResult {
  bool parsed = false;
  ParseTree tree;
  double probability = 0.0;
  Chart chart;
};

/// Shared CYK engine behind viterbi_parse and the semantic parser.
/// `log_space` selects the scoring arithmetic (results must agree on the
/// selected trees); `resolver` may be null for plain max-product.
CykResult cyk_run(const Pcfg& g, const std::vector<std::string>& tokens,
                  bool log_space, const Resolver* resolver);

}  // namespace detail

}  // namespace ssparse
