#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ssparse/errors.hpp"

namespace ssparse {

enum class SymbolKind { Nonterminal, Terminal };

struct Symbol {
  std::string name;
  SymbolKind kind = SymbolKind::Nonterminal;

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// A CNF production: either `lhs -> rhs[0] rhs[1]` over nonterminals or
/// `lhs -> 'rhs[0]'` with a single terminal. Probability is in (0, 1].
struct Rule {
  std::string lhs;
  std::vector<std::string> rhs;
  bool lexical = false;
  double probability = 0.0;

  bool binary() const { return !lexical; }

  /// Grammar-file form, e.g. "VP -> V NP 0.7" or "NP -> 'fish' 0.18".
  std::string text() const;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct NormalizationViolation {
  std::string nonterminal;
  double sum = 0.0;
};

/// Per-nonterminal probability sums must equal 1 within this tolerance.
inline constexpr double kNormalizationTolerance = 1e-9;

/// An immutable CNF PCFG. Rule order is file order and is part of the
/// contract: rules_for() and all tie-breaking follow it. Symbol sets are
/// inferred from the rules; a name is never both terminal and nonterminal.
class Pcfg {
 public:
  Pcfg() = default;

  /// Builds a grammar from an explicit rule list. `start` defaults to the
  /// first rule's LHS. Throws GrammarError on malformed rules, duplicate
  /// (lhs, rhs) pairs, probability outside (0, 1], or a symbol used both
  /// as terminal and nonterminal.
  static Pcfg from_rules(std::vector<Rule> rules, std::string start = {});

  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<std::string>& nonterminals() const { return nonterminals_; }
  const std::vector<std::string>& terminals() const { return terminals_; }
  const std::string& start() const { return start_; }

  bool is_nonterminal(std::string_view name) const;
  bool is_terminal(std::string_view name) const;

  /// All declared symbols with their kinds.
  std::vector<Symbol> symbols() const;

  /// All rules with the given left-hand side, in grammar order.
  /// Throws GrammarError if `lhs` is not a nonterminal of this grammar.
  std::vector<Rule> rules_for(const std::string& lhs) const;

 private:
  std::vector<Rule> rules_;
  std::vector<std::string> nonterminals_;  // first-appearance order
  std::vector<std::string> terminals_;
  std::string start_;
};

/// Parses the line-based grammar format:
///
///   LHS -> RHS1 RHS2 PROB     binary rule
///   LHS -> 'terminal' PROB    lexical rule
///   %start SYM                optional start-symbol override
///
/// `#` starts a comment, blank lines are ignored, and the first rule's LHS
/// is the start symbol unless %start appears. Errors report line numbers.
Pcfg load_grammar(std::string_view text);

/// Inverse of load_grammar on rule lists (probabilities round-trip exactly).
std::string serialize_grammar(const Pcfg& g);

/// One violation per nonterminal whose rule probabilities do not sum to 1
/// within kNormalizationTolerance. Nonterminals with no rules are skipped.
std::vector<NormalizationViolation> validate_normalization(const Pcfg& g);

}  // namespace ssparse
