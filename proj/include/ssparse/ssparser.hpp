#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ssparse/bridge.hpp"
#include "ssparse/chart_parser.hpp"
#include "ssparse/grammar.hpp"
#include "ssparse/mebn.hpp"
#include "ssparse/tree.hpp"

namespace ssparse {

/// Literal mode compares the conflated value against the raw competing
/// product; normalized mode rescales the two products to sum 1 first.
enum class ResolutionMode { Literal, Normalized };

struct SparseOptions {
  ResolutionMode mode = ResolutionMode::Literal;
  int depth_limit = mebn::kDefaultDepthLimit;
  /// Query both candidates of a pair and compare conflated values instead
  /// of the single-query rule. Off by default.
  bool symmetric_queries = false;
};

/// One competing derivation at an ambiguous chart cell.
struct AmbiguityCandidate {
  Rule rule;
  int begin = 0;
  int end = 0;
  int split = -1;
  std::string derivation;    // token yield of the span
  double p_pcfg = 0.0;       // sub-derivation product times rule probability
  double log_p_pcfg = 0.0;   // chart score (base-2 log of p_pcfg)
};

/// Record of one ambiguity resolution. With more than two candidates the
/// pairwise rule is applied weakest-first and the queried/conflated fields
/// reflect the final decisive comparison.
struct DecisionRecord {
  int begin = 0;
  int end = 0;
  std::string lhs;
  std::vector<AmbiguityCandidate> candidates;  // sorted descending by p_pcfg
  std::string queried;                         // rule entity queried
  double p_mebn = 0.0;
  double conflated = 0.0;
  std::string winner;                          // rule entity of the winner
  int winner_index = 0;
  std::string inequality;
  ResolutionMode mode = ResolutionMode::Literal;
};

using DecisionTrace = std::vector<DecisionRecord>;

nlohmann::json trace_to_json(const DecisionTrace& trace);

struct SemanticParseResult {
  ParseTree tree;
  double probability = 0.0;
  DecisionTrace trace;
};

/// CYK parse where every cell holding two or more candidate derivations for
/// one nonterminal is settled by resolve_ambiguity instead of plain max.
/// The theory is re-bridged internally (a no-op when the bridge is already
/// induced); derivation registrations stay confined to this call. With an
/// all-neutral knowledge base the returned tree equals viterbi_parse's
/// exactly.
SemanticParseResult parse_with_semantics(const Pcfg& g,
                                         const mebn::MTheory& t,
                                         const std::vector<std::string>& tokens,
                                         const SparseOptions& options = {});

/// Pairwise selection rule: the syntactically weaker candidate R1 is queried
/// as hasProbability(D, R1) and wins iff conflate(P1, posterior) exceeds the
/// stronger candidate's score. Candidates must share span and lhs and be
/// sorted descending by p_pcfg. Returns the winning index and the record.
std::pair<int, DecisionRecord> resolve_ambiguity(
    const std::vector<AmbiguityCandidate>& candidates, mebn::MTheory& t,
    BridgeBinding& b, const SparseOptions& options = {});

/// Posterior P(hasProbability(D, R) = T | findings), registering the
/// derivation entity on demand. Pairs with no knowledge-base row fall back
/// to the default 0.5.
double semantic_query_probability(mebn::MTheory& t, BridgeBinding& b,
                                  const std::string& derivation,
                                  const Rule& rule,
                                  int depth_limit = mebn::kDefaultDepthLimit);

}  // namespace ssparse
