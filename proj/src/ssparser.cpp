#include "ssparse/ssparser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ssparse {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

std::string join_tokens(const std::vector<std::string>& tokens, int begin,
                        int end) {
  std::string out;
  for (int i = begin; i < end; ++i) {
    if (i > begin) out += " ";
    out += tokens[i];
  }
  return out;
}

const char* mode_name(ResolutionMode m) {
  return m == ResolutionMode::Literal ? "literal" : "normalized";
}

}  // namespace

double semantic_query_probability(mebn::MTheory& t, BridgeBinding& b,
                                  const std::string& derivation,
                                  const Rule& rule, int depth_limit) {
  std::string d_entity = register_derivation(b, t, derivation);
  std::string r_entity = rule_entity(rule);
  t.add_entity(r_entity);

  mebn::GroundedVariable query{b.has_probability, {d_entity, r_entity}};
  mebn::Ssbn net = mebn::build_ssbn(t, query, {}, depth_limit);
  std::vector<double> post = mebn::infer(net, query);

  const mebn::SsbnNode* node = net.find(query);
  auto it = std::find(node->states.begin(), node->states.end(), "T");
  if (it == node->states.end())
    throw MebnError("'" + b.has_probability + "' has no state 'T'");
  return post[static_cast<size_t>(it - node->states.begin())];
}

std::pair<int, DecisionRecord> resolve_ambiguity(
    const std::vector<AmbiguityCandidate>& candidates, mebn::MTheory& t,
    BridgeBinding& b, const SparseOptions& options) {
  if (candidates.size() < 2)
    throw Error("resolve_ambiguity needs at least two candidates");
  for (size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].p_pcfg > candidates[i - 1].p_pcfg)
      throw Error("candidates must be sorted descending by p_pcfg");
    if (candidates[i].begin != candidates[0].begin ||
        candidates[i].end != candidates[0].end ||
        candidates[i].rule.lhs != candidates[0].rule.lhs)
      throw Error("candidates must share span and nonterminal");
  }

  DecisionRecord record;
  record.begin = candidates[0].begin;
  record.end = candidates[0].end;
  record.lhs = candidates[0].rule.lhs;
  record.candidates = candidates;
  record.mode = options.mode;

  // Pairwise, weakest first: the syntactically weaker side R1 is queried
  // and overrides the stronger side R2 only when the conflated value beats
  // R2's score. A neutral posterior (0.5) reduces each pair to the plain
  // Viterbi comparison, which the sort order already encodes.
  int champ = static_cast<int>(candidates.size()) - 1;
  for (int i = static_cast<int>(candidates.size()) - 2; i >= 0; --i) {
    const AmbiguityCandidate& weak = candidates[champ];
    const AmbiguityCandidate& strong = candidates[i];

    double q = semantic_query_probability(t, b, weak.derivation, weak.rule,
                                          options.depth_limit);
    double p1 = weak.p_pcfg;
    double p2 = strong.p_pcfg;
    if (options.mode == ResolutionMode::Normalized) {
      double z = p1 + p2;
      p1 /= z;
      p2 /= z;
    }

    bool weak_wins;
    double conflated;
    if (options.symmetric_queries) {
      double q2 = semantic_query_probability(t, b, strong.derivation,
                                             strong.rule, options.depth_limit);
      conflated = conflate(p1, q);
      double conflated2 = conflate(p2, q2);
      weak_wins = (q == 0.5 && q2 == 0.5) ? false : conflated > conflated2;
      record.inequality = "conflate(" + sci(p1) + ", " + sci(q) + ") = " +
                          sci(conflated) +
                          (weak_wins ? " > " : " <= ") + "conflate(" +
                          sci(p2) + ", " + sci(q2) + ") = " + sci(conflated2);
    } else {
      conflated = conflate(p1, q);
      weak_wins = q == 0.5 ? false : conflated > p2;
      record.inequality = "conflate(" + sci(p1) + ", " + sci(q) + ") = " +
                          sci(conflated) + (weak_wins ? " > " : " <= ") +
                          sci(p2);
    }

    record.queried = rule_entity(weak.rule);
    record.p_mebn = q;
    record.conflated = conflated;
    if (!weak_wins) champ = i;
  }

  record.winner_index = champ;
  record.winner = rule_entity(candidates[champ].rule);
  record.inequality += " -> select " + record.winner;
  return {champ, std::move(record)};
}

SemanticParseResult parse_with_semantics(const Pcfg& g,
                                         const mebn::MTheory& t,
                                         const std::vector<std::string>& tokens,
                                         const SparseOptions& options) {
  // Re-inducing the bridge is a no-op on an already bridged theory and
  // keeps session registrations off the caller's copy.
  std::pair<mebn::MTheory, BridgeBinding> session = induce_bridge(g, t);
  mebn::MTheory& theory = session.first;
  BridgeBinding& binding = session.second;

  DecisionTrace trace;
  detail::Resolver resolver = [&](int begin, int end,
                                  const std::string& /*lhs*/,
                                  const std::vector<detail::Candidate>& cands)
      -> int {
    std::vector<AmbiguityCandidate> amb;
    amb.reserve(cands.size());
    for (const detail::Candidate& c : cands) {
      AmbiguityCandidate a;
      a.rule = g.rules()[static_cast<size_t>(c.rule_index)];
      a.begin = begin;
      a.end = end;
      a.split = c.split;
      a.derivation = join_tokens(tokens, begin, end);
      a.p_pcfg = c.probability;
      a.log_p_pcfg = c.score;
      amb.push_back(std::move(a));
    }
    auto [winner, record] = resolve_ambiguity(amb, theory, binding, options);
    trace.push_back(std::move(record));
    return winner;
  };

  detail::CykResult r = detail::cyk_run(g, tokens, true, &resolver);
  if (!r.parsed)
    throw NoParseError("no parse: start symbol '" + g.start() +
                       "' does not span the input");
  return {std::move(r.tree), r.probability, std::move(trace)};
}

nlohmann::json trace_to_json(const DecisionTrace& trace) {
  nlohmann::json out = nlohmann::json::array();
  for (const DecisionRecord& rec : trace) {
    nlohmann::json cands = nlohmann::json::array();
    for (const AmbiguityCandidate& c : rec.candidates)
      cands.push_back({{"rule",
                        {{"lhs", c.rule.lhs},
                         {"rhs", c.rule.rhs},
                         {"prob", c.rule.probability}}},
                       {"p_pcfg", c.p_pcfg}});
    out.push_back({{"span", {rec.begin, rec.end}},
                   {"lhs", rec.lhs},
                   {"candidates", std::move(cands)},
                   {"queried", rec.queried},
                   {"p_mebn", rec.p_mebn},
                   {"conflated", rec.conflated},
                   {"winner", rec.winner},
                   {"mode", mode_name(rec.mode)},
                   {"inequality", rec.inequality}});
  }
  return out;
}

}  // namespace ssparse
