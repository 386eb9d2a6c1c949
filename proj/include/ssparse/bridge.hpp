#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ssparse/grammar.hpp"
#include "ssparse/mebn.hpp"

namespace ssparse {

/// Records the grammar-to-theory correspondence produced by induce_bridge
/// plus the derivation entities registered during one parse session.
struct BridgeBinding {
  std::map<std::string, std::string> nonterminal_inputs;  // NT -> input name
  std::map<std::string, std::string> derivations;  // derivation -> entity
  std::string has_probability = "hasProbability";

  friend bool operator==(const BridgeBinding&, const BridgeBinding&) = default;
};

/// Bit-exact canonicalization: lowercase ASCII, non-alphanumeric runs
/// collapse to one underscore, trimmed at both ends. May return "".
std::string canonical_entity(std::string_view text);

/// Canonical rule entity, e.g. "vp->vp_pp" or "np->fish".
std::string rule_entity(const Rule& r);

/// Extends `t` with one input variable per grammar nonterminal not already
/// present in any MFrag's input set, and a parentless binary hasProbability
/// resident (default row [0.5, 0.5]) when the theory lacks one. Grammar
/// rules are registered as entities under their canonical text. Idempotent.
/// Throws BridgeError when a nonterminal collides with an existing variable
/// of a different kind.
std::pair<mebn::MTheory, BridgeBinding> induce_bridge(const Pcfg& g,
                                                      const mebn::MTheory& t);

/// Canonicalizes and registers a derivation string as an entity of `t`.
/// Repeated calls with the same derivation return the same identifier;
/// distinct derivations canonicalizing to the same symbol are an error.
std::string register_derivation(BridgeBinding& b, mebn::MTheory& t,
                                std::string_view derivation);

/// Conflation of two Bernoulli distributions given by their success
/// probabilities: p*q / (p*q + (1-p)*(1-q)). Symmetric, associative,
/// monotone, with 0.5 as the exact neutral element. Throws BridgeError for
/// the contradictory pairs (0, 1) and (1, 0).
double conflate(double p, double q);

/// Pointwise product of distributions over a shared state space,
/// renormalized to sum 1. Reduces to conflate() on binary vectors. Throws
/// BridgeError when the product is identically zero.
std::vector<double> conflate_distributions(
    const std::vector<std::vector<double>>& dists);

struct CombinedProbability {
  double syntactic = 0.0;
  double semantic = 0.0;
  double conflated = 0.0;
};

/// Combined rule probability: conflation of the PCFG rule probability with
/// the hasProbability posterior.
CombinedProbability combined_rule_probability(double rule_probability,
                                              double semantic_posterior);

}  // namespace ssparse
