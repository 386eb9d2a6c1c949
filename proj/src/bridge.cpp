#include "ssparse/bridge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace ssparse {

std::string canonical_entity(std::string_view text) {
  std::string out;
  bool pending_sep = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (pending_sep && !out.empty()) out += '_';
      pending_sep = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_sep = true;
    }
  }
  return out;
}

std::string rule_entity(const Rule& r) {
  std::string rhs;
  for (size_t i = 0; i < r.rhs.size(); ++i) {
    if (i) rhs += "_";
    rhs += canonical_entity(r.rhs[i]);
  }
  return canonical_entity(r.lhs) + "->" + rhs;
}

std::pair<mebn::MTheory, BridgeBinding> induce_bridge(const Pcfg& g,
                                                      const mebn::MTheory& t) {
  mebn::MTheory out = t;
  BridgeBinding binding;
  if (out.mfrags.empty()) out.mfrags.push_back({"bridge", {}, {}, {}, {}});

  std::set<std::string> input_names;
  std::set<std::string> other_names;  // context, resident, ordinary variables
  for (const mebn::MFrag& m : out.mfrags) {
    for (const auto& v : m.inputs) input_names.insert(v.name);
    for (const auto& v : m.context) other_names.insert(v.name);
    for (const auto& r : m.residents) other_names.insert(r.tmpl.name);
    for (const auto& o : m.ordinary_vars) other_names.insert(o.name);
  }

  // Every nonterminal gets an equivalent input variable; missing ones are
  // introduced into the first MFrag.
  for (const std::string& nt : g.nonterminals()) {
    if (!input_names.count(nt)) {
      if (other_names.count(nt))
        throw BridgeError("nonterminal '" + nt +
                          "' collides with an existing variable of a "
                          "different kind");
      mebn::VariableTemplate in;
      in.name = nt;
      in.kind = mebn::VariableKind::Input;
      out.mfrags.front().inputs.push_back(std::move(in));
      input_names.insert(nt);
    }
    binding.nonterminal_inputs[nt] = nt;
  }

  // hasProbability(d, r): a binary resident with a neutral default row, so
  // an empty knowledge base leaves parsing identical to the plain PCFG.
  // Resident names must stay unique across MFrags, so it is introduced only
  // when the theory has none.
  if (!out.find_resident(binding.has_probability)) {
    if (input_names.count(binding.has_probability) ||
        other_names.count(binding.has_probability))
      throw BridgeError("'" + binding.has_probability +
                        "' already exists as a non-resident variable");
    mebn::MFrag& home = out.mfrags.front();
    for (const char* ov : {"d", "r"}) {
      bool present = false;
      for (const auto& o : home.ordinary_vars)
        if (o.name == ov) present = true;
      if (!present)
        home.ordinary_vars.push_back(
            {ov, ov[0] == 'd' ? "Derivation" : "Rule"});
    }
    mebn::ResidentVariable hp;
    hp.tmpl.name = binding.has_probability;
    hp.tmpl.kind = mebn::VariableKind::Resident;
    hp.tmpl.args = {"d", "r"};
    hp.cpt.default_row = {0.5, 0.5};
    home.residents.push_back(std::move(hp));
  }

  for (const Rule& r : g.rules()) out.add_entity(rule_entity(r));

  return {std::move(out), std::move(binding)};
}

std::string register_derivation(BridgeBinding& b, mebn::MTheory& t,
                                std::string_view derivation) {
  auto known = b.derivations.find(std::string(derivation));
  if (known != b.derivations.end()) return known->second;

  std::string symbol = canonical_entity(derivation);
  if (symbol.empty())
    throw BridgeError("derivation '" + std::string(derivation) +
                      "' canonicalizes to an empty entity");
  for (const auto& [text, existing] : b.derivations)
    if (existing == symbol)
      throw BridgeError("derivations '" + text + "' and '" +
                        std::string(derivation) +
                        "' collide on entity '" + symbol + "'");
  t.add_entity(symbol);
  b.derivations.emplace(derivation, symbol);
  return symbol;
}

double conflate(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw BridgeError("conflate arguments must lie in [0, 1]");
  if ((p == 0.0 && q == 1.0) || (p == 1.0 && q == 0.0))
    throw BridgeError("conflation of contradictory certainties is undefined");
  // 0.5 is the neutral element; returning the other argument keeps the
  // identity exact rather than within an ulp.
  if (p == 0.5) return q;
  if (q == 0.5) return p;
  double num = p * q;
  double den = num + (1.0 - p) * (1.0 - q);
  return num / den;
}

std::vector<double> conflate_distributions(
    const std::vector<std::vector<double>>& dists) {
  if (dists.empty()) throw BridgeError("nothing to conflate");
  size_t len = dists.front().size();
  if (len < 2)
    throw BridgeError("conflation needs at least two states per vector");
  for (const auto& d : dists)
    if (d.size() != len)
      throw BridgeError("conflated vectors must share one state space");

  std::vector<double> out(len, 1.0);
  for (const auto& d : dists)
    for (size_t i = 0; i < len; ++i) {
      if (!(d[i] >= 0.0))
        throw BridgeError("conflated vectors must be nonnegative");
      out[i] *= d[i];
    }
  double z = 0.0;
  for (double p : out) z += p;
  if (z <= 0.0)
    throw BridgeError("conflation of contradictory distributions "
                      "(pointwise product is identically zero)");
  for (double& p : out) p /= z;
  return out;
}

CombinedProbability combined_rule_probability(double rule_probability,
                                              double semantic_posterior) {
  return {rule_probability, semantic_posterior,
          conflate(rule_probability, semantic_posterior)};
}

}  // namespace ssparse
