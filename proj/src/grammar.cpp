#include "ssparse/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace ssparse {

namespace {

std::string format_probability(double p) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", p);
  return buf;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Strips a trailing comment, honoring quoted terminals.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw GrammarError("line " + std::to_string(line_no) + ": " + what);
}

double parse_probability(const std::string& tok, int line_no) {
  size_t consumed = 0;
  double p = 0.0;
  try {
    p = std::stod(tok, &consumed);
  } catch (const std::exception&) {
    fail(line_no, "cannot parse probability '" + tok + "'");
  }
  if (consumed != tok.size() || !std::isfinite(p))
    fail(line_no, "cannot parse probability '" + tok + "'");
  if (p <= 0.0 || p > 1.0)
    fail(line_no, "probability " + tok + " outside (0, 1]");
  return p;
}

bool is_quoted(const std::string& tok) {
  return tok.size() >= 2 && tok.front() == '\'' && tok.back() == '\'';
}

std::string unquote(const std::string& tok, int line_no) {
  std::string inner = tok.substr(1, tok.size() - 2);
  if (inner.empty()) fail(line_no, "empty terminal");
  if (inner.find('\'') != std::string::npos)
    fail(line_no, "nested quote in terminal " + tok);
  return inner;
}

void append_unique(std::vector<std::string>& v, std::set<std::string>& seen,
                   const std::string& name) {
  if (seen.insert(name).second) v.push_back(name);
}

}  // namespace

std::string Rule::text() const {
  std::string out = lhs + " ->";
  if (lexical) {
    out += " '" + rhs[0] + "'";
  } else {
    for (const auto& s : rhs) out += " " + s;
  }
  out += " " + format_probability(probability);
  return out;
}

Pcfg Pcfg::from_rules(std::vector<Rule> rules, std::string start) {
  Pcfg g;
  std::set<std::string> nt_seen;
  std::set<std::string> t_seen;
  std::set<std::pair<std::string, std::vector<std::string>>> rule_seen;

  for (const Rule& r : rules) {
    if (r.lhs.empty()) throw GrammarError("rule with empty left-hand side");
    bool shape_ok = r.lexical ? r.rhs.size() == 1 : r.rhs.size() == 2;
    if (!shape_ok)
      throw GrammarError("non-CNF rule shape for '" + r.lhs + "'");
    for (const auto& s : r.rhs)
      if (s.empty()) throw GrammarError("rule with empty right-hand symbol");
    if (!(r.probability > 0.0 && r.probability <= 1.0) ||
        !std::isfinite(r.probability))
      throw GrammarError("rule '" + r.lhs + "' probability outside (0, 1]");
    if (!rule_seen.insert({r.lhs, r.rhs}).second)
      throw GrammarError("duplicate rule '" + r.text() + "'");

    append_unique(g.nonterminals_, nt_seen, r.lhs);
    if (r.lexical) {
      append_unique(g.terminals_, t_seen, r.rhs[0]);
    } else {
      append_unique(g.nonterminals_, nt_seen, r.rhs[0]);
      append_unique(g.nonterminals_, nt_seen, r.rhs[1]);
    }
  }

  for (const auto& t : g.terminals_)
    if (nt_seen.count(t))
      throw GrammarError("symbol '" + t +
                         "' used both as terminal and nonterminal");

  if (start.empty() && !rules.empty()) start = rules.front().lhs;
  if (!rules.empty() && !nt_seen.count(start))
    throw GrammarError("start symbol '" + start + "' is not a nonterminal");
  g.start_ = std::move(start);
  g.rules_ = std::move(rules);
  return g;
}

bool Pcfg::is_nonterminal(std::string_view name) const {
  return std::find(nonterminals_.begin(), nonterminals_.end(), name) !=
         nonterminals_.end();
}

bool Pcfg::is_terminal(std::string_view name) const {
  return std::find(terminals_.begin(), terminals_.end(), name) !=
         terminals_.end();
}

std::vector<Symbol> Pcfg::symbols() const {
  std::vector<Symbol> out;
  for (const auto& n : nonterminals_)
    out.push_back({n, SymbolKind::Nonterminal});
  for (const auto& t : terminals_) out.push_back({t, SymbolKind::Terminal});
  return out;
}

std::vector<Rule> Pcfg::rules_for(const std::string& lhs) const {
  if (!is_nonterminal(lhs))
    throw GrammarError("unknown nonterminal '" + lhs + "'");
  std::vector<Rule> out;
  for (const Rule& r : rules_)
    if (r.lhs == lhs) out.push_back(r);
  return out;
}

Pcfg load_grammar(std::string_view text) {
  std::vector<Rule> rules;
  std::string start_directive;

  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::vector<std::string> toks = split_ws(strip_comment(raw));
    if (toks.empty()) continue;

    if (toks[0] == "%start") {
      if (toks.size() != 2) fail(line_no, "%start takes exactly one symbol");
      start_directive = toks[1];
      continue;
    }

    if (toks.size() < 2 || toks[1] != "->")
      fail(line_no, "expected 'LHS -> ...'");
    if (is_quoted(toks[0])) fail(line_no, "left-hand side must be bare");
    if (toks.size() < 4) fail(line_no, "truncated rule");
    if (toks.size() > 5)
      fail(line_no, "non-CNF rule: more than two right-hand symbols");

    Rule r;
    r.lhs = toks[0];
    r.probability = parse_probability(toks.back(), line_no);
    if (toks.size() == 4) {
      if (!is_quoted(toks[2]))
        fail(line_no, "non-CNF rule: a single right-hand symbol must be a "
                      "quoted terminal");
      r.lexical = true;
      r.rhs = {unquote(toks[2], line_no)};
    } else {
      if (is_quoted(toks[2]) || is_quoted(toks[3]))
        fail(line_no, "non-CNF rule: binary rules take two nonterminals");
      r.rhs = {toks[2], toks[3]};
    }
    rules.push_back(std::move(r));
  }

  return Pcfg::from_rules(std::move(rules), start_directive);
}

std::string serialize_grammar(const Pcfg& g) {
  std::string out;
  if (!g.start().empty()) out += "%start " + g.start() + "\n";
  for (const Rule& r : g.rules()) out += r.text() + "\n";
  return out;
}

std::vector<NormalizationViolation> validate_normalization(const Pcfg& g) {
  std::map<std::string, double> sums;
  std::vector<std::string> order;
  for (const Rule& r : g.rules()) {
    if (!sums.count(r.lhs)) order.push_back(r.lhs);
    sums[r.lhs] += r.probability;
  }
  std::vector<NormalizationViolation> out;
  for (const auto& lhs : order)
    if (std::fabs(sums[lhs] - 1.0) > kNormalizationTolerance)
      out.push_back({lhs, sums[lhs]});
  return out;
}

}  // namespace ssparse
