#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssparse/grammar.hpp"

namespace ssparse {

enum class TreeFormat { Bracketed, Ascii, Json };

/// Constituency tree over token span [begin, end). Leaves carry terminal
/// tokens and no rule; internal nodes carry the nonterminal and the rule
/// applied at that node. Children partition the parent span contiguously.
struct ParseTree {
  std::string label;
  std::optional<Rule> rule;
  std::vector<ParseTree> children;
  int begin = 0;
  int end = 0;

  bool leaf() const { return children.empty(); }

  /// Left-to-right terminal tokens under this node.
  std::vector<std::string> yield() const;

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

/// Bracketed is Penn-style "(S (NP Alex) ...)"; a bare leaf renders as its
/// token. Ascii is an indented one-node-per-line listing. Json round-trips
/// losslessly through tree_from_json.
std::string render_tree(const ParseTree& t, TreeFormat format);

/// Schema: {label, rule?: {lhs, rhs, prob}, span: [i, j], children: []}.
nlohmann::json tree_to_json(const ParseTree& t);
ParseTree tree_from_json(const nlohmann::json& j);

}  // namespace ssparse
