#include "ssparse/tree.hpp"

namespace ssparse {

namespace {

void collect_yield(const ParseTree& t, std::vector<std::string>& out) {
  if (t.leaf()) {
    out.push_back(t.label);
    return;
  }
  for (const auto& c : t.children) collect_yield(c, out);
}

void render_bracketed(const ParseTree& t, std::string& out) {
  if (t.leaf()) {
    out += t.label;
    return;
  }
  out += "(" + t.label;
  for (const auto& c : t.children) {
    out += " ";
    render_bracketed(c, out);
  }
  out += ")";
}

void render_ascii(const ParseTree& t, int depth, std::string& out) {
  out.append(static_cast<size_t>(depth) * 2, ' ');
  if (t.leaf()) {
    out += t.label + "\n";
    return;
  }
  out += t.label + " [" + std::to_string(t.begin) + "," +
         std::to_string(t.end) + ")\n";
  for (const auto& c : t.children) render_ascii(c, depth + 1, out);
}

}  // namespace

std::vector<std::string> ParseTree::yield() const {
  std::vector<std::string> out;
  collect_yield(*this, out);
  return out;
}

std::string render_tree(const ParseTree& t, TreeFormat format) {
  std::string out;
  switch (format) {
    case TreeFormat::Bracketed:
      render_bracketed(t, out);
      break;
    case TreeFormat::Ascii:
      render_ascii(t, 0, out);
      break;
    case TreeFormat::Json:
      out = tree_to_json(t).dump();
      break;
  }
  return out;
}

nlohmann::json tree_to_json(const ParseTree& t) {
  nlohmann::json j;
  j["label"] = t.label;
  j["span"] = {t.begin, t.end};
  if (t.rule) {
    j["rule"] = {{"lhs", t.rule->lhs},
                 {"rhs", t.rule->rhs},
                 {"lexical", t.rule->lexical},
                 {"prob", t.rule->probability}};
  }
  j["children"] = nlohmann::json::array();
  for (const auto& c : t.children) j["children"].push_back(tree_to_json(c));
  return j;
}

ParseTree tree_from_json(const nlohmann::json& j) {
  ParseTree t;
  t.label = j.at("label").get<std::string>();
  t.begin = j.at("span").at(0).get<int>();
  t.end = j.at("span").at(1).get<int>();
  if (j.contains("rule")) {
    Rule r;
    r.lhs = j["rule"].at("lhs").get<std::string>();
    r.rhs = j["rule"].at("rhs").get<std::vector<std::string>>();
    r.lexical = j["rule"].value("lexical", r.rhs.size() == 1);
    r.probability = j["rule"].at("prob").get<double>();
    t.rule = std::move(r);
  }
  for (const auto& c : j.at("children")) t.children.push_back(tree_from_json(c));
  return t;
}

}  // namespace ssparse
