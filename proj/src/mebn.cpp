#include "ssparse/mebn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "json.hpp"

namespace ssparse::mebn {

namespace {

using nlohmann::json;

bool normalized(const std::vector<double>& dist) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::fabs(sum - 1.0) <= kRowTolerance;
}

std::vector<std::string> string_list(const json& j) {
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(e.get<std::string>());
  return out;
}

void read_states(const json& j, VariableTemplate& v) {
  if (!j.contains("states")) return;
  if (j["states"].is_string()) {
    if (j["states"].get<std::string>() != "entities")
      throw MebnError("states must be a list or the string \"entities\"");
    v.entity_states = true;
    v.states.clear();
  } else {
    v.states = string_list(j["states"]);
  }
}

VariableTemplate template_from_json(const json& j, VariableKind kind) {
  VariableTemplate v;
  v.kind = kind;
  v.name = j.at("name").get<std::string>();
  if (j.contains("args")) v.args = string_list(j["args"]);
  read_states(j, v);
  if (j.contains("prior"))
    v.prior = j["prior"].get<std::vector<double>>();
  return v;
}

MTheory theory_from_json(const json& j) {
  MTheory t;
  t.name = j.value("name", "");
  if (j.contains("entities"))
    for (const auto& e : j["entities"]) t.add_entity(e.get<std::string>());

  for (const auto& jm : j.value("mfrags", json::array())) {
    MFrag m;
    m.name = jm.at("name").get<std::string>();
    for (const auto& jo : jm.value("ordinary_vars", json::array()))
      m.ordinary_vars.push_back(
          {jo.at("name").get<std::string>(), jo.value("type", "")});
    for (const auto& jc : jm.value("context", json::array()))
      m.context.push_back(template_from_json(jc, VariableKind::Context));
    for (const auto& ji : jm.value("inputs", json::array()))
      m.inputs.push_back(template_from_json(ji, VariableKind::Input));
    for (const auto& jr : jm.value("residents", json::array())) {
      ResidentVariable r;
      r.tmpl = template_from_json(jr, VariableKind::Resident);
      if (jr.contains("parents")) r.parents = string_list(jr["parents"]);
      const json& jc = jr.at("cpt");
      for (const auto& jrow : jc.value("rows", json::array())) {
        CptRow row;
        for (const auto& [key, val] : jrow.at("given").items())
          row.given.emplace_back(key, val.get<std::string>());
        row.dist = jrow.at("dist").get<std::vector<double>>();
        r.cpt.rows.push_back(std::move(row));
      }
      r.cpt.default_row = jc.at("default").get<std::vector<double>>();
      m.residents.push_back(std::move(r));
    }
    t.mfrags.push_back(std::move(m));
  }

  for (const auto& jf : j.value("findings", json::array())) {
    Finding f;
    f.target.variable = jf.at("variable").get<std::string>();
    if (jf.contains("args")) f.target.args = string_list(jf["args"]);
    f.state = jf.at("state").get<std::string>();
    t.findings.push_back(std::move(f));
  }
  return t;
}

}  // namespace

std::string GroundedVariable::str() const {
  std::string out = variable + "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ",";
    out += args[i];
  }
  return out + ")";
}

bool MTheory::has_entity(std::string_view symbol) const {
  return std::binary_search(entities.begin(), entities.end(), symbol);
}

void MTheory::add_entity(const std::string& symbol) {
  auto it = std::lower_bound(entities.begin(), entities.end(), symbol);
  if (it == entities.end() || *it != symbol) entities.insert(it, symbol);
}

const ResidentVariable* MTheory::find_resident(std::string_view name,
                                               const MFrag** owner) const {
  for (const MFrag& m : mfrags)
    for (const ResidentVariable& r : m.residents)
      if (r.tmpl.name == name) {
        if (owner) *owner = &m;
        return &r;
      }
  return nullptr;
}

const VariableTemplate* MTheory::find_prior_input(std::string_view name) const {
  for (const MFrag& m : mfrags)
    for (const VariableTemplate& v : m.inputs)
      if (v.name == name && v.prior) return &v;
  return nullptr;
}

std::optional<std::string> MTheory::finding_state(
    const GroundedVariable& gv) const {
  for (const Finding& f : findings)
    if (f.target == gv) return f.state;
  return std::nullopt;
}

MTheory parse_mtheory(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw MebnError(std::string("mtheory syntax error: ") + e.what());
  }
  try {
    return theory_from_json(j);
  } catch (const MebnError&) {
    throw;
  } catch (const std::exception& e) {
    throw MebnError(std::string("malformed mtheory document: ") + e.what());
  }
}

MTheory load_mtheory(std::string_view text) {
  MTheory t = parse_mtheory(text);
  std::vector<Violation> violations = validate_mtheory(t);
  if (!violations.empty()) {
    std::string msg = "invalid mtheory:";
    for (const Violation& v : violations) {
      msg += "\n  [" + v.invariant + "]";
      if (!v.mfrag.empty()) msg += " " + v.mfrag + ":";
      msg += " " + v.detail;
    }
    throw MebnError(msg);
  }
  return t;
}

std::vector<Violation> validate_mtheory(const MTheory& t) {
  std::vector<Violation> out;
  auto flag = [&](const std::string& mfrag, const std::string& invariant,
                  const std::string& detail) {
    out.push_back({mfrag, invariant, detail});
  };

  std::map<std::string, const ResidentVariable*> residents_by_name;
  std::set<std::string> parent_refs;  // template names used as parents

  for (const MFrag& m : t.mfrags) {
    std::set<std::string> ordinary;
    for (const OrdinaryVariable& o : m.ordinary_vars)
      if (!ordinary.insert(o.name).second)
        flag(m.name, "ordinary-vars", "duplicate ordinary variable '" + o.name + "'");

    std::set<std::string> ctx_names, in_names, res_names;
    for (const VariableTemplate& v : m.context) ctx_names.insert(v.name);
    for (const VariableTemplate& v : m.inputs) in_names.insert(v.name);
    for (const ResidentVariable& r : m.residents) res_names.insert(r.tmpl.name);

    for (const std::string& n : ctx_names)
      if (in_names.count(n) || res_names.count(n))
        flag(m.name, "disjointness", "variable '" + n + "' appears in more than one of C, I, R");
    for (const std::string& n : in_names)
      if (res_names.count(n))
        flag(m.name, "disjointness", "variable '" + n + "' appears in both I and R");

    auto check_template = [&](const VariableTemplate& v) {
      for (const std::string& a : v.args)
        if (!ordinary.count(a))
          flag(m.name, "ordinary-vars",
               "'" + v.name + "' argument '" + a + "' is not an ordinary variable");
      if (v.kind == VariableKind::Context &&
          v.states != std::vector<std::string>{"T", "F"})
        flag(m.name, "context-states",
             "context variable '" + v.name + "' must have states {T, F}");
      if (!v.entity_states) {
        std::set<std::string> uniq(v.states.begin(), v.states.end());
        if (uniq.size() < 2 || uniq.size() != v.states.size())
          flag(m.name, "state-space",
               "'" + v.name + "' needs at least two distinct states");
      }
      if (v.prior) {
        size_t want = v.entity_states ? t.entities.size() : v.states.size();
        if (v.prior->size() != want || !normalized(*v.prior))
          flag(m.name, "prior", "'" + v.name + "' prior is not a distribution over its states");
      }
    };
    for (const VariableTemplate& v : m.context) check_template(v);
    for (const VariableTemplate& v : m.inputs) check_template(v);

    for (const ResidentVariable& r : m.residents) {
      check_template(r.tmpl);
      if (residents_by_name.count(r.tmpl.name))
        flag("", "duplicate-resident",
             "'" + r.tmpl.name + "' is resident in more than one MFrag");
      residents_by_name[r.tmpl.name] = &r;

      std::set<std::string> arg_set(r.tmpl.args.begin(), r.tmpl.args.end());
      for (const std::string& p : r.parents) {
        parent_refs.insert(p);
        const VariableTemplate* decl = nullptr;
        for (const VariableTemplate& v : m.inputs)
          if (v.name == p) decl = &v;
        for (const ResidentVariable& v : m.residents)
          if (v.tmpl.name == p) decl = &v.tmpl;
        if (!decl) {
          flag(m.name, "unknown-parent",
               "'" + r.tmpl.name + "' parent '" + p + "' is not an input or resident of this MFrag");
          continue;
        }
        for (const std::string& a : decl->args)
          if (!arg_set.count(a))
            flag(m.name, "parent-binding",
                 "parent '" + p + "' of '" + r.tmpl.name +
                     "' uses ordinary variable '" + a + "' not bound by the child");
      }

      size_t want = r.tmpl.entity_states ? t.entities.size() : r.tmpl.states.size();
      if (r.cpt.default_row.size() != want || !normalized(r.cpt.default_row))
        flag(m.name, "row-normalization",
             "'" + r.tmpl.name + "' default row is not a distribution");
      for (const CptRow& row : r.cpt.rows) {
        if (row.dist.size() != want || !normalized(row.dist))
          flag(m.name, "row-normalization",
               "'" + r.tmpl.name + "' has a row that is not a distribution");
        for (const auto& [key, value] : row.given) {
          bool is_parent =
              std::find(r.parents.begin(), r.parents.end(), key) != r.parents.end();
          if (!is_parent && !ordinary.count(key))
            flag(m.name, "row-key",
                 "'" + r.tmpl.name + "' row key '" + key +
                     "' names neither a parent nor an ordinary variable");
        }
      }
    }

    // Within-MFrag dependency cycles over resident-to-resident edges.
    std::map<std::string, std::vector<std::string>> deps;
    for (const ResidentVariable& r : m.residents)
      for (const std::string& p : r.parents)
        if (res_names.count(p)) deps[r.tmpl.name].push_back(p);
    std::map<std::string, int> color;  // 0 new, 1 active, 2 done
    std::function<bool(const std::string&)> has_cycle =
        [&](const std::string& v) -> bool {
      if (color[v] == 1) return true;
      if (color[v] == 2) return false;
      color[v] = 1;
      for (const std::string& p : deps[v])
        if (has_cycle(p)) return true;
      color[v] = 2;
      return false;
    };
    for (const ResidentVariable& r : m.residents)
      if (color[r.tmpl.name] == 0 && has_cycle(r.tmpl.name)) {
        flag(m.name, "cycle", "dependency cycle through '" + r.tmpl.name + "'");
        break;
      }
  }

  // Inputs referenced as parents must resolve somewhere. Declared-but-unused
  // inputs (e.g. bridge placeholders for grammar nonterminals) are fine.
  for (const MFrag& m : t.mfrags)
    for (const VariableTemplate& v : m.inputs)
      if (parent_refs.count(v.name) && !residents_by_name.count(v.name) &&
          !v.prior)
        flag(m.name, "unresolved-input",
             "input '" + v.name + "' is used as a parent but is resident nowhere and has no prior");

  for (const std::string& e : t.entities)
    if (e.empty()) flag("", "entity", "empty entity symbol");

  for (const Finding& f : t.findings) {
    const VariableTemplate* decl = nullptr;
    if (const ResidentVariable* r = t.find_resident(f.target.variable))
      decl = &r->tmpl;
    if (!decl)
      for (const MFrag& m : t.mfrags) {
        for (const VariableTemplate& v : m.inputs)
          if (v.name == f.target.variable) decl = &v;
        for (const VariableTemplate& v : m.context)
          if (v.name == f.target.variable) decl = &v;
      }
    if (!decl) {
      flag("", "finding", "finding on unknown variable '" + f.target.variable + "'");
      continue;
    }
    if (decl->args.size() != f.target.args.size())
      flag("", "finding", "finding on '" + f.target.variable + "' has wrong arity");
    for (const std::string& a : f.target.args)
      if (!t.has_entity(a))
        flag("", "finding", "finding argument '" + a + "' is not a registered entity");
    const std::vector<std::string>& states =
        decl->entity_states ? t.entities : decl->states;
    if (std::find(states.begin(), states.end(), f.state) == states.end())
      flag("", "finding",
           "finding state '" + f.state + "' not in the state space of '" +
               f.target.variable + "'");
  }

  return out;
}

const SsbnNode* Ssbn::find(const GroundedVariable& gv) const {
  auto it = index.find(gv);
  return it == index.end() ? nullptr : &nodes[it->second];
}

int Ssbn::edge_count() const {
  int n = 0;
  for (const SsbnNode& node : nodes) n += static_cast<int>(node.parents.size());
  return n;
}

namespace {

struct Grounder {
  const MTheory& t;
  int depth_limit;
  std::vector<SsbnNode> nodes;
  std::map<GroundedVariable, int> index;
  std::set<GroundedVariable> active;

  int ground(const GroundedVariable& gv, int depth, bool is_query) {
    auto it = index.find(gv);
    if (it != index.end()) return it->second;
    if (depth > depth_limit)
      throw MebnError("grounding of '" + gv.str() + "' exceeds depth limit " +
                      std::to_string(depth_limit));
    if (active.count(gv))
      throw MebnError("cyclic grounded dependency at '" + gv.str() + "'");

    for (const std::string& a : gv.args)
      if (!t.has_entity(a))
        throw MebnError("unknown entity '" + a + "' in '" + gv.str() + "'");

    const MFrag* mfrag = nullptr;
    const ResidentVariable* res = t.find_resident(gv.variable, &mfrag);
    if (!res) {
      const VariableTemplate* in = t.find_prior_input(gv.variable);
      if (!in) {
        if (is_query)
          throw MebnError("unknown query template '" + gv.variable + "'");
        throw MebnError("variable '" + gv.variable +
                        "' is neither resident in any MFrag nor an input with a prior");
      }
      if (in->args.size() != gv.args.size())
        throw MebnError("'" + gv.str() + "' has wrong arity");
      SsbnNode node;
      node.id = gv;
      node.states = in->entity_states ? t.entities : in->states;
      node.cpt = {*in->prior};
      index.emplace(gv, static_cast<int>(nodes.size()));
      nodes.push_back(std::move(node));
      return static_cast<int>(nodes.size()) - 1;
    }

    if (res->tmpl.args.size() != gv.args.size())
      throw MebnError("'" + gv.str() + "' has wrong arity");

    active.insert(gv);
    std::map<std::string, std::string> binding;
    for (size_t i = 0; i < res->tmpl.args.size(); ++i)
      binding[res->tmpl.args[i]] = gv.args[i];

    // Context constraints: satisfied only when a finding asserts T for the
    // grounded context variable. Unbound or unasserted contexts fail and
    // switch every row lookup to the default row.
    bool context_ok = true;
    for (const VariableTemplate& ctx : mfrag->context) {
      GroundedVariable cgv{ctx.name, {}};
      bool bound = true;
      for (const std::string& a : ctx.args) {
        auto b = binding.find(a);
        if (b == binding.end()) {
          bound = false;
          break;
        }
        cgv.args.push_back(b->second);
      }
      if (!bound || t.finding_state(cgv) != std::optional<std::string>("T")) {
        context_ok = false;
        break;
      }
    }

    SsbnNode node;
    node.id = gv;
    node.states = res->tmpl.entity_states ? t.entities : res->tmpl.states;

    std::vector<std::string> parent_names;
    std::vector<int> parent_card;
    for (const std::string& pname : res->parents) {
      const VariableTemplate* decl = nullptr;
      for (const VariableTemplate& v : mfrag->inputs)
        if (v.name == pname) decl = &v;
      for (const ResidentVariable& v : mfrag->residents)
        if (v.tmpl.name == pname) decl = &v.tmpl;
      if (!decl)
        throw MebnError("parent '" + pname + "' of '" + res->tmpl.name +
                        "' is not declared in MFrag '" + mfrag->name + "'");
      GroundedVariable pgv{pname, {}};
      for (const std::string& a : decl->args) {
        auto b = binding.find(a);
        if (b == binding.end())
          throw MebnError("parent '" + pname + "' of '" + gv.str() +
                          "' leaves ordinary variable '" + a + "' unbound");
        pgv.args.push_back(b->second);
      }
      int pidx = ground(pgv, depth + 1, false);
      node.parents.push_back(pidx);
      parent_names.push_back(pname);
      parent_card.push_back(static_cast<int>(nodes[pidx].states.size()));
    }

    size_t combos = 1;
    for (int c : parent_card) combos *= static_cast<size_t>(c);
    node.cpt.reserve(combos);
    std::vector<int> assign(parent_names.size(), 0);
    for (size_t combo = 0; combo < combos; ++combo) {
      const std::vector<double>* dist = &res->cpt.default_row;
      if (context_ok) {
        for (const CptRow& row : res->cpt.rows) {
          bool match = true;
          for (const auto& [key, value] : row.given) {
            bool applied = false;
            for (size_t pi = 0; pi < parent_names.size(); ++pi) {
              if (parent_names[pi] == key) {
                applied = true;
                if (nodes[node.parents[pi]].states[assign[pi]] != value)
                  match = false;
              }
            }
            if (!applied) {
              auto b = binding.find(key);
              if (b == binding.end() || b->second != value) match = false;
            }
            if (!match) break;
          }
          if (match) {
            dist = &row.dist;
            break;
          }
        }
      }
      if (dist->size() != node.states.size())
        throw MebnError("row of '" + res->tmpl.name +
                        "' does not match its state space");
      node.cpt.push_back(*dist);
      for (int pi = static_cast<int>(assign.size()) - 1; pi >= 0; --pi) {
        if (++assign[pi] < parent_card[pi]) break;
        assign[pi] = 0;
      }
    }

    active.erase(gv);
    index.emplace(gv, static_cast<int>(nodes.size()));
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }
};

std::set<int> ancestor_closure(const std::vector<SsbnNode>& nodes, int start) {
  std::set<int> out;
  std::vector<int> work{start};
  while (!work.empty()) {
    int v = work.back();
    work.pop_back();
    if (!out.insert(v).second) continue;
    for (int p : nodes[v].parents) work.push_back(p);
  }
  return out;
}

}  // namespace

Ssbn build_ssbn(const MTheory& t, const GroundedVariable& query,
                const Evidence& evidence, int depth_limit) {
  if (depth_limit < 1) throw MebnError("depth limit must be at least 1");

  auto is_node_template = [&](const std::string& name) {
    return t.find_resident(name) != nullptr || t.find_prior_input(name) != nullptr;
  };

  Evidence merged;
  for (const Finding& f : t.findings)
    if (is_node_template(f.target.variable)) merged[f.target] = f.state;
  for (const auto& [gv, state] : evidence) {
    if (!is_node_template(gv.variable))
      throw MebnError("evidence variable '" + gv.variable +
                      "' is not a resident variable or prior input");
    merged[gv] = state;
  }

  Grounder gr{t, depth_limit, {}, {}, {}};
  int query_idx = gr.ground(query, 1, true);
  std::map<int, std::string> evidence_states;
  for (const auto& [gv, state] : merged)
    evidence_states[gr.ground(gv, 1, false)] = state;

  // Keep the query's ancestor closure plus every evidence closure that
  // connects to it (directly or through other connected evidence).
  std::set<int> kept = ancestor_closure(gr.nodes, query_idx);
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [eidx, state] : evidence_states) {
      if (kept.count(eidx)) continue;
      std::set<int> cl = ancestor_closure(gr.nodes, eidx);
      bool touches = std::any_of(cl.begin(), cl.end(),
                                 [&](int v) { return kept.count(v) > 0; });
      if (touches) {
        kept.insert(cl.begin(), cl.end());
        grew = true;
      }
    }
  }

  Ssbn out;
  std::map<int, int> remap;
  for (size_t i = 0; i < gr.nodes.size(); ++i) {
    if (!kept.count(static_cast<int>(i))) continue;
    SsbnNode node = gr.nodes[i];
    for (int& p : node.parents) p = remap.at(p);
    remap[static_cast<int>(i)] = static_cast<int>(out.nodes.size());
    out.index.emplace(node.id, static_cast<int>(out.nodes.size()));
    out.nodes.push_back(std::move(node));
  }
  out.query = remap.at(query_idx);

  for (const auto& [eidx, state] : evidence_states) {
    auto it = remap.find(eidx);
    if (it == remap.end()) continue;  // d-separated from the query
    const SsbnNode& node = out.nodes[it->second];
    auto st = std::find(node.states.begin(), node.states.end(), state);
    if (st == node.states.end())
      throw MebnError("evidence state '" + state +
                      "' not in the state space of '" + node.id.str() + "'");
    out.evidence[it->second] =
        static_cast<int>(std::distance(node.states.begin(), st));
  }
  return out;
}

namespace {

// Discrete factor over SSBN node ids; vars ascending, last index fastest.
struct Factor {
  std::vector<int> vars;
  std::vector<double> table;
};

struct FactorOps {
  const std::vector<int>& card;

  size_t size_of(const std::vector<int>& vars) const {
    size_t s = 1;
    for (int v : vars) s *= static_cast<size_t>(card[v]);
    return s;
  }

  Factor from_node(const std::vector<SsbnNode>& nodes, int idx) const {
    const SsbnNode& node = nodes[idx];
    std::vector<int> vars = node.parents;
    vars.push_back(idx);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());

    Factor f;
    f.vars = vars;
    f.table.assign(size_of(vars), 0.0);
    std::vector<int> assign(vars.size(), 0);
    for (size_t flat = 0; flat < f.table.size(); ++flat) {
      auto state_of = [&](int var) {
        auto it = std::lower_bound(vars.begin(), vars.end(), var);
        return assign[static_cast<size_t>(it - vars.begin())];
      };
      size_t combo = 0;
      for (int p : node.parents)
        combo = combo * nodes[p].states.size() +
                static_cast<size_t>(state_of(p));
      f.table[flat] = node.cpt[combo][static_cast<size_t>(state_of(idx))];
      for (int i = static_cast<int>(vars.size()) - 1; i >= 0; --i) {
        if (++assign[i] < card[vars[i]]) break;
        assign[i] = 0;
      }
    }
    return f;
  }

  Factor restrict_var(const Factor& f, int var, int state) const {
    auto pos_it = std::find(f.vars.begin(), f.vars.end(), var);
    if (pos_it == f.vars.end()) return f;
    size_t pos = static_cast<size_t>(pos_it - f.vars.begin());

    Factor out;
    out.vars = f.vars;
    out.vars.erase(out.vars.begin() + static_cast<long>(pos));
    out.table.assign(size_of(out.vars), 0.0);

    std::vector<int> assign(f.vars.size(), 0);
    for (size_t flat = 0; flat < f.table.size(); ++flat) {
      if (assign[pos] == state) {
        size_t oflat = 0;
        for (size_t i = 0; i < f.vars.size(); ++i) {
          if (i == pos) continue;
          oflat = oflat * static_cast<size_t>(card[f.vars[i]]) +
                  static_cast<size_t>(assign[i]);
        }
        out.table[oflat] = f.table[flat];
      }
      for (int i = static_cast<int>(f.vars.size()) - 1; i >= 0; --i) {
        if (++assign[i] < card[f.vars[i]]) break;
        assign[i] = 0;
      }
    }
    return out;
  }

  Factor multiply(const Factor& a, const Factor& b) const {
    Factor out;
    out.vars = a.vars;
    for (int v : b.vars)
      if (std::find(out.vars.begin(), out.vars.end(), v) == out.vars.end())
        out.vars.push_back(v);
    std::sort(out.vars.begin(), out.vars.end());
    out.table.assign(size_of(out.vars), 0.0);

    std::vector<int> assign(out.vars.size(), 0);
    auto project = [&](const Factor& f) {
      size_t flat = 0;
      for (int v : f.vars) {
        auto it = std::lower_bound(out.vars.begin(), out.vars.end(), v);
        flat = flat * static_cast<size_t>(card[v]) +
               static_cast<size_t>(assign[static_cast<size_t>(it - out.vars.begin())]);
      }
      return flat;
    };
    for (size_t flat = 0; flat < out.table.size(); ++flat) {
      out.table[flat] = a.table[project(a)] * b.table[project(b)];
      for (int i = static_cast<int>(out.vars.size()) - 1; i >= 0; --i) {
        if (++assign[i] < card[out.vars[i]]) break;
        assign[i] = 0;
      }
    }
    return out;
  }

  Factor sum_out(const Factor& f, int var) const {
    auto pos_it = std::find(f.vars.begin(), f.vars.end(), var);
    if (pos_it == f.vars.end()) return f;
    size_t pos = static_cast<size_t>(pos_it - f.vars.begin());

    Factor out;
    out.vars = f.vars;
    out.vars.erase(out.vars.begin() + static_cast<long>(pos));
    out.table.assign(size_of(out.vars), 0.0);

    std::vector<int> assign(f.vars.size(), 0);
    for (size_t flat = 0; flat < f.table.size(); ++flat) {
      size_t oflat = 0;
      for (size_t i = 0; i < f.vars.size(); ++i) {
        if (i == pos) continue;
        oflat = oflat * static_cast<size_t>(card[f.vars[i]]) +
                static_cast<size_t>(assign[i]);
      }
      out.table[oflat] += f.table[flat];
      for (int i = static_cast<int>(f.vars.size()) - 1; i >= 0; --i) {
        if (++assign[i] < card[f.vars[i]]) break;
        assign[i] = 0;
      }
    }
    return out;
  }
};

int require_node(const Ssbn& n, const GroundedVariable& target) {
  auto it = n.index.find(target);
  if (it == n.index.end())
    throw InferenceError("target '" + target.str() + "' is not in the network");
  return it->second;
}

}  // namespace

std::vector<double> infer(const Ssbn& n, const GroundedVariable& target) {
  int target_idx = require_node(n, target);
  std::vector<int> card;
  for (const SsbnNode& node : n.nodes)
    card.push_back(static_cast<int>(node.states.size()));
  FactorOps ops{card};

  std::vector<Factor> factors;
  for (size_t i = 0; i < n.nodes.size(); ++i)
    factors.push_back(ops.from_node(n.nodes, static_cast<int>(i)));
  for (const auto& [idx, state] : n.evidence)
    for (Factor& f : factors) f = ops.restrict_var(f, idx, state);

  // When the target itself is observed the posterior is its indicator,
  // provided the evidence is consistent; eliminate everything unobserved to
  // obtain P(evidence).
  bool target_observed = n.evidence.count(target_idx) > 0;

  std::vector<int> to_eliminate;
  for (size_t i = 0; i < n.nodes.size(); ++i) {
    int v = static_cast<int>(i);
    if (n.evidence.count(v)) continue;
    if (v == target_idx && !target_observed) continue;
    to_eliminate.push_back(v);
  }

  // Min-degree elimination: repeatedly remove the variable with the fewest
  // neighbors in the factor interaction graph. Ordering affects cost only.
  std::set<int> remaining(to_eliminate.begin(), to_eliminate.end());
  while (!remaining.empty()) {
    int best = -1;
    size_t best_degree = 0;
    for (int v : remaining) {
      std::set<int> neighbors;
      for (const Factor& f : factors)
        if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end())
          neighbors.insert(f.vars.begin(), f.vars.end());
      neighbors.erase(v);
      if (best == -1 || neighbors.size() < best_degree) {
        best = v;
        best_degree = neighbors.size();
      }
    }
    remaining.erase(best);

    Factor product;
    product.table = {1.0};
    bool any = false;
    std::vector<Factor> rest;
    for (Factor& f : factors) {
      if (std::find(f.vars.begin(), f.vars.end(), best) != f.vars.end()) {
        product = any ? ops.multiply(product, f) : std::move(f);
        any = true;
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (any) rest.push_back(ops.sum_out(product, best));
    factors = std::move(rest);
  }

  Factor result;
  result.table = {1.0};
  for (const Factor& f : factors) result = ops.multiply(result, f);

  if (target_observed) {
    double z = result.table.empty() ? 0.0 : result.table[0];
    if (z <= 0.0)
      throw InferenceError("evidence has zero joint probability");
    std::vector<double> post(n.nodes[target_idx].states.size(), 0.0);
    post[static_cast<size_t>(n.evidence.at(target_idx))] = 1.0;
    return post;
  }

  std::vector<double> post(n.nodes[target_idx].states.size(), 0.0);
  double z = 0.0;
  for (size_t s = 0; s < post.size(); ++s) {
    post[s] = result.table[s];
    z += post[s];
  }
  if (z <= 0.0) throw InferenceError("evidence has zero joint probability");
  for (double& p : post) p /= z;
  return post;
}

std::vector<double> infer_enumerate(const Ssbn& n,
                                    const GroundedVariable& target) {
  int target_idx = require_node(n, target);

  long long joint = 1;
  for (const SsbnNode& node : n.nodes) {
    joint *= static_cast<long long>(node.states.size());
    if (joint > kEnumerationStateCap)
      throw InferenceError("joint state space exceeds 2^20");
  }

  std::vector<double> post(n.nodes[target_idx].states.size(), 0.0);
  std::vector<int> assign(n.nodes.size(), 0);
  for (long long it = 0; it < joint; ++it) {
    bool consistent = true;
    for (const auto& [idx, state] : n.evidence)
      if (assign[static_cast<size_t>(idx)] != state) {
        consistent = false;
        break;
      }
    if (consistent) {
      double p = 1.0;
      for (size_t i = 0; i < n.nodes.size(); ++i) {
        const SsbnNode& node = n.nodes[i];
        size_t combo = 0;
        for (int par : node.parents)
          combo = combo * n.nodes[static_cast<size_t>(par)].states.size() +
                  static_cast<size_t>(assign[static_cast<size_t>(par)]);
        p *= node.cpt[combo][static_cast<size_t>(assign[i])];
      }
      post[static_cast<size_t>(assign[static_cast<size_t>(target_idx)])] += p;
    }
    for (int i = static_cast<int>(assign.size()) - 1; i >= 0; --i) {
      if (++assign[static_cast<size_t>(i)] <
          static_cast<int>(n.nodes[static_cast<size_t>(i)].states.size()))
        break;
      assign[static_cast<size_t>(i)] = 0;
    }
  }

  double z = 0.0;
  for (double p : post) z += p;
  if (z <= 0.0) throw InferenceError("evidence has zero joint probability");
  for (double& p : post) p /= z;
  return post;
}

}  // namespace ssparse::mebn
