#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssparse/errors.hpp"

namespace ssparse::mebn {

inline constexpr double kRowTolerance = 1e-9;
inline constexpr int kDefaultDepthLimit = 10;
inline constexpr long long kEnumerationStateCap = 1LL << 20;

enum class VariableKind { Context, Input, Resident };

/// Placeholder substituted by entity identifiers during grounding.
struct OrdinaryVariable {
  std::string name;
  std::string type;

  friend bool operator==(const OrdinaryVariable&,
                         const OrdinaryVariable&) = default;
};

/// A random-variable template. Context variables are boolean constraints;
/// input variables reference distributions resident elsewhere (or carry a
/// prior, making them root nodes); resident variables own a distribution.
/// `entity_states` marks a state space that is the entity registry,
/// enumerated at grounding time.
struct VariableTemplate {
  std::string name;
  std::vector<std::string> args;
  std::vector<std::string> states = {"T", "F"};
  bool entity_states = false;
  VariableKind kind = VariableKind::Input;
  std::optional<std::vector<double>> prior;

  friend bool operator==(const VariableTemplate&,
                         const VariableTemplate&) = default;
};

/// One conditional row. `given` constrains either a parent's state (key is
/// a parent name) or an entity binding (key is an ordinary variable of the
/// MFrag). The first matching row wins; the default row covers the rest and
/// is also used when the MFrag's context constraints fail.
struct CptRow {
  std::vector<std::pair<std::string, std::string>> given;
  std::vector<double> dist;

  friend bool operator==(const CptRow&, const CptRow&) = default;
};

struct LocalDistribution {
  std::vector<CptRow> rows;
  std::vector<double> default_row;

  friend bool operator==(const LocalDistribution&,
                         const LocalDistribution&) = default;
};

struct ResidentVariable {
  VariableTemplate tmpl;               // kind == Resident
  std::vector<std::string> parents;    // names among this MFrag's I and R
  LocalDistribution cpt;

  friend bool operator==(const ResidentVariable&,
                         const ResidentVariable&) = default;
};

struct MFrag {
  std::string name;
  std::vector<OrdinaryVariable> ordinary_vars;
  std::vector<VariableTemplate> context;
  std::vector<VariableTemplate> inputs;
  std::vector<ResidentVariable> residents;

  friend bool operator==(const MFrag&, const MFrag&) = default;
};

/// A template instantiated with entity identifiers, e.g. hasProbability
/// applied to (eats_fish_with_fork, vp->vp_pp).
struct GroundedVariable {
  std::string variable;
  std::vector<std::string> args;

  std::string str() const;

  auto operator<=>(const GroundedVariable&) const = default;
};

struct Finding {
  GroundedVariable target;
  std::string state;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct MTheory {
  std::string name;
  std::vector<std::string> entities;   // sorted, unique
  std::vector<MFrag> mfrags;
  std::vector<Finding> findings;

  bool has_entity(std::string_view symbol) const;
  void add_entity(const std::string& symbol);

  /// Resident lookup by template name; resident names are unique across
  /// MFrags in a valid theory. `owner` receives the defining MFrag.
  const ResidentVariable* find_resident(std::string_view name,
                                        const MFrag** owner = nullptr) const;

  /// First input declaration carrying a prior, for root templates that are
  /// resident nowhere.
  const VariableTemplate* find_prior_input(std::string_view name) const;

  std::optional<std::string> finding_state(const GroundedVariable& gv) const;

  friend bool operator==(const MTheory&, const MTheory&) = default;
};

struct Violation {
  std::string mfrag;      // empty for theory-level violations
  std::string invariant;  // short tag, e.g. "disjointness", "cycle"
  std::string detail;
};

/// Parses the JSON MTheory format (see README) and validates it; throws
/// MebnError on syntax errors or validation failures.
MTheory load_mtheory(std::string_view text);

/// Parse without validation, for tools that report violations themselves.
MTheory parse_mtheory(std::string_view text);

/// Empty iff all MFrag and MTheory invariants hold.
std::vector<Violation> validate_mtheory(const MTheory& t);

/// One grounded node. CPT rows are indexed by the mixed-radix parent
/// assignment with the first parent varying slowest; each row is a
/// distribution over `states`.
struct SsbnNode {
  GroundedVariable id;
  std::vector<std::string> states;
  std::vector<int> parents;
  std::vector<std::vector<double>> cpt;
};

/// Ground Bayesian network for one query: the query node, its grounded
/// ancestors, and every evidence node connected to the query. Nodes are in
/// dependency order (parents precede children).
struct Ssbn {
  std::vector<SsbnNode> nodes;
  std::map<GroundedVariable, int> index;
  std::map<int, int> evidence;  // node index -> state index
  int query = -1;

  const SsbnNode* find(const GroundedVariable& gv) const;
  int edge_count() const;
};

using Evidence = std::map<GroundedVariable, std::string>;

/// Grounds the query through the MFrag graphs, substituting entity bindings
/// for ordinary variables. The theory's findings are merged with `evidence`
/// (explicit evidence wins on conflict). Context constraints are evaluated
/// against findings; on failure the node takes its default row. Throws
/// MebnError for unknown templates or entities, grounding cycles, and
/// recursion deeper than `depth_limit`.
Ssbn build_ssbn(const MTheory& t, const GroundedVariable& query,
                const Evidence& evidence = {},
                int depth_limit = kDefaultDepthLimit);

/// Exact posterior P(target | evidence) by variable elimination with a
/// min-degree ordering. Throws InferenceError on evidence with zero joint
/// probability.
std::vector<double> infer(const Ssbn& n, const GroundedVariable& target);

/// Brute-force oracle: sums the full joint. Errors when the joint state
/// count exceeds kEnumerationStateCap.
std::vector<double> infer_enumerate(const Ssbn& n,
                                    const GroundedVariable& target);

}  // namespace ssparse::mebn
