#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mw/mbt/expr.hpp"

namespace mw::mbt {

using json = nlohmann::json;

enum class Type { kBool, kInt, kAtom, kSet };
enum class Role { kInput, kState, kOutput };

/// Variable with a finite, ordered domain. Domain order fixes witness order:
/// integers ascending, atoms as declared, sets by size then lexicographically.
struct VarDecl {
  std::string name;
  Type type;
  Role role;
  std::vector<Value> domain;
};

VarDecl bool_var(std::string name, Role role);
VarDecl int_var(std::string name, Role role, std::int64_t lo, std::int64_t hi);
VarDecl atom_var(std::string name, Role role, std::vector<Atom> atoms);
/// Domain: every subset of `universe`.
VarDecl set_var(std::string name, Role role, const std::vector<Atom>& universe);

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A transition A(i, s, s', o) = Pre(i, s) => Post(i, s, s', o).
///
/// `vars` are the input and state variables enumerated during pruning, in
/// witness order; `outputs` are the abstracted s' and o seen only by `post`.
struct TransitionSpec {
  std::string name;
  std::vector<VarDecl> vars;
  std::vector<VarDecl> outputs;
  ExprPtr pre;
  ExprPtr post;

  const VarDecl* find(const std::string& name) const;
  /// Throws SpecError when pre or post mention an undeclared variable.
  void check() const;
  /// Product of the domain sizes of `vars`, saturating at SIZE_MAX.
  std::size_t space() const;
};

/// Calls `f` on every binding of `spec.vars` in lexicographic order until it
/// returns false.
void for_each_binding(const TransitionSpec& spec, const std::function<bool(const Binding&)>& f);

class TacticMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Testing tactic. Labels: "set-extension:X", "boundary:v", "dnf",
/// "membership:x:S", "free-type:a".
struct Tactic {
  enum class Kind { kSetExtension, kBoundary, kDnf, kMembership, kFreeType };
  Kind kind;
  std::string var;
  std::string set;  // membership only

  std::string label() const;
  /// Throws std::invalid_argument on an unknown label.
  static Tactic parse(const std::string& label);

  /// Characteristic predicates of the children of a node whose effective
  /// predicate is `parent`. Throws TacticMismatch on wrongly typed variables.
  std::vector<ExprPtr> partition(const TransitionSpec& spec, const ExprPtr& parent) const;
};

/// Every applicable tactic for `spec`: one per set, integer and atom
/// variable, one per (atom, set) pair, and dnf.
std::vector<Tactic> catalog(const TransitionSpec& spec);

struct TreeNode {
  enum class Status { kOpen, kSatisfiable, kUnsatisfiable };

  std::size_t id = 0;
  std::optional<std::size_t> parent;
  ExprPtr characteristic;
  std::string tactic;  // label of the tactic that produced this node; "vis" at the root
  std::vector<std::size_t> children;
  Status status = Status::kOpen;
  std::optional<Binding> witness;
  bool removed = false;
};

/// Testing tree whose root is the valid input space of `spec`.
class TestingTree {
 public:
  explicit TestingTree(TransitionSpec spec);

  const TransitionSpec& spec() const { return spec_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t id) const { return nodes_.at(id); }
  TreeNode& node(std::size_t id) { return nodes_.at(id); }

  /// Live nodes without live children, in id order.
  std::vector<std::size_t> leaves() const;
  /// Conjunction of the characteristics from the root down to `id`.
  ExprPtr effective(std::size_t id) const;
  /// Tactic labels from the root down to `id`.
  std::vector<std::string> path(std::size_t id) const;

  /// Applies `t` below `id`; returns the new child ids.
  std::vector<std::size_t> apply(std::size_t id, const Tactic& t);
  /// Applies `t` below every current leaf.
  void apply_to_leaves(const Tactic& t);

 private:
  TransitionSpec spec_;
  std::vector<TreeNode> nodes_;
};

/// Root test specification: characteristic = precondition.
TestingTree vis(const TransitionSpec& spec);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PruneStats {
  std::size_t leaves = 0;
  std::size_t satisfiable = 0;
  std::size_t removed = 0;
};

/// Decides every leaf by bounded-exhaustive enumeration, attaches the smallest
/// witness to satisfiable leaves and removes the rest; parents left without
/// live children are removed too. Throws BudgetExceeded, naming the leaf,
/// when the enumeration space exceeds `budget`.
PruneStats prune(TestingTree& tree, std::size_t budget = 1'000'000, unsigned jobs = 1);

struct AbstractTestCase {
  std::size_t leaf = 0;
  std::vector<std::string> path;
  Binding binding;
};

/// One case per satisfiable leaf. Throws std::logic_error on an unpruned leaf.
std::vector<AbstractTestCase> generate_cases(const TestingTree& tree);

/// Whether `c` satisfies every characteristic on its leaf's root path.
bool case_valid(const TestingTree& tree, const AbstractTestCase& c);

/// System under test seen through refinement and abstraction.
class SutAdapter {
 public:
  virtual ~SutAdapter() = default;
  virtual std::string name() const = 0;
  /// Refines the abstract case to concrete values, runs the implementation
  /// and abstracts the final state and outputs to a binding of the TransitionSpec's
  /// output variables. May throw; the runner records that as a failure.
  virtual Binding execute(const Binding& abstract_case) = 0;
};

struct CaseResult {
  std::size_t index = 0;
  std::size_t leaf = 0;
  bool passed = false;
  std::string detail;
  Binding observed;
};

struct VerdictReport {
  std::string transition;
  std::string sut;
  std::vector<CaseResult> results;

  std::size_t passed() const;
  std::size_t failed() const { return results.size() - passed(); }
};

/// Refine, run, abstract and check Post for each case in order.
VerdictReport run_suite(const TransitionSpec& spec, const std::vector<AbstractTestCase>& cases,
                        SutAdapter& sut);

/// Bindings of the parent satisfying no child, or more than one.
struct PartitionCheck {
  std::size_t parent_bindings = 0;
  std::size_t uncovered = 0;
  std::size_t overlapping = 0;
  bool ok() const { return uncovered == 0 && overlapping == 0; }
};

PartitionCheck check_partition(const TransitionSpec& spec, const ExprPtr& parent,
                               const std::vector<ExprPtr>& children);

// ---- JSON ---------------------------------------------------------------------

json to_json(const Value& v);
/// Decodes according to the declared type; throws std::invalid_argument.
Value value_from_json(const json& j, const VarDecl& decl);

struct Suite {
  std::string transition;
  std::vector<std::string> tactics;
  std::size_t budget = 0;
  std::vector<AbstractTestCase> cases;
};

json to_json(const Suite& s);
Suite suite_from_json(const json& j, const TransitionSpec& spec);
json to_json(const VerdictReport& r);

}  // namespace mw::mbt
