#include "mw/mbt/ttf.hpp"

#include <algorithm>
#include <limits>
#include <thread>

namespace mw::mbt {

// ---- declarations -------------------------------------------------------------

VarDecl bool_var(std::string name, Role role) { return {std::move(name), Type::kBool, role, {false, true}}; }

VarDecl int_var(std::string name, Role role, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw SpecError("empty integer domain for " + name);
  VarDecl d{std::move(name), Type::kInt, role, {}};
  for (std::int64_t v = lo; v <= hi; ++v) d.domain.emplace_back(v);
  return d;
}

VarDecl atom_var(std::string name, Role role, std::vector<Atom> atoms_) {
  VarDecl d{std::move(name), Type::kAtom, role, {}};
  for (auto& a : atoms_) d.domain.emplace_back(std::move(a));
  return d;
}

VarDecl set_var(std::string name, Role role, const std::vector<Atom>& universe) {
  if (universe.size() > 16) throw SpecError("set universe too large for " + name);
  std::vector<AtomSet> subsets;
  for (std::size_t mask = 0; mask < (std::size_t{1} << universe.size()); ++mask) {
    AtomSet s;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (mask >> i & 1) s.insert(universe[i]);
    }
    subsets.push_back(std::move(s));
  }
  std::sort(subsets.begin(), subsets.end(), [](const AtomSet& a, const AtomSet& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  VarDecl d{std::move(name), Type::kSet, role, {}};
  for (auto& s : subsets) d.domain.emplace_back(std::move(s));
  return d;
}

const VarDecl* TransitionSpec::find(const std::string& n) const {
  for (const auto* list : {&vars, &outputs}) {
    for (const auto& d : *list) {
      if (d.name == n) return &d;
    }
  }
  return nullptr;
}

void TransitionSpec::check() const {
  std::set<std::string> inputs, all;
  for (const auto& d : vars) {
    if (!all.insert(d.name).second) throw SpecError(name + ": duplicate variable " + d.name);
    inputs.insert(d.name);
  }
  for (const auto& d : outputs) {
    if (!all.insert(d.name).second) throw SpecError(name + ": duplicate variable " + d.name);
  }
  for (const auto& v : free_vars(*pre)) {
    if (!inputs.count(v)) throw SpecError(name + ": precondition mentions undeclared " + v);
  }
  for (const auto& v : free_vars(*post)) {
    if (!all.count(v)) throw SpecError(name + ": postcondition mentions undeclared " + v);
  }
}

std::size_t TransitionSpec::space() const {
  std::size_t n = 1;
  for (const auto& d : vars) {
    if (d.domain.empty()) return 0;
    if (n > std::numeric_limits<std::size_t>::max() / d.domain.size()) {
      return std::numeric_limits<std::size_t>::max();
    }
    n *= d.domain.size();
  }
  return n;
}

namespace {

// Mixed-radix index over spec.vars, first variable most significant, so that
// ascending indices are lexicographic bindings.
Binding decode(const TransitionSpec& spec, std::size_t index) {
  Binding b;
  for (std::size_t k = spec.vars.size(); k-- > 0;) {
    const auto& d = spec.vars[k];
    b[d.name] = d.domain[index % d.domain.size()];
    index /= d.domain.size();
  }
  return b;
}

std::vector<std::size_t> filter(const TransitionSpec& spec, const std::vector<std::size_t>& from,
                                const Expr& pred) {
  std::vector<std::size_t> out;
  for (auto i : from) {
    if (holds(pred, decode(spec, i))) out.push_back(i);
  }
  return out;
}

const VarDecl& typed(const TransitionSpec& spec, const std::string& name, std::initializer_list<Type> types,
                     const std::string& tactic) {
  const VarDecl* d = spec.find(name);
  if (d == nullptr || d->role == Role::kOutput) {
    throw TacticMismatch(tactic + ": " + spec.name + " has no input or state variable " + name);
  }
  if (std::find(types.begin(), types.end(), d->type) == types.end()) {
    throw TacticMismatch(tactic + ": variable " + name + " has the wrong type");
  }
  return *d;
}

}  // namespace

void for_each_binding(const TransitionSpec& spec, const std::function<bool(const Binding&)>& f) {
  const std::size_t n = spec.space();
  for (std::size_t i = 0; i < n; ++i) {
    if (!f(decode(spec, i))) return;
  }
}

// ---- tactics ------------------------------------------------------------------

std::string Tactic::label() const {
  switch (kind) {
    case Kind::kSetExtension: return "set-extension:" + var;
    case Kind::kBoundary: return "boundary:" + var;
    case Kind::kDnf: return "dnf";
    case Kind::kMembership: return "membership:" + var + ":" + set;
    case Kind::kFreeType: return "free-type:" + var;
  }
  return "";
}

Tactic Tactic::parse(const std::string& label) {
  auto colon = label.find(':');
  std::string head = label.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : label.substr(colon + 1);
  if (head == "dnf" && rest.empty()) return {Kind::kDnf, "", ""};
  if (rest.empty()) throw std::invalid_argument("tactic '" + label + "' needs a variable");
  if (head == "set-extension") return {Kind::kSetExtension, rest, ""};
  if (head == "boundary") return {Kind::kBoundary, rest, ""};
  if (head == "free-type") return {Kind::kFreeType, rest, ""};
  if (head == "membership") {
    auto c2 = rest.find(':');
    if (c2 == std::string::npos || c2 == 0 || c2 + 1 == rest.size()) {
      throw std::invalid_argument("membership tactic needs 'membership:x:S'");
    }
    return {Kind::kMembership, rest.substr(0, c2), rest.substr(c2 + 1)};
  }
  throw std::invalid_argument("unknown tactic '" + label + "'");
}

std::vector<ExprPtr> Tactic::partition(const TransitionSpec& spec, const ExprPtr& parent) const {
  switch (kind) {
    case Kind::kSetExtension: {
      typed(spec, var, {Type::kSet}, label());
      auto x = mbt::var(var);
      return {eq(x, empty_set()), eq(card(x), integer(1)), gt(card(x), integer(1))};
    }
    case Kind::kBoundary: {
      const auto& d = typed(spec, var, {Type::kInt}, label());
      auto [lo_it, hi_it] = std::minmax_element(d.domain.begin(), d.domain.end());
      auto lo = std::get<std::int64_t>(*lo_it), hi = std::get<std::int64_t>(*hi_it);
      auto v = mbt::var(var);
      if (lo == hi) return {eq(v, integer(lo))};
      return {eq(v, integer(lo)), and_({lt(integer(lo), v), lt(v, integer(hi))}), eq(v, integer(hi))};
    }
    case Kind::kDnf: {
      auto ds = dnf(parent);
      if (ds.empty()) return {falsity()};
      // D_i and not (D_1 or ... or D_{i-1}) keeps the children disjoint.
      std::vector<ExprPtr> out;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (i == 0) {
          out.push_back(ds[0]);
        } else {
          out.push_back(and_({ds[i], not_(or_({ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(i)}))}));
        }
      }
      return out;
    }
    case Kind::kMembership: {
      typed(spec, var, {Type::kAtom}, label());
      typed(spec, set, {Type::kSet}, label());
      auto m = in(mbt::var(var), mbt::var(set));
      return {m, not_(m)};
    }
    case Kind::kFreeType: {
      const auto& d = typed(spec, var, {Type::kAtom, Type::kBool}, label());
      std::vector<ExprPtr> out;
      for (const auto& v : d.domain) out.push_back(eq(mbt::var(var), lit(v)));
      return out;
    }
  }
  return {};
}

std::vector<Tactic> catalog(const TransitionSpec& spec) {
  std::vector<Tactic> out{{Tactic::Kind::kDnf, "", ""}};
  for (const auto& d : spec.vars) {
    if (d.type == Type::kSet) out.push_back({Tactic::Kind::kSetExtension, d.name, ""});
    if (d.type == Type::kInt) out.push_back({Tactic::Kind::kBoundary, d.name, ""});
    if (d.type == Type::kAtom || d.type == Type::kBool) out.push_back({Tactic::Kind::kFreeType, d.name, ""});
  }
  for (const auto& x : spec.vars) {
    if (x.type != Type::kAtom) continue;
    for (const auto& s : spec.vars) {
      if (s.type == Type::kSet) out.push_back({Tactic::Kind::kMembership, x.name, s.name});
    }
  }
  return out;
}

// ---- testing tree -------------------------------------------------------------

TestingTree::TestingTree(TransitionSpec spec) : spec_(std::move(spec)) {
  spec_.check();
  TreeNode root;
  root.characteristic = spec_.pre;
  root.tactic = "vis";
  nodes_.push_back(std::move(root));
}

TestingTree vis(const TransitionSpec& spec) { return TestingTree(spec); }

std::vector<std::size_t> TestingTree::leaves() const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes_) {
    if (n.removed) continue;
    bool live_child = std::any_of(n.children.begin(), n.children.end(),
                                  [&](std::size_t c) { return !nodes_[c].removed; });
    if (!live_child) out.push_back(n.id);
  }
  return out;
}

ExprPtr TestingTree::effective(std::size_t id) const {
  std::vector<ExprPtr> chain;
  for (std::optional<std::size_t> cur = id; cur; cur = nodes_.at(*cur).parent) {
    const auto& c = nodes_.at(*cur).characteristic;
    if (c->op == Op::kAnd) {
      chain.insert(chain.end(), c->args.rbegin(), c->args.rend());
    } else {
      chain.push_back(c);
    }
  }
  std::reverse(chain.begin(), chain.end());
  return and_(std::move(chain));
}

std::vector<std::string> TestingTree::path(std::size_t id) const {
  std::vector<std::string> out;
  for (std::optional<std::size_t> cur = id; cur; cur = nodes_.at(*cur).parent) {
    out.push_back(nodes_.at(*cur).tactic);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> TestingTree::apply(std::size_t id, const Tactic& t) {
  auto chars = t.partition(spec_, effective(id));
  std::vector<std::size_t> ids;
  for (auto& c : chars) {
    TreeNode n;
    n.id = nodes_.size();
    n.parent = id;
    n.characteristic = std::move(c);
    n.tactic = t.label();
    nodes_[id].children.push_back(n.id);
    ids.push_back(n.id);
    nodes_.push_back(std::move(n));
  }
  return ids;
}

void TestingTree::apply_to_leaves(const Tactic& t) {
  for (auto leaf : leaves()) apply(leaf, t);
}

// ---- pruning ------------------------------------------------------------------

PruneStats prune(TestingTree& tree, std::size_t budget, unsigned jobs) {
  const auto& spec = tree.spec();
  const auto leaves = tree.leaves();
  PruneStats stats;
  stats.leaves = leaves.size();
  if (spec.space() > budget) {
    const auto& p = tree.path(leaves.front());
    std::string where;
    for (const auto& s : p) where += (where.empty() ? "" : " / ") + s;
    throw BudgetExceeded("leaf " + std::to_string(leaves.front()) + " (" + where + "): " +
                         std::to_string(spec.space()) + " bindings exceed the budget of " +
                         std::to_string(budget));
  }

  // Satisfying bindings of each live node, filtered from its parent's set.
  const auto& nodes = tree.nodes();
  std::vector<std::vector<std::size_t>> sat(nodes.size());
  std::vector<std::vector<std::size_t>> by_depth;
  std::vector<std::size_t> depth(nodes.size(), 0);
  for (const auto& n : nodes) {
    if (n.removed) continue;
    depth[n.id] = n.parent ? depth[*n.parent] + 1 : 0;
    if (by_depth.size() <= depth[n.id]) by_depth.resize(depth[n.id] + 1);
    by_depth[depth[n.id]].push_back(n.id);
  }
  std::vector<std::size_t> all(spec.space());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  jobs = std::max(1u, jobs);
  for (const auto& level : by_depth) {
    auto work = [&](std::size_t start) {
      for (std::size_t k = start; k < level.size(); k += jobs) {
        const auto& n = nodes[level[k]];
        sat[n.id] = filter(spec, n.parent ? sat[*n.parent] : all, *n.characteristic);
      }
    };
    if (jobs == 1 || level.size() == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j);
      for (auto& t : pool) t.join();
    }
  }

  for (auto id : leaves) {
    auto& n = tree.node(id);
    if (sat[id].empty()) {
      n.status = TreeNode::Status::kUnsatisfiable;
      n.removed = true;
      ++stats.removed;
    } else {
      n.status = TreeNode::Status::kSatisfiable;
      n.witness = decode(spec, sat[id].front());
      ++stats.satisfiable;
    }
  }
  // Children were created after their parents, so one reverse sweep suffices.
  for (std::size_t id = nodes.size(); id-- > 0;) {
    auto& n = tree.node(id);
    if (n.removed || n.children.empty()) continue;
    bool any = std::any_of(n.children.begin(), n.children.end(),
                           [&](std::size_t c) { return !tree.node(c).removed; });
    n.status = any ? TreeNode::Status::kSatisfiable : TreeNode::Status::kUnsatisfiable;
    if (!any) {
      n.removed = true;
      ++stats.removed;
    }
  }
  return stats;
}

std::vector<AbstractTestCase> generate_cases(const TestingTree& tree) {
  std::vector<AbstractTestCase> out;
  for (auto id : tree.leaves()) {
    const auto& n = tree.node(id);
    if (n.status != TreeNode::Status::kSatisfiable || !n.witness) {
      throw std::logic_error("leaf " + std::to_string(id) + " has not been pruned");
    }
    out.push_back({id, tree.path(id), *n.witness});
  }
  return out;
}

bool case_valid(const TestingTree& tree, const AbstractTestCase& c) {
  for (std::optional<std::size_t> cur = c.leaf; cur; cur = tree.node(*cur).parent) {
    if (!holds(*tree.node(*cur).characteristic, c.binding)) return false;
  }
  return true;
}

// ---- verdict loop -------------------------------------------------------------

std::size_t VerdictReport::passed() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const CaseResult& r) { return r.passed; }));
}

VerdictReport run_suite(const TransitionSpec& spec, const std::vector<AbstractTestCase>& cases,
                        SutAdapter& sut) {
  VerdictReport report{spec.name, sut.name(), {}};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CaseResult r;
    r.index = i;
    r.leaf = cases[i].leaf;
    try {
      r.observed = sut.execute(cases[i].binding);
      Binding all = cases[i].binding;
      std::string missing;
      for (const auto& d : spec.outputs) {
        auto it = r.observed.find(d.name);
        if (it == r.observed.end()) {
          missing += (missing.empty() ? "" : ", ") + d.name;
        } else {
          all[d.name] = it->second;
        }
      }
      if (!missing.empty()) {
        r.detail = "abstraction did not produce " + missing;
      } else {
        r.passed = holds(*spec.post, all);
        if (!r.passed) r.detail = "postcondition violated";
      }
    } catch (const std::exception& e) {
      r.detail = std::string("crash: ") + e.what();
    }
    report.results.push_back(std::move(r));
  }
  return report;
}

PartitionCheck check_partition(const TransitionSpec& spec, const ExprPtr& parent,
                               const std::vector<ExprPtr>& children) {
  PartitionCheck c;
  for_each_binding(spec, [&](const Binding& b) {
    if (!holds(*parent, b)) return true;
    ++c.parent_bindings;
    std::size_t hits = 0;
    for (const auto& ch : children) hits += holds(*ch, b) ? 1 : 0;
    if (hits == 0) ++c.uncovered;
    if (hits > 1) ++c.overlapping;
    return true;
  });
  return c;
}

// ---- JSON ---------------------------------------------------------------------

json to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AtomSet>) {
          json a = json::array();
          for (const auto& e : x) a.push_back(e);
          return a;
        } else {
          return x;
        }
      },
      v);
}

Value value_from_json(const json& j, const VarDecl& decl) {
  auto bad = [&] { return std::invalid_argument("value of " + decl.name + " has the wrong type"); };
  switch (decl.type) {
    case Type::kBool:
      if (!j.is_boolean()) throw bad();
      return j.get<bool>();
    case Type::kInt:
      if (!j.is_number_integer()) throw bad();
      return j.get<std::int64_t>();
    case Type::kAtom:
      if (!j.is_string()) throw bad();
      return j.get<std::string>();
    case Type::kSet: {
      if (!j.is_array()) throw bad();
      AtomSet s;
      for (const auto& e : j) {
        if (!e.is_string()) throw bad();
        s.insert(e.get<std::string>());
      }
      return s;
    }
  }
  throw bad();
}

json to_json(const Suite& s) {
  json cases = json::array();
  for (const auto& c : s.cases) {
    json b = json::object();
    for (const auto& [k, v] : c.binding) b[k] = to_json(v);
    cases.push_back({{"leaf", c.leaf}, {"path", c.path}, {"binding", b}});
  }
  return {{"transition", s.transition}, {"tactics", s.tactics}, {"budget", s.budget}, {"cases", cases}};
}

Suite suite_from_json(const json& j, const TransitionSpec& spec) {
  try {
    Suite s;
    s.transition = j.at("transition").get<std::string>();
    if (s.transition != spec.name) {
      throw std::invalid_argument("suite is for " + s.transition + ", not " + spec.name);
    }
    s.tactics = j.at("tactics").get<std::vector<std::string>>();
    s.budget = j.at("budget").get<std::size_t>();
    for (const auto& c : j.at("cases")) {
      AbstractTestCase tc;
      tc.leaf = c.at("leaf").get<std::size_t>();
      tc.path = c.at("path").get<std::vector<std::string>>();
      const auto& b = c.at("binding");
      for (const auto& d : spec.vars) {
        if (!b.contains(d.name)) throw std::invalid_argument("case lacks variable " + d.name);
        tc.binding[d.name] = value_from_json(b[d.name], d);
      }
      if (b.size() != spec.vars.size()) throw std::invalid_argument("case binds undeclared variables");
      s.cases.push_back(std::move(tc));
    }
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed suite: ") + e.what());
  }
}

json to_json(const VerdictReport& r) {
  json results = json::array();
  for (const auto& c : r.results) {
    json obs = json::object();
    for (const auto& [k, v] : c.observed) obs[k] = to_json(v);
    results.push_back({{"case", c.index},
                       {"leaf", c.leaf},
                       {"verdict", c.passed ? "pass" : "fail"},
                       {"detail", c.detail},
                       {"observed", obs}});
  }
  return {{"transition", r.transition},
          {"sut", r.sut},
          {"passed", r.passed()},
          {"failed", r.failed()},
          {"results", results}};
}

}  // namespace mw::mbt
