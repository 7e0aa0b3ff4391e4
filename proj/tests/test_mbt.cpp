#include <doctest.h>

#include "mbt_oracle.hpp"
#include "mw/mbt/specs.hpp"

using namespace mw;
using namespace mw::mbt;

namespace {

Binding bind(std::initializer_list<std::pair<const std::string, Value>> xs) { return Binding(xs); }

TransitionSpec tiny() {
  TransitionSpec s;
  s.name = "tiny";
  s.vars = {atom_var("x", Role::kInput, {"a", "b"}), set_var("S", Role::kState, {"a", "b"}),
            int_var("n", Role::kInput, 0, 3)};
  s.outputs = {bool_var("ok", Role::kOutput)};
  s.pre = truth();
  s.post = eq(var("ok"), truth());
  return s;
}

std::size_t count_sat(const TransitionSpec& spec, const ExprPtr& e) {
  std::size_t n = 0;
  for_each_binding(spec, [&](const Binding& b) {
    n += holds(*e, b) ? 1 : 0;
    return true;
  });
  return n;
}

}  // namespace

TEST_CASE("expr: evaluation and printing") {
  auto e = and_({in(var("x"), var("S")), lt(card(var("S")), integer(2))});
  CHECK(holds(*e, bind({{"x", Atom("a")}, {"S", AtomSet{"a"}}})));
  CHECK_FALSE(holds(*e, bind({{"x", Atom("a")}, {"S", AtomSet{"a", "b"}}})));
  CHECK(to_string(*e) == "(x in S and #S < 2)");
  CHECK(to_string(*ne(var("x"), atom("b"))) == "x != b");
  CHECK(to_string(*not_(in(var("x"), var("S")))) == "x notin S");
  CHECK(std::get<AtomSet>(eval(*diff(atoms({"a", "b"}), singleton(atom("a"))), {})) == AtomSet{"b"});
  CHECK(std::get<AtomSet>(eval(*inter(atoms({"a", "b"}), atoms({"b", "c"})), {})) == AtomSet{"b"});
  CHECK(holds(*subset(empty_set(), atoms({"a"})), {}));
  CHECK_THROWS_AS(eval(*var("y"), {}), TypeError);
  CHECK_THROWS_AS(eval(*eq(integer(1), atom("a")), {}), TypeError);
  CHECK_THROWS_AS(holds(*integer(1), {}), TypeError);
  CHECK(free_vars(*e) == std::set<std::string>{"S", "x"});
}

TEST_CASE("expr: nnf and dnf preserve meaning over a finite domain") {
  auto spec = tiny();
  auto x = var("x"), S = var("S"), n = var("n");
  std::vector<ExprPtr> samples{
      implies(in(x, S), lt(n, integer(2))),
      not_(and_({or_({eq(x, atom("a")), eq(n, integer(0))}), not_(in(x, S))})),
      or_({and_({eq(S, empty_set()), gt(n, integer(1))}), not_(implies(eq(x, atom("b")), le(n, integer(1))))}),
      truth(),
      falsity(),
  };
  for (const auto& e : samples) {
    auto d = or_(dnf(e));
    auto m = nnf(e);
    for_each_binding(spec, [&](const Binding& b) {
      CHECK(holds(*e, b) == holds(*m, b));
      CHECK(holds(*e, b) == holds(*d, b));
      return true;
    });
  }
  CHECK(dnf(falsity()).empty());
  CHECK_THROWS_AS(dnf(and_({or_({x, S}), or_({x, S}), or_({x, S})}), 4), std::length_error);
}

TEST_CASE("domains: set domains are ordered by size then lexicographically") {
  auto d = set_var("S", Role::kState, {"a", "b", "c"});
  REQUIRE(d.domain.size() == 8);
  CHECK(std::get<AtomSet>(d.domain[0]).empty());
  CHECK(std::get<AtomSet>(d.domain[1]) == AtomSet{"a"});
  CHECK(std::get<AtomSet>(d.domain[4]) == AtomSet{"a", "b"});
  CHECK(std::get<AtomSet>(d.domain[7]) == AtomSet{"a", "b", "c"});
  CHECK(tiny().space() == 2 * 4 * 4);
  CHECK_THROWS_AS(int_var("v", Role::kInput, 3, 2), SpecError);
  auto bad = tiny();
  bad.pre = eq(var("zz"), integer(1));
  CHECK_THROWS_AS(bad.check(), SpecError);
}

TEST_CASE("vis: root characteristic is the precondition") {
  auto spec = rcv_addr_spec();
  auto t = vis(spec);
  CHECK(t.nodes().size() == 1);
  CHECK(t.node(0).characteristic == spec.pre);
  CHECK(to_string(*t.effective(0)) == "(dest = this and kind = addr)");

  auto trivial = tiny();
  CHECK(to_string(*vis(trivial).node(0).characteristic) == "true");

  auto never = tiny();
  never.pre = falsity();
  auto s = make_suite(never, {Tactic::parse("set-extension:S")});
  CHECK(s.cases.empty());
}

TEST_CASE("tactics: labels, children and mismatches") {
  auto spec = rcv_addr_spec();
  auto t = vis(spec);
  auto kids = t.apply(0, Tactic::parse("set-extension:asm"));
  CHECK(kids.size() == 3);
  auto grand = t.apply(kids[1], Tactic::parse("membership:origin:as"));
  CHECK(grand.size() == 2);
  // Grandchild effective predicate = Pre and P^a and P^b.
  CHECK(to_string(*t.effective(grand[0])) == "(dest = this and kind = addr and #asm = 1 and origin in as)");
  CHECK(t.path(grand[1]) == std::vector<std::string>{"vis", "set-extension:asm", "membership:origin:as"});

  for (const auto& label : {"dnf", "set-extension:as", "boundary:n", "membership:x:S", "free-type:x"}) {
    CHECK(Tactic::parse(label).label() == label);
  }
  CHECK_THROWS_AS(Tactic::parse("wobble:x"), std::invalid_argument);
  CHECK_THROWS_AS(Tactic::parse("membership:x"), std::invalid_argument);
  CHECK_THROWS_AS(Tactic::parse("boundary"), std::invalid_argument);

  CHECK_THROWS_AS(Tactic::parse("set-extension:origin").partition(spec, spec.pre), TacticMismatch);
  CHECK_THROWS_AS(Tactic::parse("boundary:as").partition(spec, spec.pre), TacticMismatch);
  CHECK_THROWS_AS(Tactic::parse("membership:as:origin").partition(spec, spec.pre), TacticMismatch);
  CHECK_THROWS_AS(Tactic::parse("set-extension:enabled").partition(spec, spec.pre), TacticMismatch);
  CHECK_THROWS_AS(Tactic::parse("free-type:nobody").partition(spec, spec.pre), TacticMismatch);

  auto v = validate_transaction_spec();
  CHECK(Tactic::parse("boundary:nout").partition(v, v.pre).size() == 3);
  CHECK(Tactic::parse("free-type:tamper").partition(v, v.pre).size() == 5);
  auto one = tiny();
  one.vars[2] = int_var("n", Role::kInput, 2, 2);
  CHECK(Tactic::parse("boundary:n").partition(one, one.pre).size() == 1);
}

TEST_CASE("partition soundness for every catalog tactic on the shipped specs") {
  for (const auto& name : transitions()) {
    auto spec = spec_for(name);
    for (const auto& t : catalog(spec)) {
      auto kids = t.partition(spec, spec.pre);
      auto pc = check_partition(spec, spec.pre, kids);
      CHECK_MESSAGE(pc.ok(), name << " " << t.label() << ": uncovered " << pc.uncovered << ", overlapping "
                                  << pc.overlapping);
      CHECK(pc.parent_bindings > 0);
    }
  }
  // Deeper: each tactic below a non-trivial child.
  auto spec = rcv_addr_spec();
  auto t = vis(spec);
  auto kids = t.apply(0, Tactic::parse("set-extension:as"));
  for (const auto& tac : catalog(spec)) {
    auto parent = t.effective(kids[2]);
    CHECK(check_partition(spec, parent, tac.partition(spec, parent)).ok());
  }
}

TEST_CASE("monotonicity: children never enlarge their parent") {
  auto spec = validate_transaction_spec();
  auto t = vis(spec);
  for (const auto& label : {"free-type:tamper", "boundary:nout", "dnf"}) t.apply_to_leaves(Tactic::parse(label));
  for (const auto& n : t.nodes()) {
    if (!n.parent) continue;
    auto child = t.effective(n.id), parent = t.effective(*n.parent);
    CHECK(count_sat(spec, child) <= count_sat(spec, parent));
    for_each_binding(spec, [&](const Binding& b) {
      if (holds(*child, b)) CHECK(holds(*parent, b));
      return true;
    });
  }
}

TEST_CASE("prune: contradictions go, witnesses stay, budgets bite") {
  auto spec = tiny();
  auto t = vis(spec);
  auto kids = t.apply(0, Tactic::parse("set-extension:S"));
  auto grand = t.apply(kids[0], Tactic::parse("membership:x:S"));  // x in S and S = {} is contradictory
  auto stats = prune(t, 1000);
  CHECK(stats.leaves == 4);
  CHECK(stats.satisfiable == 3);
  CHECK(t.node(grand[0]).removed);
  CHECK(t.node(grand[0]).status == TreeNode::Status::kUnsatisfiable);
  CHECK_FALSE(t.node(grand[1]).removed);
  CHECK(*t.node(grand[1]).witness == bind({{"x", Atom("a")}, {"S", AtomSet{}}, {"n", std::int64_t{0}}}));
  auto cases = generate_cases(t);
  CHECK(cases.size() == 3);
  for (const auto& c : cases) CHECK(case_valid(t, c));

  // A fully true tree is unchanged.
  auto all = vis(spec);
  all.apply_to_leaves(Tactic::parse("free-type:x"));
  auto before = all.nodes().size();
  auto s2 = prune(all);
  CHECK(s2.removed == 0);
  CHECK(all.nodes().size() == before);
  CHECK(all.leaves().size() == 2);

  // A parent whose children all die goes too.
  auto dead = vis(spec);
  auto k = dead.apply(0, Tactic::parse("set-extension:S"));
  auto g = dead.apply(k[0], Tactic::parse("membership:x:S"));
  dead.apply(g[0], Tactic::parse("free-type:x"));
  auto s3 = prune(dead);
  CHECK(dead.node(g[0]).removed);
  CHECK_FALSE(dead.node(g[1]).removed);
  CHECK(s3.removed == 3);

  auto big = vis(rcv_addr_spec());
  big.apply_to_leaves(Tactic::parse("set-extension:as"));
  try {
    prune(big, 100);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(std::string(e.what()).find("leaf 1") != std::string::npos);
  }
  CHECK_THROWS_AS(generate_cases(big), std::logic_error);
}

TEST_CASE("prune agrees with the independent evaluator on random small trees") {
  std::mt19937_64 rng(2024);
  std::size_t removed = 0, kept = 0;
  for (int round = 0; round < 100; ++round) {
    auto spec = spec_for(transitions()[rng() % 3]);
    auto tree = test::oracle::random_tree(spec, rng, 3);
    auto leaves = tree.leaves();
    std::vector<std::optional<Binding>> expected;
    for (auto id : leaves) expected.push_back(test::oracle::solve(spec, test::oracle::path_conjuncts(tree, id)));
    prune(tree, 1'000'000, round % 2 ? 4 : 1);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      const auto& n = tree.node(leaves[k]);
      REQUIRE(n.removed == !expected[k].has_value());
      if (expected[k]) {
        CHECK(*n.witness == *expected[k]);
        ++kept;
      } else {
        ++removed;
      }
    }
  }
  // Both outcomes were exercised.
  CHECK(removed > 0);
  CHECK(kept > 0);
}

TEST_CASE("parallel pruning matches sequential pruning") {
  auto spec = rcv_addr_spec();
  auto a = make_suite(spec, default_schedule("rcv_addr"), 1'000'000, 1);
  auto b = make_suite(spec, default_schedule("rcv_addr"), 1'000'000, 8);
  CHECK(to_json(a) == to_json(b));
}

TEST_CASE("run_suite: the reference model conforms to every shipped spec") {
  for (const auto& name : transitions()) {
    auto spec = spec_for(name);
    auto suite = make_suite(spec, default_schedule(name));
    CHECK(suite.cases.size() > 3);
    auto sut = make_adapter(name, "model");
    auto report = run_suite(spec, suite.cases, *sut);
    CHECK_MESSAGE(report.failed() == 0, name << ": " << to_json(report).dump());
    CHECK(report.passed() == suite.cases.size());
  }
}

TEST_CASE("run_suite: every shipped mutant is killed") {
  for (const auto& name : transitions()) {
    auto spec = spec_for(name);
    auto suite = make_suite(spec, default_schedule(name));
    for (const auto& sut : suts(name)) {
      if (sut == "model") continue;
      auto report = run_suite(spec, suite.cases, *make_adapter(name, sut));
      CHECK_MESSAGE(report.failed() >= 1, name << "/" << sut);
    }
  }
}

TEST_CASE("run_suite: dropping the relay is caught once 'as' is split by extension") {
  auto spec = rcv_addr_spec();
  auto suite = make_suite(spec, {Tactic::parse("set-extension:as")});
  CHECK(suite.cases.size() == 3);
  auto report = run_suite(spec, suite.cases, *make_adapter("rcv_addr", "no-relay"));
  CHECK(report.failed() == 2);
  CHECK(report.results[0].passed);
}

TEST_CASE("run_suite: crashes and missing outputs are failures, and the suite goes on") {
  struct Crashy : SutAdapter {
    int calls = 0;
    std::string name() const override { return "crashy"; }
    Binding execute(const Binding&) override {
      if (++calls == 1) throw std::runtime_error("boom");
      return {{"verdict", Atom("valid")}};
    }
  };
  struct Mute : SutAdapter {
    std::string name() const override { return "mute"; }
    Binding execute(const Binding&) override { return {}; }
  };
  auto spec = validate_transaction_spec();
  auto suite = make_suite(spec, {Tactic::parse("free-type:tamper")});
  Crashy crashy;
  auto r = run_suite(spec, suite.cases, crashy);
  CHECK(r.results.size() == suite.cases.size());
  CHECK(r.results[0].detail == "crash: boom");
  CHECK(crashy.calls == static_cast<int>(suite.cases.size()));
  Mute mute;
  auto m = run_suite(spec, suite.cases, mute);
  CHECK(m.passed() == 0);
  CHECK(m.results[0].detail.find("verdict") != std::string::npos);
  CHECK(run_suite(spec, {}, mute).results.empty());
}

TEST_CASE("suite and report JSON round trip") {
  auto spec = validate_transaction_spec();
  auto suite = make_suite(spec, default_schedule("validate_transaction"));
  auto j = to_json(suite);
  auto back = suite_from_json(json::parse(j.dump()), spec);
  CHECK(to_json(back) == j);
  CHECK_THROWS_AS(suite_from_json(j, rcv_addr_spec()), std::invalid_argument);
  auto broken = j;
  broken["cases"][0]["binding"]["nout"] = "two";
  CHECK_THROWS_AS(suite_from_json(broken, spec), std::invalid_argument);
  broken = j;
  broken["cases"][0]["binding"].erase("ins");
  CHECK_THROWS_AS(suite_from_json(broken, spec), std::invalid_argument);

  auto report = run_suite(spec, back.cases, *make_adapter("validate_transaction", "skip-range"));
  auto rj = to_json(report);
  CHECK(rj["sut"] == "skip-range");
  CHECK(rj["failed"].get<std::size_t>() == report.failed());
  CHECK(rj["results"].size() == back.cases.size());
  CHECK_THROWS_AS(make_adapter("validate_transaction", "nope"), std::invalid_argument);
  CHECK_THROWS_AS(spec_for("rcv_teleport"), std::invalid_argument);
}
