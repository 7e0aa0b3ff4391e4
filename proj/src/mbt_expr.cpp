#include "mw/mbt/expr.hpp"

#include <algorithm>
#include <sstream>

namespace mw::mbt {

namespace {

ExprPtr node(Op op, std::vector<ExprPtr> args) {
  return std::make_shared<const Expr>(Expr{op, false, {}, std::move(args)});
}

const char* type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "bool";
    case 1: return "int";
    case 2: return "atom";
    default: return "set";
  }
}

template <class T>
const T& as(const Value& v, const Expr& e) {
  if (const auto* p = std::get_if<T>(&v)) return *p;
  throw TypeError("ill-typed operand (" + std::string(type_name(v)) + ") in " + to_string(e));
}

bool is_atomic(Op op) {
  return op != Op::kNot && op != Op::kAnd && op != Op::kOr && op != Op::kImplies && op != Op::kConst;
}

ExprPtr nnf_impl(const ExprPtr& e, bool neg) {
  switch (e->op) {
    case Op::kAnd:
    case Op::kOr: {
      std::vector<ExprPtr> xs;
      for (const auto& a : e->args) xs.push_back(nnf_impl(a, neg));
      return (e->op == Op::kAnd) != neg ? and_(std::move(xs)) : or_(std::move(xs));
    }
    case Op::kImplies:
      return neg ? and_({nnf_impl(e->args[0], false), nnf_impl(e->args[1], true)})
                 : or_({nnf_impl(e->args[0], true), nnf_impl(e->args[1], false)});
    case Op::kNot:
      return nnf_impl(e->args[0], !neg);
    case Op::kConst:
      if (const auto* b = std::get_if<bool>(&e->value)) return lit(*b != neg);
      return e;
    default:
      return neg ? not_(e) : e;
  }
}

using Clauses = std::vector<std::vector<ExprPtr>>;

Clauses dnf_impl(const ExprPtr& e, std::size_t cap) {
  switch (e->op) {
    case Op::kOr: {
      Clauses out;
      for (const auto& a : e->args) {
        auto c = dnf_impl(a, cap);
        out.insert(out.end(), c.begin(), c.end());
        if (out.size() > cap) throw std::length_error("DNF exceeds " + std::to_string(cap) + " disjuncts");
      }
      return out;
    }
    case Op::kAnd: {
      Clauses out{{}};
      for (const auto& a : e->args) {
        auto c = dnf_impl(a, cap);
        Clauses next;
        for (const auto& left : out) {
          for (const auto& right : c) {
            auto merged = left;
            merged.insert(merged.end(), right.begin(), right.end());
            next.push_back(std::move(merged));
            if (next.size() > cap) throw std::length_error("DNF exceeds " + std::to_string(cap) + " disjuncts");
          }
        }
        out = std::move(next);
      }
      return out;
    }
    case Op::kConst:
      if (const auto* b = std::get_if<bool>(&e->value)) return *b ? Clauses{{}} : Clauses{};
      return {{e}};
    default:
      return {{e}};
  }
}

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, Atom>) {
          return x;
        } else {
          std::string s = "{";
          for (auto it = x.begin(); it != x.end(); ++it) s += (it == x.begin() ? "" : ",") + *it;
          return s + "}";
        }
      },
      v);
}

std::string to_string(const Binding& b) {
  std::string s;
  for (const auto& [k, v] : b) s += (s.empty() ? "" : ", ") + k + "=" + to_string(v);
  return s;
}

ExprPtr var(std::string name) {
  return std::make_shared<const Expr>(Expr{Op::kVar, false, std::move(name), {}});
}
ExprPtr lit(Value v) { return std::make_shared<const Expr>(Expr{Op::kConst, std::move(v), {}, {}}); }
ExprPtr atom(Atom a) { return lit(std::move(a)); }
ExprPtr integer(std::int64_t n) { return lit(n); }
ExprPtr atoms(AtomSet s) { return lit(std::move(s)); }
ExprPtr empty_set() { return lit(AtomSet{}); }
ExprPtr truth() { return lit(true); }
ExprPtr falsity() { return lit(false); }

ExprPtr not_(ExprPtr a) { return node(Op::kNot, {std::move(a)}); }
ExprPtr and_(std::vector<ExprPtr> xs) {
  if (xs.empty()) return truth();
  if (xs.size() == 1) return xs[0];
  return node(Op::kAnd, std::move(xs));
}
ExprPtr or_(std::vector<ExprPtr> xs) {
  if (xs.empty()) return falsity();
  if (xs.size() == 1) return xs[0];
  return node(Op::kOr, std::move(xs));
}
ExprPtr implies(ExprPtr a, ExprPtr b) { return node(Op::kImplies, {std::move(a), std::move(b)}); }
ExprPtr eq(ExprPtr a, ExprPtr b) { return node(Op::kEq, {std::move(a), std::move(b)}); }
ExprPtr ne(ExprPtr a, ExprPtr b) { return not_(eq(std::move(a), std::move(b))); }
ExprPtr in(ExprPtr x, ExprPtr s) { return node(Op::kIn, {std::move(x), std::move(s)}); }
ExprPtr subset(ExprPtr a, ExprPtr b) { return node(Op::kSubset, {std::move(a), std::move(b)}); }
ExprPtr lt(ExprPtr a, ExprPtr b) { return node(Op::kLt, {std::move(a), std::move(b)}); }
ExprPtr le(ExprPtr a, ExprPtr b) { return node(Op::kLe, {std::move(a), std::move(b)}); }
ExprPtr gt(ExprPtr a, ExprPtr b) { return lt(std::move(b), std::move(a)); }
ExprPtr ge(ExprPtr a, ExprPtr b) { return le(std::move(b), std::move(a)); }
ExprPtr union_(ExprPtr a, ExprPtr b) { return node(Op::kUnion, {std::move(a), std::move(b)}); }
ExprPtr diff(ExprPtr a, ExprPtr b) { return node(Op::kDiff, {std::move(a), std::move(b)}); }
ExprPtr inter(ExprPtr a, ExprPtr b) { return node(Op::kInter, {std::move(a), std::move(b)}); }
ExprPtr singleton(ExprPtr a) { return node(Op::kSingleton, {std::move(a)}); }
ExprPtr card(ExprPtr a) { return node(Op::kCard, {std::move(a)}); }

Value eval(const Expr& e, const Binding& b) {
  auto arg = [&](std::size_t i) { return eval(*e.args[i], b); };
  switch (e.op) {
    case Op::kConst:
      return e.value;
    case Op::kVar: {
      auto it = b.find(e.name);
      if (it == b.end()) throw TypeError("unbound variable " + e.name);
      return it->second;
    }
    case Op::kNot:
      return !as<bool>(arg(0), e);
    case Op::kAnd:
      for (const auto& a : e.args) {
        if (!as<bool>(eval(*a, b), e)) return false;
      }
      return true;
    case Op::kOr:
      for (const auto& a : e.args) {
        if (as<bool>(eval(*a, b), e)) return true;
      }
      return false;
    case Op::kImplies:
      return !as<bool>(arg(0), e) || as<bool>(arg(1), e);
    case Op::kEq: {
      Value x = arg(0), y = arg(1);
      if (x.index() != y.index()) {
        throw TypeError(std::string("comparing ") + type_name(x) + " with " + type_name(y) + " in " + to_string(e));
      }
      return x == y;
    }
    case Op::kIn:
      return as<AtomSet>(arg(1), e).count(as<Atom>(arg(0), e)) != 0;
    case Op::kSubset: {
      Value x = arg(0), y = arg(1);
      const auto& xs = as<AtomSet>(x, e);
      const auto& ys = as<AtomSet>(y, e);
      return std::includes(ys.begin(), ys.end(), xs.begin(), xs.end());
    }
    case Op::kLt:
      return as<std::int64_t>(arg(0), e) < as<std::int64_t>(arg(1), e);
    case Op::kLe:
      return as<std::int64_t>(arg(0), e) <= as<std::int64_t>(arg(1), e);
    case Op::kUnion:
    case Op::kDiff:
    case Op::kInter: {
      Value x = arg(0), y = arg(1);
      const auto& xs = as<AtomSet>(x, e);
      const auto& ys = as<AtomSet>(y, e);
      AtomSet out;
      auto ins = std::inserter(out, out.end());
      if (e.op == Op::kUnion) std::set_union(xs.begin(), xs.end(), ys.begin(), ys.end(), ins);
      if (e.op == Op::kDiff) std::set_difference(xs.begin(), xs.end(), ys.begin(), ys.end(), ins);
      if (e.op == Op::kInter) std::set_intersection(xs.begin(), xs.end(), ys.begin(), ys.end(), ins);
      return out;
    }
    case Op::kSingleton:
      return AtomSet{as<Atom>(arg(0), e)};
    case Op::kCard:
      return static_cast<std::int64_t>(as<AtomSet>(arg(0), e).size());
  }
  throw TypeError("unknown operator");
}

bool holds(const Expr& e, const Binding& b) {
  Value v = eval(e, b);
  if (const auto* p = std::get_if<bool>(&v)) return *p;
  throw TypeError("not a predicate: " + to_string(e));
}

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  if (e.op == Op::kVar) out.insert(e.name);
  for (const auto& a : e.args) {
    auto sub = free_vars(*a);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

std::string to_string(const Expr& e) {
  auto s = [&](std::size_t i) { return to_string(*e.args[i]); };
  auto join = [&](const char* sep) {
    std::string out = "(";
    for (std::size_t i = 0; i < e.args.size(); ++i) out += (i ? sep : "") + s(i);
    return out + ")";
  };
  switch (e.op) {
    case Op::kConst: return to_string(e.value);
    case Op::kVar: return e.name;
    case Op::kNot:
      if (e.args[0]->op == Op::kEq || e.args[0]->op == Op::kIn) {
        const auto& inner = *e.args[0];
        return to_string(*inner.args[0]) + (inner.op == Op::kEq ? " != " : " notin ") +
               to_string(*inner.args[1]);
      }
      return "not " + (is_atomic(e.args[0]->op) ? "(" + s(0) + ")" : s(0));
    case Op::kAnd: return join(" and ");
    case Op::kOr: return join(" or ");
    case Op::kImplies: return "(" + s(0) + " => " + s(1) + ")";
    case Op::kEq: return s(0) + " = " + s(1);
    case Op::kIn: return s(0) + " in " + s(1);
    case Op::kSubset: return s(0) + " subset " + s(1);
    case Op::kLt: return s(0) + " < " + s(1);
    case Op::kLe: return s(0) + " <= " + s(1);
    case Op::kUnion: return "(" + s(0) + " union " + s(1) + ")";
    case Op::kDiff: return "(" + s(0) + " \\ " + s(1) + ")";
    case Op::kInter: return "(" + s(0) + " inter " + s(1) + ")";
    case Op::kSingleton: return "{" + s(0) + "}";
    case Op::kCard: return "#" + s(0);
  }
  return "?";
}

ExprPtr nnf(const ExprPtr& e) { return nnf_impl(e, false); }

std::vector<ExprPtr> dnf(const ExprPtr& e, std::size_t max_disjuncts) {
  std::vector<ExprPtr> out;
  for (auto& lits : dnf_impl(nnf(e), max_disjuncts)) out.push_back(and_(std::move(lits)));
  return out;
}

}  // namespace mw::mbt
