#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mw::mbt {

using Atom = std::string;
using AtomSet = std::set<Atom>;

/// Constant of the abstract domain: boolean, integer, atom or finite set of atoms.
using Value = std::variant<bool, std::int64_t, Atom, AtomSet>;

std::string to_string(const Value& v);

/// Total binding of variable names to constants.
using Binding = std::map<std::string, Value>;

std::string to_string(const Binding& b);

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op {
  kConst,
  kVar,
  kNot,
  kAnd,
  kOr,
  kImplies,
  kEq,
  kIn,
  kSubset,
  kLt,
  kLe,
  kUnion,
  kDiff,
  kInter,
  kSingleton,
  kCard,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Term or predicate over declared variables. Immutable once built.
struct Expr {
  Op op;
  Value value;       // kConst
  std::string name;  // kVar
  std::vector<ExprPtr> args;
};

// ---- builders -----------------------------------------------------------------

ExprPtr var(std::string name);
ExprPtr lit(Value v);
ExprPtr atom(Atom a);
ExprPtr integer(std::int64_t n);
ExprPtr atoms(AtomSet s);
ExprPtr empty_set();
ExprPtr truth();
ExprPtr falsity();

ExprPtr not_(ExprPtr a);
ExprPtr and_(std::vector<ExprPtr> xs);
ExprPtr or_(std::vector<ExprPtr> xs);
ExprPtr implies(ExprPtr a, ExprPtr b);
ExprPtr eq(ExprPtr a, ExprPtr b);
ExprPtr ne(ExprPtr a, ExprPtr b);
ExprPtr in(ExprPtr x, ExprPtr s);
ExprPtr subset(ExprPtr a, ExprPtr b);
ExprPtr lt(ExprPtr a, ExprPtr b);
ExprPtr le(ExprPtr a, ExprPtr b);
ExprPtr gt(ExprPtr a, ExprPtr b);
ExprPtr ge(ExprPtr a, ExprPtr b);
ExprPtr union_(ExprPtr a, ExprPtr b);
ExprPtr diff(ExprPtr a, ExprPtr b);
ExprPtr inter(ExprPtr a, ExprPtr b);
ExprPtr singleton(ExprPtr a);
ExprPtr card(ExprPtr a);

// ---- semantics ----------------------------------------------------------------

/// Throws TypeError on ill-typed operands or an unbound variable.
Value eval(const Expr& e, const Binding& b);
bool holds(const Expr& e, const Binding& b);

std::set<std::string> free_vars(const Expr& e);
std::string to_string(const Expr& e);

/// Negation normal form: no implications, negations only on atomic predicates.
ExprPtr nnf(const ExprPtr& e);

/// Disjuncts of the disjunctive normal form; each is a conjunction of literals.
/// Throws std::length_error beyond `max_disjuncts`.
std::vector<ExprPtr> dnf(const ExprPtr& e, std::size_t max_disjuncts = 4096);

}  // namespace mw::mbt
