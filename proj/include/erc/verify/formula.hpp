#pragma once

#include <gmpxx.h>

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace erc::verify {

/// Sorts of the assertion language: two scalar sorts, and arrays viewed as
/// functions from integers.
enum class VSort { Int, Real, IntArray, RealArray };

inline const char* sort_name(VSort s) {
  switch (s) {
    case VSort::Int: return "INTEGER";
    case VSort::Real: return "REAL";
    case VSort::IntArray: return "INTEGER[]";
    case VSort::RealArray: return "REAL[]";
  }
  return "?";
}

class VerifyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormulaSortError : public VerifyError {
 public:
  using VerifyError::VerifyError;
};

enum class TermKind { Var, Const, Add, Sub, Mul, Div, Neg, Iota, App, Read, Abs, Max, ToReal };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  VSort sort;  // Int or Real
  std::string name;  // Var, App (function symbol), Read (array)
  mpq_class value;   // Const
  std::vector<TermPtr> args;
};

namespace term {

inline TermPtr make(TermKind k, VSort s, std::vector<TermPtr> args = {}, std::string name = {}) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->sort = s;
  t->args = std::move(args);
  t->name = std::move(name);
  return t;
}

inline TermPtr var(std::string name, VSort s) { return make(TermKind::Var, s, {}, std::move(name)); }

inline TermPtr constant(const mpq_class& v, VSort s) {
  auto t = std::make_shared<Term>();
  t->kind = TermKind::Const;
  t->sort = s;
  t->value = v;
  t->value.canonicalize();
  return t;
}

inline TermPtr integer(long v) { return constant(mpq_class(v), VSort::Int); }
inline TermPtr real(const mpq_class& v) { return constant(v, VSort::Real); }

inline TermPtr to_real(const TermPtr& t) {
  if (t->sort == VSort::Real) return t;
  if (t->kind == TermKind::Const) return constant(t->value, VSort::Real);
  return make(TermKind::ToReal, VSort::Real, {t});
}

// Binary arithmetic; an INTEGER operand meeting a REAL one is coerced.
inline TermPtr binary(TermKind k, TermPtr a, TermPtr b) {
  VSort s = (a->sort == VSort::Real || b->sort == VSort::Real || k == TermKind::Div) ? VSort::Real : VSort::Int;
  if (s == VSort::Real) {
    a = to_real(a);
    b = to_real(b);
  }
  return make(k, s, {std::move(a), std::move(b)});
}

inline TermPtr add(TermPtr a, TermPtr b) { return binary(TermKind::Add, std::move(a), std::move(b)); }
inline TermPtr sub(TermPtr a, TermPtr b) { return binary(TermKind::Sub, std::move(a), std::move(b)); }
inline TermPtr mul(TermPtr a, TermPtr b) { return binary(TermKind::Mul, std::move(a), std::move(b)); }
inline TermPtr div(TermPtr a, TermPtr b) { return binary(TermKind::Div, std::move(a), std::move(b)); }
inline TermPtr max(TermPtr a, TermPtr b) { return binary(TermKind::Max, std::move(a), std::move(b)); }
inline TermPtr neg(TermPtr a) { return make(TermKind::Neg, a->sort, {a}); }
inline TermPtr abs(TermPtr a) { return make(TermKind::Abs, a->sort, {a}); }

inline TermPtr iota(TermPtr n) {
  if (n->sort != VSort::Int) throw FormulaSortError("iota expects an INTEGER argument");
  return make(TermKind::Iota, VSort::Real, {std::move(n)});
}

inline TermPtr app(std::string f, std::vector<TermPtr> args) {
  for (auto& a : args) a = to_real(a);
  return make(TermKind::App, VSort::Real, std::move(args), std::move(f));
}

inline TermPtr read(std::string array, VSort elem, TermPtr index) {
  if (index->sort != VSort::Int) throw FormulaSortError("array index must be INTEGER");
  return make(TermKind::Read, elem, {std::move(index)}, std::move(array));
}

}  // namespace term

enum class FKind { True, False, Cmp, Cont, Uniq, Not, And, Or, Implies, Forall, Exists, Exists1 };
enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

inline const char* op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

inline CmpOp negate(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Gt: return CmpOp::Le;
  }
  return op;
}

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FKind kind;
  CmpOp op = CmpOp::Eq;        // Cmp
  std::vector<TermPtr> terms;  // Cmp: lhs, rhs; Uniq: a, b
  std::string name;            // Cont/Uniq: function symbol; quantifiers: bound variable
  VSort bound_sort = VSort::Real;
  std::vector<FormulaPtr> parts;  // connectives and quantifier body
  bool split = false;  // And/Implies built by a branching wp rule: VC generation may split here
};

namespace fm {

inline std::shared_ptr<Formula> make(FKind k, std::vector<FormulaPtr> parts = {}) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->parts = std::move(parts);
  return f;
}

inline FormulaPtr truth() { return make(FKind::True); }
inline FormulaPtr falsity() { return make(FKind::False); }
inline bool is_true(const FormulaPtr& f) { return f->kind == FKind::True; }
inline bool is_false(const FormulaPtr& f) { return f->kind == FKind::False; }

inline FormulaPtr cmp(CmpOp op, TermPtr a, TermPtr b) {
  if (a->sort == VSort::Real || b->sort == VSort::Real) {
    a = term::to_real(a);
    b = term::to_real(b);
  }
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Cmp;
  f->op = op;
  f->terms = {std::move(a), std::move(b)};
  return f;
}

inline FormulaPtr cont(std::string fn) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Cont;
  f->name = std::move(fn);
  return f;
}

inline FormulaPtr uniq(std::string fn, TermPtr a, TermPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FKind::Uniq;
  f->name = std::move(fn);
  f->terms = {term::to_real(std::move(a)), term::to_real(std::move(b))};
  return f;
}

inline FormulaPtr negation(FormulaPtr a) {
  if (is_true(a)) return falsity();
  if (is_false(a)) return truth();
  return make(FKind::Not, {std::move(a)});
}

// Smart constructors drop units and absorb constants; `split` marks a
// conjunction produced by a branching rule.
inline FormulaPtr conj(std::vector<FormulaPtr> parts, bool split = false) {
  std::vector<FormulaPtr> kept;
  for (auto& p : parts) {
    if (is_false(p)) return falsity();
    if (!is_true(p)) kept.push_back(std::move(p));
  }
  if (kept.empty()) return truth();
  if (kept.size() == 1) return kept[0];
  auto f = make(FKind::And, std::move(kept));
  f->split = split;
  return f;
}

inline FormulaPtr disj(std::vector<FormulaPtr> parts) {
  std::vector<FormulaPtr> kept;
  for (auto& p : parts) {
    if (is_true(p)) return truth();
    if (!is_false(p)) kept.push_back(std::move(p));
  }
  if (kept.empty()) return falsity();
  if (kept.size() == 1) return kept[0];
  return make(FKind::Or, std::move(kept));
}

inline FormulaPtr conj2(FormulaPtr a, FormulaPtr b) { return conj({std::move(a), std::move(b)}); }
inline FormulaPtr disj2(FormulaPtr a, FormulaPtr b) { return disj({std::move(a), std::move(b)}); }

inline FormulaPtr implies(FormulaPtr a, FormulaPtr b, bool split = false) {
  if (is_true(a)) return b;
  if (is_false(a) || is_true(b)) return truth();
  auto f = make(FKind::Implies, {std::move(a), std::move(b)});
  f->split = split;
  return f;
}

inline FormulaPtr quant(FKind k, std::string var, VSort s, FormulaPtr body) {
  auto f = make(k, {std::move(body)});
  f->name = std::move(var);
  f->bound_sort = s;
  return f;
}

inline FormulaPtr forall(std::string var, VSort s, FormulaPtr body) {
  return quant(FKind::Forall, std::move(var), s, std::move(body));
}
inline FormulaPtr exists(std::string var, VSort s, FormulaPtr body) {
  return quant(FKind::Exists, std::move(var), s, std::move(body));
}

}  // namespace fm

// ---- free variables and substitution ----

using SortMap = std::map<std::string, VSort>;

inline void free_vars(const TermPtr& t, SortMap& out) {
  if (t->kind == TermKind::Var) out[t->name] = t->sort;
  if (t->kind == TermKind::Read) out[t->name] = t->sort == VSort::Int ? VSort::IntArray : VSort::RealArray;
  for (const auto& a : t->args) free_vars(a, out);
}

inline void free_vars(const FormulaPtr& f, SortMap& out) {
  for (const auto& t : f->terms) free_vars(t, out);
  if (f->kind == FKind::Forall || f->kind == FKind::Exists || f->kind == FKind::Exists1) {
    SortMap inner;
    free_vars(f->parts[0], inner);
    inner.erase(f->name);
    out.insert(inner.begin(), inner.end());
    return;
  }
  for (const auto& p : f->parts) free_vars(p, out);
}

inline SortMap free_vars(const FormulaPtr& f) {
  SortMap m;
  free_vars(f, m);
  return m;
}

inline bool occurs(const TermPtr& t, const std::string& x) {
  if ((t->kind == TermKind::Var || t->kind == TermKind::Read) && t->name == x) return true;
  for (const auto& a : t->args)
    if (occurs(a, x)) return true;
  return false;
}

inline bool occurs(const FormulaPtr& f, const std::string& x) { return free_vars(f).count(x) > 0; }

/// t[e/x]
inline TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& e) {
  if (t->kind == TermKind::Var && t->name == x) {
    if (t->sort == VSort::Real) return term::to_real(e);
    if (e->sort != VSort::Int) throw FormulaSortError("substituting a REAL term for INTEGER variable " + x);
    return e;
  }
  if (t->args.empty()) return t;
  bool changed = false;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) {
    args.push_back(substitute(a, x, e));
    changed = changed || args.back() != a;
  }
  if (!changed) return t;
  auto c = std::make_shared<Term>(*t);
  c->args = std::move(args);
  return c;
}

inline std::string fresh_name(const std::string& base, const std::function<bool(const std::string&)>& taken) {
  for (int i = 1;; ++i) {
    std::string n = base + "_" + std::to_string(i);
    if (!taken(n)) return n;
  }
}

/// Capture-avoiding substitution q[e/x].
inline FormulaPtr substitute(const FormulaPtr& q, const std::string& x, const TermPtr& e) {
  switch (q->kind) {
    case FKind::True:
    case FKind::False:
    case FKind::Cont: return q;
    case FKind::Cmp:
    case FKind::Uniq: {
      auto c = std::make_shared<Formula>(*q);
      for (auto& t : c->terms) t = substitute(t, x, e);
      return c;
    }
    case FKind::Forall:
    case FKind::Exists:
    case FKind::Exists1: {
      if (q->name == x) return q;
      SortMap fv;
      free_vars(e, fv);
      FormulaPtr body = q->parts[0];
      std::string bound = q->name;
      if (fv.count(bound) && occurs(body, x)) {
        SortMap in_body = free_vars(body);
        std::string renamed = fresh_name(bound, [&](const std::string& n) { return fv.count(n) || in_body.count(n) || n == x; });
        TermPtr v = term::var(renamed, q->bound_sort == VSort::Int ? VSort::Int : VSort::Real);
        body = substitute(body, bound, v);
        bound = renamed;
      }
      auto c = std::make_shared<Formula>(*q);
      c->name = bound;
      c->parts = {substitute(body, x, e)};
      return c;
    }
    default: {
      auto c = std::make_shared<Formula>(*q);
      for (auto& p : c->parts) p = substitute(p, x, e);
      return c;
    }
  }
}

/// Renames an array symbol (arrays are never substituted by terms).
inline TermPtr rename_array(const TermPtr& t, const std::string& from, const std::string& to) {
  auto c = std::make_shared<Term>(*t);
  if (c->kind == TermKind::Read && c->name == from) c->name = to;
  for (auto& a : c->args) a = rename_array(a, from, to);
  return c;
}

/// Universal closure over all free variables, in name order.
inline FormulaPtr universal_closure(const FormulaPtr& f) {
  SortMap fv = free_vars(f);
  FormulaPtr out = f;
  for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = fm::forall(it->first, it->second, out);
  return out;
}

}  // namespace erc::verify
