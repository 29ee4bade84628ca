#pragma once

#include "erc/lang/source.hpp"

#include <gmpxx.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace erc::lang {

enum class Base { Integer, Real };

struct Sort {
  Base base = Base::Integer;
  bool array = false;
  std::int64_t length = 0;  // arrays only

  static Sort integer() { return {Base::Integer, false, 0}; }
  static Sort real() { return {Base::Real, false, 0}; }
  static Sort array_of(Base b, std::int64_t n) { return {b, true, n}; }

  bool is_integer() const { return !array && base == Base::Integer; }
  bool is_real() const { return !array && base == Base::Real; }
  Sort element() const { return {base, false, 0}; }

  bool operator==(const Sort&) const = default;

  std::string to_string() const {
    std::string s = base == Base::Integer ? "INTEGER" : "REAL";
    if (array) s += "[" + std::to_string(length) + "]";
    return s;
  }
};

enum class ExprKind {
  Int,     // integer literal; polymorphic until checked
  Rat,     // decimal literal, REAL only
  Var,
  Index,   // args[0][args[1]]
  Neg,
  Add,
  Sub,
  Mul,
  Scale,   // integer constant multiple: number * args[0]
  Div,
  Gt,      // partial on REAL, total on INTEGER
  Ge,      // INTEGER only
  Eq,      // INTEGER only
  Ne,      // INTEGER only
  And,
  Or,
  Not,
  Choose,
  Cond,    // args[0] ? args[1] : args[2]
  Call,
  Iota,
  Abs,
  Max,
};

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  ExprKind kind;
  Span span;
  mpq_class number;  // literals, Scale factor
  std::string name;  // Var, Call
  std::vector<ExprPtr> args;
  std::optional<Sort> sort;  // set by the checker

  static ExprPtr make(ExprKind k, Span s, std::vector<ExprPtr> args = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->span = std::move(s);
    e->args = std::move(args);
    return e;
  }
  static ExprPtr integer(const mpz_class& v, Span s) {
    auto e = make(ExprKind::Int, std::move(s));
    e->number = v;
    return e;
  }
  static ExprPtr var(std::string n, Span s) {
    auto e = make(ExprKind::Var, std::move(s));
    e->name = std::move(n);
    return e;
  }
};

/// Array lengths stay as expressions until CONST values are known.
struct TypeExpr {
  Base base = Base::Integer;
  ExprPtr length;  // null for scalars
  Span span;
};

struct Annotation {
  std::string key;   // pre, post, invariant, variant, epsilon
  std::string text;  // raw formula text
  Span span;
};

enum class StmtKind { Decl, Assign, Block, If, While, Return };

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  StmtKind kind;
  Span span;
  std::string name;  // Decl, Assign target
  TypeExpr type;     // Decl
  std::optional<Sort> sort;  // Decl: resolved type
  ExprPtr index;     // Assign to array element
  ExprPtr value;     // Decl initializer, Assign rhs, Return value, If/While guard
  StmtPtr then_branch, else_branch, body;
  std::vector<StmtPtr> stmts;  // Block
  std::vector<Annotation> annotations;  // While

  static StmtPtr make(StmtKind k, Span s) {
    auto st = std::make_shared<Stmt>();
    st->kind = k;
    st->span = std::move(s);
    return st;
  }
};

struct Param {
  TypeExpr type;
  std::string name;
  std::optional<Sort> sort;
};

struct FunctionDef {
  std::string name;
  Span span;
  TypeExpr result_type;
  std::optional<Sort> result;
  std::vector<Param> params;
  StmtPtr body;  // null for prototypes bound by the host
  std::vector<Annotation> annotations;  // pre / post

  bool is_prototype() const { return body == nullptr; }
  /// REAL-valued functions take a leading INTEGER precision parameter that
  /// call sites omit.
  bool takes_precision() const { return result_type.base == Base::Real; }
};

struct ConstDef {
  std::string name;
  ExprPtr value;
  Span span;
};

struct Program {
  std::vector<ConstDef> consts;
  std::vector<FunctionDef> functions;

  const FunctionDef* find(const std::string& name) const {
    for (const auto& f : functions)
      if (f.name == name) return &f;
    return nullptr;
  }
};

inline ExprPtr clone(const ExprPtr& e) {
  if (!e) return nullptr;
  auto c = std::make_shared<Expr>(*e);
  for (auto& a : c->args) a = clone(a);
  return c;
}

inline StmtPtr clone(const StmtPtr& s) {
  if (!s) return nullptr;
  auto c = std::make_shared<Stmt>(*s);
  c->type.length = clone(c->type.length);
  c->index = clone(c->index);
  c->value = clone(c->value);
  c->then_branch = clone(c->then_branch);
  c->else_branch = clone(c->else_branch);
  c->body = clone(c->body);
  for (auto& st : c->stmts) st = clone(st);
  return c;
}

/// Deep copy; checking annotates nodes in place.
inline Program clone(const Program& p) {
  Program c = p;
  for (auto& k : c.consts) k.value = clone(k.value);
  for (auto& f : c.functions) {
    f.result_type.length = clone(f.result_type.length);
    for (auto& prm : f.params) prm.type.length = clone(prm.type.length);
    f.body = clone(f.body);
  }
  return c;
}

}  // namespace erc::lang
