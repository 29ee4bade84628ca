#pragma once

#include "erc/lang/ast.hpp"

namespace erc::lang {

namespace detail {

inline ExprPtr typed(ExprPtr e) {
  e->sort = Sort::integer();
  return e;
}

inline StmtPtr assign_index(const StmtPtr& target, long k) {
  auto s = Stmt::make(StmtKind::Assign, target->span);
  s->name = target->name;
  s->index = target->index;
  s->value = typed(Expr::integer(mpz_class(k), target->span));
  return s;
}

inline StmtPtr in_block(StmtPtr s) {
  auto b = Stmt::make(StmtKind::Block, s->span);
  b->stmts.push_back(std::move(s));
  return b;
}

// x := choose(a_0..a_{n-1})  ==>  IF choose(a_0..a_{n-1}) = n-1 THEN x := n-1 ELSE <same for n-1 branches>
inline StmtPtr expand_choose(const StmtPtr& target, const ExprPtr& choose, std::size_t n) {
  const Span& at = choose->span;
  auto test = Expr::make(ExprKind::Choose, at, {choose->args.begin(), choose->args.begin() + static_cast<long>(n)});
  typed(test);
  auto s = Stmt::make(StmtKind::If, target->span);
  if (n == 2) {
    s->value = test;
    s->then_branch = in_block(assign_index(target, 1));
    s->else_branch = in_block(assign_index(target, 0));
    return s;
  }
  auto last = typed(Expr::integer(mpz_class(static_cast<long>(n - 1)), at));
  s->value = typed(Expr::make(ExprKind::Eq, at, {test, last}));
  s->then_branch = in_block(assign_index(target, static_cast<long>(n - 1)));
  s->else_branch = in_block(expand_choose(target, choose, n - 1));
  return s;
}

}  // namespace detail

/// Rewrites a multivalued assignment x := choose(...) into nested IFs over
/// choose tests. Any other statement is returned unchanged.
inline StmtPtr desugar_choose_assign(const StmtPtr& stmt) {
  if (stmt->kind != StmtKind::Assign || stmt->value->kind != ExprKind::Choose) return stmt;
  return detail::expand_choose(stmt, stmt->value, stmt->value->args.size());
}

/// Applies desugar_choose_assign everywhere in a statement tree.
inline StmtPtr desugar_all(const StmtPtr& stmt) {
  if (!stmt) return stmt;
  switch (stmt->kind) {
    case StmtKind::Assign: return desugar_choose_assign(stmt);
    case StmtKind::Block: {
      auto b = std::make_shared<Stmt>(*stmt);
      for (auto& s : b->stmts) s = desugar_all(s);
      return b;
    }
    case StmtKind::If: {
      auto s = std::make_shared<Stmt>(*stmt);
      s->then_branch = desugar_all(s->then_branch);
      s->else_branch = desugar_all(s->else_branch);
      return s;
    }
    case StmtKind::While: {
      auto s = std::make_shared<Stmt>(*stmt);
      s->body = desugar_all(s->body);
      return s;
    }
    default: return stmt;
  }
}

}  // namespace erc::lang
