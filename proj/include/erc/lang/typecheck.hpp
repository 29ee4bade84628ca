#pragma once

#include "erc/lang/ast.hpp"

#include <map>
#include <set>

namespace erc::lang {

/// A program whose expressions all carry sorts, with CONST values fixed.
struct CheckedProgram {
  Program program;
  std::map<std::string, mpz_class> consts;

  const FunctionDef& function(const std::string& name) const {
    const FunctionDef* f = program.find(name);
    if (!f) throw std::invalid_argument("no function named '" + name + "'");
    return *f;
  }
};

namespace detail {

inline constexpr long kMaxScale = 1L << 16;
inline constexpr std::int64_t kMaxArrayLength = 1 << 20;

class Checker {
 public:
  explicit Checker(Program& prog) : prog_(prog) {}

  std::map<std::string, mpz_class> consts;

  void resolve_consts(const std::map<std::string, mpz_class>& overrides) {
    std::set<std::string> declared;
    for (auto& c : prog_.consts) {
      if (!declared.insert(c.name).second) throw SortError(c.span, "CONST '" + c.name + "' defined twice");
      auto it = overrides.find(c.name);
      consts[c.name] = it != overrides.end() ? it->second : constant(c.value);
    }
    for (const auto& [name, value] : overrides)
      if (!declared.count(name)) throw std::invalid_argument("no CONST named '" + name + "' to override");
  }

  void check_function(FunctionDef& f) {
    f.result = resolve(f.result_type);
    if (f.result->array && f.result->base == Base::Integer)
      throw SortError(f.span, "array results are only supported for REAL functions");
    scopes_.clear();
    scopes_.emplace_back();
    for (auto& prm : f.params) {
      prm.sort = resolve(prm.type);
      scopes_.back()[prm.name] = *prm.sort;
    }
    current_ = &f;
    if (f.body) {
      statement(f.body);
      if (!returns(*f.body)) throw SortError(f.span, "function '" + f.name + "' may end without RETURN");
    }
  }

  Sort resolve(const TypeExpr& t) {
    if (!t.length) return {t.base, false, 0};
    mpz_class n = constant(t.length);
    if (n < 1 || n > kMaxArrayLength) throw SortError(t.span, "array length must lie in [1, 2^20]");
    return Sort::array_of(t.base, n.get_si());
  }

 private:
  Program& prog_;
  std::vector<std::map<std::string, Sort>> scopes_;
  const FunctionDef* current_ = nullptr;

  // integer constant expressions over literals and CONSTs
  mpz_class constant(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::Int: return e->number.get_num();
      case ExprKind::Var: {
        auto it = consts.find(e->name);
        if (it == consts.end()) throw SortError(e->span, "'" + e->name + "' is not a constant");
        return it->second;
      }
      case ExprKind::Neg: return -constant(e->args[0]);
      case ExprKind::Add: return constant(e->args[0]) + constant(e->args[1]);
      case ExprKind::Sub: return constant(e->args[0]) - constant(e->args[1]);
      case ExprKind::Mul:
      case ExprKind::Scale: return constant(e->args[0]) * constant(e->args[1]);
      default: throw SortError(e->span, "expected an integer constant expression");
    }
  }

  const Sort* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  static bool is_poly(const ExprPtr& e) { return !e->sort; }

  // Assigns a sort to a literal-only subtree.
  void settle(const ExprPtr& e, const Sort& s) {
    if (e->sort) return;
    if (s.array) throw SortError(e->span, "a number cannot have array sort");
    switch (e->kind) {
      case ExprKind::Int: break;
      case ExprKind::Neg:
      case ExprKind::Abs: settle(e->args[0], s); break;
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Max:
        settle(e->args[0], s);
        settle(e->args[1], s);
        break;
      case ExprKind::Mul:
        settle(e->args[0], s);
        settle(e->args[1], s);
        if (s.is_integer()) to_scale(e, 0);
        break;
      default: throw std::logic_error("settle: unexpected polymorphic expression");
    }
    e->sort = s;
  }

  // e := k * args[1-which], k = value of args[which]
  void to_scale(const ExprPtr& e, int which) {
    mpz_class k = constant(e->args[which]);
    if (abs(k) > kMaxScale)
      throw SortError(e->span, "constant factor " + k.get_str() + " exceeds 2^16");
    ExprPtr other = e->args[1 - which];
    e->kind = ExprKind::Scale;
    e->number = k;
    e->args = {other};
  }

  Sort check(const ExprPtr& e, std::optional<Sort> expected = std::nullopt) {
    synth(e);
    if (is_poly(e)) settle(e, expected && !expected->array ? *expected : Sort::integer());
    return *e->sort;
  }

  Sort scalar(const ExprPtr& e, std::optional<Sort> expected = std::nullopt) {
    Sort s = check(e, expected);
    if (s.array) throw SortError(e->span, "array used where a scalar is expected");
    return s;
  }

  void integer(const ExprPtr& e, const char* what) {
    if (!scalar(e, Sort::integer()).is_integer())
      throw SortError(e->span, std::string(what) + " must be INTEGER");
  }

  // Both operands get one scalar sort; returns nullopt when both are literals.
  std::optional<Sort> unify(const ExprPtr& e) {
    const ExprPtr& l = e->args[0];
    const ExprPtr& r = e->args[1];
    synth(l);
    synth(r);
    if (is_poly(l) && is_poly(r)) return std::nullopt;
    if (is_poly(l)) settle(l, *r->sort);
    if (is_poly(r)) settle(r, *l->sort);
    if (l->sort->array || r->sort->array) throw SortError(e->span, "arithmetic on whole arrays");
    if (*l->sort != *r->sort)
      throw SortError(e->span, "cannot mix " + l->sort->to_string() + " and " + r->sort->to_string() +
                                   " (integers enter real arithmetic only through iota)");
    return *l->sort;
  }

  void synth(const ExprPtr& e) {
    if (e->sort) return;
    switch (e->kind) {
      case ExprKind::Int: return;  // polymorphic
      case ExprKind::Rat: e->sort = Sort::real(); return;
      case ExprKind::Var: {
        if (const Sort* s = lookup(e->name)) {
          e->sort = *s;
          return;
        }
        auto c = consts.find(e->name);
        if (c == consts.end()) throw SortError(e->span, "undeclared variable '" + e->name + "'");
        e->kind = ExprKind::Int;
        e->number = c->second;
        return;
      }
      case ExprKind::Index: {
        Sort base = check(e->args[0]);
        if (!base.array) throw SortError(e->span, "indexing a non-array");
        integer(e->args[1], "array index");
        e->sort = base.element();
        return;
      }
      case ExprKind::Neg:
      case ExprKind::Abs: {
        synth(e->args[0]);
        if (is_poly(e->args[0])) return;
        if (e->args[0]->sort->array) throw SortError(e->span, "arithmetic on whole arrays");
        e->sort = e->args[0]->sort;
        return;
      }
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Max:
        if (auto s = unify(e)) e->sort = s;
        return;
      case ExprKind::Mul: {
        auto s = unify(e);
        if (!s) return;
        if (s->is_integer()) {
          bool lc = is_constant(e->args[0]), rc = is_constant(e->args[1]);
          if (!lc && !rc)
            throw SortError(e->span, "INTEGER * INTEGER is outside Presburger arithmetic; one factor must be constant");
          to_scale(e, lc ? 0 : 1);
        }
        e->sort = s;
        return;
      }
      case ExprKind::Scale: e->sort = Sort::integer(); return;
      case ExprKind::Div: {
        auto s = unify(e);
        if (!s || s->is_integer()) throw SortError(e->span, "'/' is only defined on REAL; integers have no division");
        e->sort = s;
        return;
      }
      case ExprKind::Gt: {
        auto s = unify(e);
        if (!s) settle_both(e, Sort::integer());
        e->sort = Sort::integer();
        return;
      }
      case ExprKind::Ge:
      case ExprKind::Eq:
      case ExprKind::Ne: {
        auto s = unify(e);
        if (!s) settle_both(e, Sort::integer());
        else if (s->is_real())
          throw SortError(e->span, e->kind == ExprKind::Ge
                                       ? "'>=' is not available on REAL; use the partial '>'"
                                       : "equality of REALs is undecidable; use '>' or choose");
        e->sort = Sort::integer();
        return;
      }
      case ExprKind::And:
      case ExprKind::Or:
        integer(e->args[0], "operand of logical connective");
        integer(e->args[1], "operand of logical connective");
        e->sort = Sort::integer();
        return;
      case ExprKind::Not:
        integer(e->args[0], "operand of '!'");
        e->sort = Sort::integer();
        return;
      case ExprKind::Choose:
        for (auto& a : e->args) integer(a, "choose argument");
        e->sort = Sort::integer();
        return;
      case ExprKind::Cond: {
        integer(e->args[0], "condition");
        auto s = unify_branches(e);
        e->sort = s;
        return;
      }
      case ExprKind::Iota:
        integer(e->args[0], "iota argument");
        e->sort = Sort::real();
        return;
      case ExprKind::Call: call(e); return;
    }
  }

  void settle_both(const ExprPtr& e, const Sort& s) {
    settle(e->args[0], s);
    settle(e->args[1], s);
  }

  Sort unify_branches(const ExprPtr& e) {
    Sort a = scalar(e->args[1]);
    synth(e->args[2]);
    if (is_poly(e->args[2])) settle(e->args[2], a);
    if (is_poly(e->args[1]) || *e->args[2]->sort != a) {
      // the first branch may have defaulted to INTEGER
      if (e->args[1]->kind == ExprKind::Int && e->args[2]->sort->is_real()) {
        e->args[1]->sort = Sort::real();
        return Sort::real();
      }
      throw SortError(e->span, "branches of ?: have different sorts");
    }
    return a;
  }

  bool is_constant(const ExprPtr& e) {
    try {
      constant(e);
      return true;
    } catch (const SortError&) {
      return false;
    }
  }

  void call(const ExprPtr& e) {
    const FunctionDef* f = prog_.find(e->name);
    if (!f) throw SortError(e->span, "call to undefined function '" + e->name + "'");
    Sort result = resolve(f->result_type);
    if (result.array) throw SortError(e->span, "array-valued function '" + e->name + "' can only be an entry point");
    std::size_t skip = f->takes_precision() ? 1 : 0;
    if (e->args.size() + skip != f->params.size())
      throw SortError(e->span, "'" + e->name + "' expects " + std::to_string(f->params.size() - skip) + " argument(s)" +
                                   (skip ? " (the precision argument is implicit)" : ""));
    for (std::size_t i = 0; i < e->args.size(); ++i) {
      Sort want = resolve(f->params[i + skip].type);
      Sort got = check(e->args[i], want);
      if (got != want)
        throw SortError(e->args[i]->span, "argument " + std::to_string(i + 1) + " of '" + e->name + "' has sort " +
                                              got.to_string() + ", expected " + want.to_string());
    }
    e->sort = result;
  }

  void declare(const std::string& name, const Sort& s, const Span& at) {
    if (consts.count(name)) throw SortError(at, "'" + name + "' shadows a CONST");
    if (!scopes_.back().emplace(name, s).second) throw SortError(at, "'" + name + "' declared twice");
  }

  void statement(const StmtPtr& s) {
    switch (s->kind) {
      case StmtKind::Decl: {
        s->sort = resolve(s->type);
        if (s->value) {
          Sort got = check(s->value, s->sort);
          if (got != *s->sort)
            throw SortError(s->span, "initializer of '" + s->name + "' has sort " + got.to_string() +
                                         ", expected " + s->sort->to_string());
        }
        declare(s->name, *s->sort, s->span);
        return;
      }
      case StmtKind::Assign: {
        const Sort* target = lookup(s->name);
        if (!target) throw SortError(s->span, "assignment to undeclared '" + s->name + "'");
        Sort want = *target;
        if (s->index) {
          if (!want.array) throw SortError(s->span, "'" + s->name + "' is not an array");
          integer(s->index, "array index");
          want = want.element();
        }
        Sort got = check(s->value, want);
        if (got != want)
          throw SortError(s->span, "cannot assign " + got.to_string() + " to " + want.to_string() + " '" + s->name + "'");
        return;
      }
      case StmtKind::Block:
        scopes_.emplace_back();
        for (auto& c : s->stmts) statement(c);
        scopes_.pop_back();
        return;
      case StmtKind::If:
        integer(s->value, "IF condition");
        statement(s->then_branch);
        statement(s->else_branch);
        return;
      case StmtKind::While:
        integer(s->value, "WHILE condition");
        statement(s->body);
        return;
      case StmtKind::Return: {
        Sort got = check(s->value, current_->result);
        if (got != *current_->result)
          throw SortError(s->span, "RETURN of " + got.to_string() + " from function returning " +
                                       current_->result->to_string());
        return;
      }
    }
  }

  static bool returns(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Return: return true;
      case StmtKind::Block:
        for (const auto& c : s.stmts)
          if (returns(*c)) return true;
        return false;
      case StmtKind::If: return returns(*s.then_branch) && returns(*s.else_branch);
      default: return false;
    }
  }
};

}  // namespace detail

/// Sort-checks a parsed program. CONST values may be overridden by name.
inline CheckedProgram typecheck(const Program& parsed,
                                const std::map<std::string, mpz_class>& const_overrides = {}) {
  Program prog = clone(parsed);
  detail::Checker checker(prog);
  checker.resolve_consts(const_overrides);
  for (auto& f : prog.functions) checker.check_function(f);
  return {std::move(prog), checker.consts};
}

}  // namespace erc::lang
