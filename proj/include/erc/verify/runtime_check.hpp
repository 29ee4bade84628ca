#pragma once

// Evaluates an assertion on the final state of an interpreter run. Reals are
// compared by refining enclosures, so a comparison of equal values (or of
// values too close to separate) is reported as undecided.

#include "erc/corpus/functions.hpp"
#include "erc/verify/formula.hpp"

namespace erc::verify {

struct StateEnv {
  std::map<std::string, lang::Value> values;
  std::map<std::string, const corpus::Polynomial*> functions;
  std::int64_t finest = -200;  // precision floor for separating reals
};

namespace detail {

using core::RealNum;

struct Undecided {};

inline RealNum eval_real(const TermPtr& t, const StateEnv& env);

inline std::int64_t eval_index(const TermPtr& t, const StateEnv& env) {
  RealNum v = eval_real(t, env);
  if (!v.exact()) throw Undecided{};
  mpq_class q = v.exact()->to_rational();
  if (q.get_den() != 1 || !q.get_num().fits_slong_p()) throw Undecided{};
  return q.get_num().get_si();
}

inline RealNum eval_real(const TermPtr& t, const StateEnv& env) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = env.values.find(t->name);
      if (it == env.values.end()) throw VerifyError("no value for '" + t->name + "'");
      if (it->second.is<mpz_class>()) return RealNum::from_integer(it->second.integer());
      if (it->second.is<RealNum>()) return it->second.real();
      throw VerifyError("'" + t->name + "' is an array");
    }
    case TermKind::Const: return RealNum::from_rational(t->value);
    case TermKind::ToReal: return eval_real(t->args[0], env);
    case TermKind::Add: return eval_real(t->args[0], env) + eval_real(t->args[1], env);
    case TermKind::Sub: return eval_real(t->args[0], env) - eval_real(t->args[1], env);
    case TermKind::Mul: return eval_real(t->args[0], env) * eval_real(t->args[1], env);
    case TermKind::Div: return eval_real(t->args[0], env) / eval_real(t->args[1], env);
    case TermKind::Neg: return -eval_real(t->args[0], env);
    case TermKind::Abs: return abs(eval_real(t->args[0], env));
    case TermKind::Max: return max(eval_real(t->args[0], env), eval_real(t->args[1], env));
    case TermKind::Iota: return RealNum::iota(eval_index(t->args[0], env));
    case TermKind::App: {
      auto f = env.functions.find(t->name);
      if (f == env.functions.end()) throw VerifyError("no test function for '" + t->name + "'");
      return (*f->second)(eval_real(t->args[0], env));
    }
    case TermKind::Read: {
      auto it = env.values.find(t->name);
      if (it == env.values.end()) throw VerifyError("no value for '" + t->name + "'");
      std::int64_t i = eval_index(t->args[0], env);
      if (it->second.is<lang::IntArray>()) {
        const auto& a = it->second.as<lang::IntArray>();
        if (i < 0 || i >= static_cast<std::int64_t>(a.size())) throw Undecided{};
        return RealNum::from_integer(a[i]);
      }
      const auto& a = it->second.as<lang::RealArray>();
      if (i < 0 || i >= static_cast<std::int64_t>(a.size())) throw Undecided{};
      return a[i];
    }
  }
  return {};
}

// Sign of x, or Undecided if 0 cannot be excluded (and x is not exactly 0).
inline int sign_of(const RealNum& x, std::int64_t finest) {
  if (auto& e = x.exact()) return e->sign();
  for (std::int64_t p = -8; p >= finest; p -= 16) {
    core::DyadicInterval i = x.approx(p);
    if (i.lo().sign() > 0) return 1;
    if (i.hi().sign() < 0) return -1;
    if (i.is_point()) return 0;
  }
  throw Undecided{};
}

inline core::DyadicInterval tight(const RealNum& x, std::int64_t finest) { return x.approx(finest); }

inline bool state_holds(const FormulaPtr& f, const StateEnv& env) {
  switch (f->kind) {
    case FKind::True: return true;
    case FKind::False: return false;
    case FKind::Cmp: {
      int s = sign_of(eval_real(f->terms[0], env) - eval_real(f->terms[1], env), env.finest);
      switch (f->op) {
        case CmpOp::Lt: return s < 0;
        case CmpOp::Le: return s <= 0;
        case CmpOp::Eq: return s == 0;
        case CmpOp::Ne: return s != 0;
        case CmpOp::Ge: return s >= 0;
        case CmpOp::Gt: return s > 0;
      }
      return false;
    }
    case FKind::Cont: return env.functions.count(f->name) > 0;
    case FKind::Uniq: {
      auto fn = env.functions.find(f->name);
      if (fn == env.functions.end()) throw VerifyError("no test function for '" + f->name + "'");
      const corpus::Polynomial& p = *fn->second;
      RealNum a = eval_real(f->terms[0], env), b = eval_real(f->terms[1], env);
      if (sign_of(b - a, env.finest) <= 0) return false;
      if (sign_of(p(a) * p(b), env.finest) >= 0) return false;
      core::DyadicInterval ia = tight(a, env.finest), ib = tight(b, env.finest);
      int outer = corpus::count_roots(p, ia.lo().to_rational(), ib.hi().to_rational());
      int inner = corpus::count_roots(p, ia.hi().to_rational(), ib.lo().to_rational());
      if (outer == 1 && inner == 1) return true;
      if (inner > 1) return false;
      throw Undecided{};
    }
    case FKind::Not: return !state_holds(f->parts[0], env);
    case FKind::And:
      for (const auto& p : f->parts)
        if (!state_holds(p, env)) return false;
      return true;
    case FKind::Or:
      for (const auto& p : f->parts)
        if (state_holds(p, env)) return true;
      return false;
    case FKind::Implies: return !state_holds(f->parts[0], env) || state_holds(f->parts[1], env);
    default: throw VerifyError("quantified assertions are not evaluated on states");
  }
}

}  // namespace detail

/// true/false if decided, nullopt if some real comparison could not be
/// separated down to env.finest.
inline std::optional<bool> holds_in_state(const FormulaPtr& f, const StateEnv& env) {
  try {
    return detail::state_holds(f, env);
  } catch (const detail::Undecided&) {
    return std::nullopt;
  } catch (const core::BudgetExhausted&) {
    return std::nullopt;
  }
}

}  // namespace erc::verify
