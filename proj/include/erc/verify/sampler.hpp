#pragma once

// Randomized refutation of closed VCs in exact rational arithmetic. Function
// symbols are instantiated with test polynomials, cont() is true for them,
// uniq() is decided with Sturm sequences. Hypotheses `v = t` that pin a
// universally quantified variable are used to solve for it instead of
// sampling it (one-point rule), which keeps equalities like V = R from making
// nearly every sample vacuous.

#include "erc/corpus/functions.hpp"
#include "erc/verify/normalize.hpp"

#include <random>

namespace erc::verify {

class UnsupportedQuantifierShape : public VerifyError {
 public:
  using VerifyError::VerifyError;
};

struct SampleOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::vector<std::string> functions{"linear", "affine", "cubic"};
  long int_bound = 16;  // nested INTEGER quantifiers range over [-bound, bound]
};

struct SampleReport {
  std::size_t samples = 0;
  std::size_t vacuous = 0;  // hypotheses false
  std::size_t skipped = 0;  // undefined terms (division by zero, huge iota)
  bool refuted = false;
  std::map<std::string, std::string> counterexample;  // variable -> value, plus "f"
  std::vector<std::string> solved;  // variables eliminated by the one-point rule

  std::size_t effective() const { return samples - vacuous - skipped; }
};

namespace detail {

struct SkipSample {};

struct Valuation {
  std::map<std::string, mpq_class> scalars;
  std::map<std::string, std::map<long, mpq_class>> arrays;
  const corpus::Polynomial* f = nullptr;
  std::string f_symbol;
  std::function<mpq_class(const std::string&, long)> fresh_element;
};

inline long small_int(const mpq_class& v) {
  if (v.get_den() != 1 || !v.get_num().fits_slong_p()) throw SkipSample{};
  return v.get_num().get_si();
}

inline mpq_class eval(const TermPtr& t, Valuation& env) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = env.scalars.find(t->name);
      if (it == env.scalars.end()) throw VerifyError("unbound variable " + t->name);
      return it->second;
    }
    case TermKind::Const: return t->value;
    case TermKind::ToReal: return eval(t->args[0], env);
    case TermKind::Add: return eval(t->args[0], env) + eval(t->args[1], env);
    case TermKind::Sub: return eval(t->args[0], env) - eval(t->args[1], env);
    case TermKind::Mul: return eval(t->args[0], env) * eval(t->args[1], env);
    case TermKind::Div: {
      mpq_class d = eval(t->args[1], env);
      if (d == 0) throw SkipSample{};
      return eval(t->args[0], env) / d;
    }
    case TermKind::Neg: return -eval(t->args[0], env);
    case TermKind::Abs: return abs(eval(t->args[0], env));
    case TermKind::Max: {
      mpq_class a = eval(t->args[0], env), b = eval(t->args[1], env);
      return a >= b ? a : b;
    }
    case TermKind::Iota: {
      long n = small_int(eval(t->args[0], env));
      if (n < -4096 || n > 4096) throw SkipSample{};
      return pow2q(n);
    }
    case TermKind::App:
      if (t->name != env.f_symbol || t->args.size() != 1) throw VerifyError("no test function for '" + t->name + "'");
      return (*env.f)(eval(t->args[0], env));
    case TermKind::Read: {
      long i = small_int(eval(t->args[0], env));
      auto& arr = env.arrays[t->name];
      auto it = arr.find(i);
      if (it == arr.end()) it = arr.emplace(i, env.fresh_element(t->name, i)).first;
      return it->second;
    }
  }
  return 0;
}

inline bool holds(const FormulaPtr& f, Valuation& env, long int_bound) {
  switch (f->kind) {
    case FKind::True: return true;
    case FKind::False: return false;
    case FKind::Cmp: {
      mpq_class a = eval(f->terms[0], env), b = eval(f->terms[1], env);
      switch (f->op) {
        case CmpOp::Lt: return a < b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Gt: return a > b;
      }
      return false;
    }
    case FKind::Cont:
      if (f->name != env.f_symbol) throw VerifyError("no test function for '" + f->name + "'");
      return true;
    case FKind::Uniq:
      if (f->name != env.f_symbol) throw VerifyError("no test function for '" + f->name + "'");
      return corpus::uniq(*env.f, eval(f->terms[0], env), eval(f->terms[1], env));
    case FKind::Not: return !holds(f->parts[0], env, int_bound);
    case FKind::And:
      for (const auto& p : f->parts)
        if (!holds(p, env, int_bound)) return false;
      return true;
    case FKind::Or:
      for (const auto& p : f->parts)
        if (holds(p, env, int_bound)) return true;
      return false;
    case FKind::Implies: return !holds(f->parts[0], env, int_bound) || holds(f->parts[1], env, int_bound);
    case FKind::Forall:
    case FKind::Exists: {
      bool forall = f->kind == FKind::Forall;
      auto saved = env.scalars.find(f->name) != env.scalars.end() ? std::optional(env.scalars[f->name]) : std::nullopt;
      bool result = forall;
      for (long k = -int_bound; k <= int_bound; ++k) {
        env.scalars[f->name] = k;
        if (holds(f->parts[0], env, int_bound) != forall) {
          result = !forall;
          break;
        }
      }
      if (saved) env.scalars[f->name] = *saved;
      else env.scalars.erase(f->name);
      return result;
    }
    case FKind::Exists1: return holds(expand_macros(f), env, int_bound);
  }
  return false;
}

inline void check_quantifiers(const FormulaPtr& f) {
  if ((f->kind == FKind::Forall || f->kind == FKind::Exists || f->kind == FKind::Exists1) && f->bound_sort != VSort::Int)
    throw UnsupportedQuantifierShape("nested quantifier over " + std::string(sort_name(f->bound_sort)) + " variable '" +
                                     f->name + "'; only INTEGER quantifiers can be enumerated");
  for (const auto& p : f->parts) check_quantifiers(p);
}

inline void conjuncts(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
  if (f->kind == FKind::And)
    for (const auto& p : f->parts) conjuncts(p, out);
  else out.push_back(f);
}

// Finds a hypothesis v = t with v a sampled scalar occurring linearly and
// nowhere else in the equation; returns (v, t).
inline std::optional<std::pair<std::string, TermPtr>> one_point(const FormulaPtr& hyp, const SortMap& sampled) {
  std::vector<FormulaPtr> hs;
  conjuncts(hyp, hs);
  for (const auto& h : hs) {
    if (h->kind != FKind::Cmp || h->op != CmpOp::Eq) continue;
    PolyContext ctx;
    Poly p = ctx.poly(h->terms[0]) - ctx.poly(h->terms[1]);
    for (const auto& [mono, c] : p.m) {
      if (mono.size() != 1 || mono[0].second != 1) continue;
      const std::string& v = mono[0].first;
      auto s = sampled.find(v);
      if (s == sampled.end() || (s->second != VSort::Real && s->second != VSort::Int)) continue;
      Poly rest = p;
      rest.m.erase(mono);
      bool elsewhere = false;
      for (const auto& [m2, c2] : rest.m)
        for (const auto& [k, e] : m2)
          if (k == v || k.find(v) != std::string::npos) elsewhere = true;
      if (elsewhere) continue;
      TermPtr sol = ctx.to_term(rest.scaled(-1 / c), s->second);
      if (s->second == VSort::Int && sol->sort != VSort::Int) continue;
      return std::make_pair(v, sol);
    }
  }
  return std::nullopt;
}

}  // namespace detail

class Sampler {
 public:
  explicit Sampler(SampleOptions opt = {}) : opt_(std::move(opt)), rng_(opt_.seed) {}

  SampleReport check(const FormulaPtr& closed) {
    SampleReport rep;
    SortMap vars;
    FormulaPtr body = closed;
    while (body->kind == FKind::Forall) {
      vars[body->name] = body->bound_sort;
      body = body->parts[0];
    }
    if (!free_vars(body).empty()) {
      for (const auto& [v, s] : free_vars(body)) vars.emplace(v, s);
    }
    detail::check_quantifiers(body);
    FormulaPtr hyp = fm::truth(), goal = body;
    if (body->kind == FKind::Implies) {
      hyp = body->parts[0];
      goal = body->parts[1];
    }
    // one-point rule; solved variables disappear from the formula
    while (auto sol = detail::one_point(hyp, vars)) {
      hyp = substitute(hyp, sol->first, sol->second);
      goal = substitute(goal, sol->first, sol->second);
      vars.erase(sol->first);
      rep.solved.push_back(sol->first + " := " + to_string(sol->second));
    }
    std::string symbol = function_symbol(body);
    for (std::size_t n = 0; n < opt_.samples && !rep.refuted; ++n) {
      ++rep.samples;
      detail::Valuation env;
      const auto& tf = corpus::test_function(opt_.functions[pick(opt_.functions.size())]);
      env.f = &tf.poly;
      env.f_symbol = symbol;
      env.fresh_element = [&](const std::string& a, long) {
        if (vars.at(a) == VSort::IntArray) return mpq_class(uniform(-opt_.int_bound, opt_.int_bound));
        // repeating (up to sign) an earlier value makes ties such as |M[k]| = x likely
        if (!recent_.empty() && pick(5) < 2) return mpq_class(recent_[pick(recent_.size())] * (pick(2) ? 1 : -1));
        return sample_real();
      };
      recent_.clear();
      for (const auto& [v, s] : vars)
        if (s == VSort::Int) env.scalars[v] = sample_int();
        else if (s == VSort::Real) env.scalars[v] = sample_real();
      try {
        if (!detail::holds(hyp, env, opt_.int_bound)) {
          ++rep.vacuous;
          continue;
        }
        if (!detail::holds(goal, env, opt_.int_bound)) {
          rep.refuted = true;
          for (const auto& [v, val] : env.scalars) rep.counterexample[v] = val.get_str();
          for (const auto& [a, elems] : env.arrays)
            for (const auto& [i, val] : elems) rep.counterexample[a + "[" + std::to_string(i) + "]"] = val.get_str();
          if (!symbol.empty()) rep.counterexample[symbol] = tf.key;
        }
      } catch (const detail::SkipSample&) {
        ++rep.skipped;
      }
    }
    return rep;
  }

 private:
  SampleOptions opt_;
  std::mt19937_64 rng_;
  std::vector<mpq_class> recent_;

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  long uniform(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }

  static std::string function_symbol(const FormulaPtr& f) {
    std::string s;
    std::function<void(const TermPtr&)> term = [&](const TermPtr& t) {
      if (t->kind == TermKind::App) s = t->name;
      for (const auto& a : t->args) term(a);
    };
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& g) {
      if (g->kind == FKind::Cont || g->kind == FKind::Uniq) s = g->name;
      for (const auto& t : g->terms) term(t);
      for (const auto& p : g->parts) walk(p);
    };
    walk(f);
    return s;
  }

  mpq_class sample_int() {
    int mode = static_cast<int>(pick(20));
    if (mode < 10) return uniform(-opt_.int_bound, opt_.int_bound);
    if (mode < 17) return uniform(-8, 2);
    return uniform(-1, 1);
  }

  // Mixture: dyadics in [0, 1], small fractions, a wide grid, special
  // points, and points close to an earlier sample so that differences can be
  // small.
  mpq_class sample_real() {
    mpq_class v;
    int mode = static_cast<int>(pick(20));
    if (mode < 6) {
      long k = uniform(1, 8);
      v = mpq_class(uniform(0, 1L << k), 1L << k);
    } else if (mode < 10) {
      long b = uniform(1, 12);
      v = mpq_class(uniform(-2 * b, 2 * b), b);
    } else if (mode < 13) {
      v = mpq_class(uniform(-4096, 4096), 1024);
    } else if (mode < 16) {
      static const mpq_class special[] = {0, 1, -1, mpq_class(1, 2), mpq_class(1, 3), mpq_class(2, 3), 2};
      v = special[pick(std::size(special))];
    } else if (!recent_.empty()) {
      long k = uniform(1, 12);
      v = recent_[pick(recent_.size())] + mpq_class(uniform(0, 1) ? 1 : -1, 1L << k) * uniform(1, 3);
    } else {
      v = mpq_class(uniform(0, 64), 64);
    }
    v.canonicalize();
    recent_.push_back(v);
    return v;
  }
};

inline SampleReport sample_check(const FormulaPtr& closed, const SampleOptions& opt = {}) {
  return Sampler(opt).check(closed);
}

}  // namespace erc::verify
