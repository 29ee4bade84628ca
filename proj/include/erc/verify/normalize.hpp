#pragma once

// Canonical form of assertions, used to compare generated VCs with goldens
// up to alpha-renaming and the usual propositional rewrites.
//
//   abs / max / exists1 expanded; => eliminated; negation pushed to atoms;
//   atoms become  poly > 0, poly >= 0, poly = 0, poly != 0  with the leading
//   coefficient scaled to +-1; iota(n + c) = 2^c iota(n);
//   and/or flattened, deduplicated and sorted; L || (!L && X) -> L || X;
//   bound variables renamed by first occurrence.

#include "erc/verify/syntax.hpp"

#include <algorithm>

namespace erc::verify {

/// Monomial: sorted (atom key, exponent) pairs; empty for the constant.
using Monomial = std::vector<std::pair<std::string, int>>;

struct Poly {
  std::map<Monomial, mpq_class> m;

  bool is_constant() const { return m.empty() || (m.size() == 1 && m.begin()->first.empty()); }
  mpq_class constant() const {
    auto it = m.find(Monomial{});
    return it == m.end() ? mpq_class(0) : it->second;
  }
  void add(const Monomial& mono, const mpq_class& c) {
    mpq_class& slot = m[mono];
    slot += c;
    if (slot == 0) m.erase(mono);
  }
  Poly operator+(const Poly& o) const {
    Poly r = *this;
    for (const auto& [k, v] : o.m) r.add(k, v);
    return r;
  }
  Poly scaled(const mpq_class& c) const {
    Poly r;
    if (c == 0) return r;
    for (const auto& [k, v] : m) r.m[k] = v * c;
    return r;
  }
  Poly operator-(const Poly& o) const { return *this + o.scaled(-1); }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (const auto& [ka, va] : m)
      for (const auto& [kb, vb] : o.m) {
        std::map<std::string, int> e(ka.begin(), ka.end());
        for (const auto& [a, n] : kb) e[a] += n;
        r.add(Monomial(e.begin(), e.end()), va * vb);
      }
    return r;
  }
  static Poly of(const mpq_class& c) {
    Poly p;
    if (c != 0) p.m[Monomial{}] = c;
    return p;
  }
  static Poly atom(const std::string& key) {
    Poly p;
    p.m[Monomial{{key, 1}}] = 1;
    return p;
  }
  /// First non-constant coefficient (0 if constant).
  mpq_class leading() const {
    for (const auto& [k, v] : m)
      if (!k.empty()) return v;
    return 0;
  }
};

inline mpq_class pow2q(long e) {
  mpz_class p = 1;
  mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(e < 0 ? -e : e));
  return e < 0 ? mpq_class(mpz_class(1), p) : mpq_class(p);
}

/// Converts terms to polynomials over opaque atoms, remembering a canonical
/// term for each atom so polynomials can be turned back into terms.
class PolyContext {
 public:
  Poly poly(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Var: return atom_of(term::var(t->name, t->sort));
      case TermKind::Const: return Poly::of(t->value);
      case TermKind::ToReal: return poly(t->args[0]);
      case TermKind::Add: return poly(t->args[0]) + poly(t->args[1]);
      case TermKind::Sub: return poly(t->args[0]) - poly(t->args[1]);
      case TermKind::Neg: return poly(t->args[0]).scaled(-1);
      case TermKind::Mul: return poly(t->args[0]) * poly(t->args[1]);
      case TermKind::Div: {
        Poly n = poly(t->args[0]), d = poly(t->args[1]);
        if (d.is_constant() && d.constant() != 0) return n.scaled(1 / d.constant());
        return atom_of(term::div(to_term(n), to_term(d)));
      }
      case TermKind::Iota: {
        Poly n = poly(t->args[0]);
        mpq_class c = n.constant();
        if (c.get_den() != 1 || !c.get_num().fits_slong_p()) return atom_of(term::iota(to_term(n)));
        long shift = c.get_num().get_si();
        n.m.erase(Monomial{});
        if (n.m.empty()) return Poly::of(pow2q(shift));
        return atom_of(term::iota(to_term(n, VSort::Int))).scaled(pow2q(shift));
      }
      case TermKind::App: {
        std::vector<TermPtr> args;
        for (const auto& a : t->args) args.push_back(to_term(poly(a)));
        return atom_of(term::app(t->name, std::move(args)));
      }
      case TermKind::Read:
        return atom_of(term::read(t->name, t->sort, to_term(poly(t->args[0]), VSort::Int)));
      case TermKind::Abs: return atom_of(term::abs(to_term(poly(t->args[0]), t->sort)));
      case TermKind::Max:
        return atom_of(term::max(to_term(poly(t->args[0]), t->sort), to_term(poly(t->args[1]), t->sort)));
    }
    return {};
  }

  /// Polynomial back to a term; sums follow monomial order.
  TermPtr to_term(const Poly& p, VSort hint = VSort::Real) const {
    TermPtr acc;
    bool integral = hint == VSort::Int;
    for (const auto& [mono, c] : p.m) {
      TermPtr prod;
      for (const auto& [key, e] : mono)
        for (int i = 0; i < e; ++i) prod = prod ? term::mul(prod, atoms_.at(key)) : atoms_.at(key);
      mpq_class mag = abs(c);
      bool neg = c < 0;
      TermPtr piece;
      VSort cs = integral && mag.get_den() == 1 ? VSort::Int : VSort::Real;
      if (!prod) piece = term::constant(mag, cs);
      else if (mag == 1) piece = prod;
      else piece = term::mul(term::constant(mag, cs), prod);
      if (!acc) acc = neg ? term::neg(piece) : piece;
      else acc = neg ? term::sub(acc, piece) : term::add(acc, piece);
    }
    return acc ? acc : term::constant(0, integral ? VSort::Int : VSort::Real);
  }

 private:
  std::map<std::string, TermPtr> atoms_;

  Poly atom_of(const TermPtr& t) {
    std::string key = to_string(t);
    atoms_.emplace(key, t);
    return Poly::atom(key);
  }
};

namespace detail {

inline const Term* find_lift(const TermPtr& t) {
  if (t->kind == TermKind::Abs || t->kind == TermKind::Max) return t.get();
  for (const auto& a : t->args)
    if (auto* f = find_lift(a)) return f;
  return nullptr;
}

inline TermPtr replace(const TermPtr& t, const Term* target, const TermPtr& with) {
  if (t.get() == target) return with;
  if (t->args.empty()) return t;
  auto c = std::make_shared<Term>(*t);
  for (auto& a : c->args) a = replace(a, target, with);
  return c;
}

inline FormulaPtr with_terms(const FormulaPtr& f, std::vector<TermPtr> terms) {
  auto c = std::make_shared<Formula>(*f);
  c->terms = std::move(terms);
  return c;
}

}  // namespace detail

/// Rewrites abs, max and exists1 away; the result is equivalent.
inline FormulaPtr expand_macros(const FormulaPtr& f) {
  switch (f->kind) {
    case FKind::Cmp:
    case FKind::Uniq: {
      const Term* s = nullptr;
      for (const auto& t : f->terms)
        if ((s = detail::find_lift(t))) break;
      if (!s) return f;
      // |u| <= b and |u| < b with b abs-free: -b <= u <= b
      if (f->kind == FKind::Cmp && f->terms[0].get() == s && s->kind == TermKind::Abs &&
          !detail::find_lift(f->terms[1]) && !detail::find_lift(s->args[0])) {
        const TermPtr& u = s->args[0];
        const TermPtr& b = f->terms[1];
        if (f->op == CmpOp::Le || f->op == CmpOp::Lt)
          return fm::conj2(fm::cmp(f->op, term::neg(b), u), fm::cmp(f->op, u, b));
        if (f->op == CmpOp::Ge || f->op == CmpOp::Gt)
          return fm::disj2(fm::cmp(f->op, u, b), fm::cmp(f->op, term::neg(u), b));
      }
      std::vector<TermPtr> lo, hi;
      FormulaPtr when_first;
      TermPtr first, second;
      if (s->kind == TermKind::Abs) {
        first = s->args[0];
        second = term::neg(s->args[0]);
        when_first = fm::cmp(CmpOp::Ge, s->args[0], term::constant(0, s->sort));
      } else {
        first = s->args[0];
        second = s->args[1];
        when_first = fm::cmp(CmpOp::Ge, s->args[0], s->args[1]);
      }
      for (const auto& t : f->terms) {
        lo.push_back(detail::replace(t, s, first));
        hi.push_back(detail::replace(t, s, second));
      }
      FormulaPtr when_second = fm::negation(when_first);
      return fm::disj2(fm::conj2(expand_macros(when_first), expand_macros(detail::with_terms(f, lo))),
                       fm::conj2(expand_macros(when_second), expand_macros(detail::with_terms(f, hi))));
    }
    case FKind::Exists1: {
      // exists x. B(x) && forall x'. B(x') => x' = x
      FormulaPtr body = expand_macros(f->parts[0]);
      VSort vs = f->bound_sort == VSort::Int ? VSort::Int : VSort::Real;
      SortMap fv = free_vars(body);
      std::string other = fresh_name(f->name, [&](const std::string& n) { return fv.count(n) > 0 || n == f->name; });
      TermPtr x = term::var(f->name, vs), y = term::var(other, vs);
      FormulaPtr unique = fm::forall(other, vs, fm::implies(substitute(body, f->name, y), fm::cmp(CmpOp::Eq, y, x)));
      return fm::exists(f->name, vs, fm::conj2(body, unique));
    }
    case FKind::Forall:
    case FKind::Exists:
    case FKind::Not:
    case FKind::And:
    case FKind::Or:
    case FKind::Implies: {
      auto c = std::make_shared<Formula>(*f);
      for (auto& p : c->parts) p = expand_macros(p);
      return c;
    }
    default: return f;
  }
}

class Normalizer {
 public:
  /// Normal form of f (free variables keep their names).
  FormulaPtr normalize(const FormulaPtr& f) {
    ctx_ = PolyContext();  // atom keys are names, so they are only valid per formula
    return simplify(nnf(expand_macros(f), true));
  }

  /// Canonical text: universal prefix dropped, variables renamed by first
  /// occurrence, then normalized again. Alpha-equivalent inputs agree.
  std::string canonical(const FormulaPtr& f) {
    FormulaPtr body = f;
    std::vector<std::pair<std::string, VSort>> prefix;
    while (body->kind == FKind::Forall) {
      prefix.emplace_back(body->name, body->bound_sort);
      body = body->parts[0];
    }
    FormulaPtr n = normalize(body);
    SortMap fv = free_vars(n);
    for (const auto& [v, s] : prefix)
      if (fv.count(v)) fv[v] = s;
    std::vector<std::string> order;
    std::set<std::string> seen;
    first_occurrence(n, fv, seen, order);
    // rename through temporaries so v0.. never collides with an old name
    FormulaPtr r = n;
    for (std::size_t i = 0; i < order.size(); ++i) r = rename_var(r, order[i], "\x01" + std::to_string(i), fv[order[i]]);
    for (std::size_t i = 0; i < order.size(); ++i)
      r = rename_var(r, "\x01" + std::to_string(i), "v" + std::to_string(i), fv[order[i]]);
    int counter = 0;
    r = rename_bound(r, counter);
    r = normalize(r);
    std::string head;
    for (std::size_t i = 0; i < order.size(); ++i)
      head += "v" + std::to_string(i) + ":" + sort_name(fv[order[i]]) + " ";
    return "forall " + head + ". " + to_string(r);
  }

  /// Negation of a normalized literal, in normal form.
  FormulaPtr complement(const FormulaPtr& lit) { return nnf(lit, false); }

  PolyContext& polys() { return ctx_; }

 private:
  PolyContext ctx_;

  static bool is_literal(const FormulaPtr& f) {
    return f->kind == FKind::Cmp || f->kind == FKind::Cont || f->kind == FKind::Uniq ||
           (f->kind == FKind::Not && f->parts[0]->kind != FKind::Not);
  }

  FormulaPtr atom(CmpOp op, const TermPtr& a, const TermPtr& b) {
    Poly p = ctx_.poly(a) - ctx_.poly(b);
    switch (op) {
      case CmpOp::Lt: op = CmpOp::Gt; p = p.scaled(-1); break;
      case CmpOp::Le: op = CmpOp::Ge; p = p.scaled(-1); break;
      default: break;
    }
    if (p.is_constant()) {
      mpq_class c = p.constant();
      bool v = op == CmpOp::Gt ? c > 0 : op == CmpOp::Ge ? c >= 0 : op == CmpOp::Eq ? c == 0 : c != 0;
      return v ? fm::truth() : fm::falsity();
    }
    mpq_class lc = p.leading();
    if (op == CmpOp::Eq || op == CmpOp::Ne) p = p.scaled(1 / lc);
    else p = p.scaled(1 / abs(lc));
    bool integral = a->sort == VSort::Int && b->sort == VSort::Int;
    return fm::cmp(op, ctx_.to_term(p, integral ? VSort::Int : VSort::Real), term::constant(0, integral ? VSort::Int : VSort::Real));
  }

  FormulaPtr nnf(const FormulaPtr& f, bool pos) {
    switch (f->kind) {
      case FKind::True: return pos ? f : fm::falsity();
      case FKind::False: return pos ? f : fm::truth();
      case FKind::Cmp: return atom(pos ? f->op : negate(f->op), f->terms[0], f->terms[1]);
      case FKind::Cont: return pos ? f : fm::make(FKind::Not, {f});
      case FKind::Uniq: {
        FormulaPtr u = fm::uniq(f->name, ctx_.to_term(ctx_.poly(f->terms[0])), ctx_.to_term(ctx_.poly(f->terms[1])));
        return pos ? u : fm::make(FKind::Not, {u});
      }
      case FKind::Not: return nnf(f->parts[0], !pos);
      case FKind::And:
      case FKind::Or: {
        std::vector<FormulaPtr> parts;
        for (const auto& p : f->parts) parts.push_back(nnf(p, pos));
        bool is_and = (f->kind == FKind::And) == pos;
        return is_and ? fm::conj(std::move(parts)) : fm::disj(std::move(parts));
      }
      case FKind::Implies:
        if (pos) return fm::disj2(nnf(f->parts[0], false), nnf(f->parts[1], true));
        return fm::conj2(nnf(f->parts[0], true), nnf(f->parts[1], false));
      case FKind::Forall:
      case FKind::Exists: {
        bool forall = (f->kind == FKind::Forall) == pos;
        FormulaPtr body = nnf(f->parts[0], pos);
        if (!occurs(body, f->name)) return body;
        return fm::quant(forall ? FKind::Forall : FKind::Exists, f->name, f->bound_sort, body);
      }
      case FKind::Exists1: return nnf(expand_macros(f), pos);
    }
    return f;
  }

  // Flatten, dedupe, sort, and apply complement/absorption rules to a fixpoint.
  FormulaPtr simplify(const FormulaPtr& f) {
    if (f->kind == FKind::Forall || f->kind == FKind::Exists) {
      FormulaPtr body = simplify(f->parts[0]);
      if (fm::is_true(body) || fm::is_false(body) || !occurs(body, f->name)) return body;
      return fm::quant(f->kind, f->name, f->bound_sort, body);
    }
    if (f->kind != FKind::And && f->kind != FKind::Or) return f;
    bool is_and = f->kind == FKind::And;
    std::vector<FormulaPtr> parts;
    for (const auto& p : f->parts) {
      FormulaPtr s = simplify(p);
      if (s->kind == f->kind) parts.insert(parts.end(), s->parts.begin(), s->parts.end());
      else parts.push_back(s);
    }
    for (bool changed = true; changed;) {
      changed = false;
      std::map<std::string, FormulaPtr> uniq;
      for (auto& p : parts) {
        if (is_and ? fm::is_false(p) : fm::is_true(p)) return p;
        if (is_and ? fm::is_true(p) : fm::is_false(p)) continue;
        uniq.emplace(to_string(p), p);
      }
      std::set<std::string> complements;
      for (const auto& [k, p] : uniq)
        if (is_literal(p)) complements.insert(to_string(complement(p)));
      for (const auto& [k, p] : uniq)
        if (complements.count(k)) return is_and ? fm::falsity() : fm::truth();
      parts.clear();
      for (auto& [k, p] : uniq) {
        // L || (!L && X)  ->  L || X, and dually
        if (p->kind == (is_and ? FKind::Or : FKind::And)) {
          std::vector<FormulaPtr> kept;
          for (const auto& q : p->parts)
            if (!(is_literal(q) && complements.count(to_string(q)))) kept.push_back(q);
          if (kept.size() != p->parts.size()) {
            changed = true;
            FormulaPtr r = is_and ? fm::disj(kept) : fm::conj(kept);
            r = simplify(r);
            if (r->kind == f->kind) parts.insert(parts.end(), r->parts.begin(), r->parts.end());
            else parts.push_back(r);
            continue;
          }
        }
        parts.push_back(p);
      }
    }
    std::map<std::string, FormulaPtr> sorted;
    for (auto& p : parts) sorted.emplace(to_string(p), p);
    std::vector<FormulaPtr> out;
    for (auto& [k, p] : sorted) out.push_back(p);
    if (out.empty()) return is_and ? fm::truth() : fm::falsity();
    if (out.size() == 1) return out[0];
    return fm::make(f->kind, std::move(out));
  }

  // Name-blind text for ordering before renaming.
  static std::string masked(const FormulaPtr& f, const SortMap& vars) {
    std::string s = to_string(f);
    for (const auto& [v, sort] : vars) {
      std::string out;
      std::size_t i = 0;
      auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
      while (i < s.size()) {
        if (s.compare(i, v.size(), v) == 0 && (i == 0 || !ident(s[i - 1])) &&
            (i + v.size() == s.size() || !ident(s[i + v.size()]))) {
          out += '_';
          i += v.size();
        } else {
          out += s[i++];
        }
      }
      s = out;
    }
    return s;
  }

  static void term_vars(const TermPtr& t, const SortMap& fv, std::set<std::string>& seen, std::vector<std::string>& order) {
    if ((t->kind == TermKind::Var || t->kind == TermKind::Read) && fv.count(t->name) && seen.insert(t->name).second)
      order.push_back(t->name);
    for (const auto& a : t->args) term_vars(a, fv, seen, order);
  }

  static void first_occurrence(const FormulaPtr& f, const SortMap& fv, std::set<std::string>& seen, std::vector<std::string>& order) {
    for (const auto& t : f->terms) term_vars(t, fv, seen, order);
    std::vector<FormulaPtr> parts = f->parts;
    std::stable_sort(parts.begin(), parts.end(),
                     [&](const FormulaPtr& a, const FormulaPtr& b) { return masked(a, fv) < masked(b, fv); });
    for (const auto& p : parts) first_occurrence(p, fv, seen, order);
  }

  static FormulaPtr rename_var(const FormulaPtr& f, const std::string& from, const std::string& to, VSort s) {
    if (s == VSort::IntArray || s == VSort::RealArray) return map_terms(f, [&](const TermPtr& t) { return rename_array(t, from, to); }, from);
    return substitute(f, from, term::var(to, s));
  }

  template <class Fn>
  static FormulaPtr map_terms(const FormulaPtr& f, Fn fn, const std::string& shadow) {
    if ((f->kind == FKind::Forall || f->kind == FKind::Exists) && f->name == shadow) return f;
    auto c = std::make_shared<Formula>(*f);
    for (auto& t : c->terms) t = fn(t);
    for (auto& p : c->parts) p = map_terms(p, fn, shadow);
    return c;
  }

  static FormulaPtr rename_bound(const FormulaPtr& f, int& counter) {
    if (f->kind == FKind::Forall || f->kind == FKind::Exists) {
      std::string n = "q" + std::to_string(counter++);
      VSort s = f->bound_sort == VSort::Int ? VSort::Int : VSort::Real;
      FormulaPtr body = substitute(f->parts[0], f->name, term::var(n, s));
      return fm::quant(f->kind, n, f->bound_sort, rename_bound(body, counter));
    }
    if (f->parts.empty()) return f;
    auto c = std::make_shared<Formula>(*f);
    for (auto& p : c->parts) p = rename_bound(p, counter);
    return c;
  }
};

inline FormulaPtr normalize(const FormulaPtr& f) { return Normalizer().normalize(f); }
inline std::string canonical(const FormulaPtr& f) { return Normalizer().canonical(f); }
inline bool alpha_equivalent(const FormulaPtr& a, const FormulaPtr& b) { return canonical(a) == canonical(b); }

}  // namespace erc::verify
