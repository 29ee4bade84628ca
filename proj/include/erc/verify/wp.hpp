#pragma once

// Weakest preconditions for ERC programs and verification-condition
// generation. The choose rules:
//
//   wp(IF choose(a, c) THEN A ELSE B, Q) = (a || c) && (c => wp(A,Q)) && (a => wp(B,Q))
//   x := E[choose(g_0..g_{n-1})]  ->  (g_0 || ..) && AND_i (g_i => Q[E[i]/x])
//
// and for WHILE choose(a, c) with invariant I, variant V, decrease eps:
//
//   I && c && V = R  =>  wp(body, (a || c) && I && V <= R - eps)   preservation
//   I && V <= 0      =>  !c                                        exit bound
//   I && a           =>  Q                                         exit
//   I                =>  a || c                                    definedness
//
// with precondition I && (a || c). Definedness is discharged: the rule's
// conclusion and every preserved state already carry a || c.

#include "erc/lang/typecheck.hpp"
#include "erc/verify/normalize.hpp"

#include <functional>

namespace erc::verify {

class MissingAnnotation : public lang::SourceError {
 public:
  MissingAnnotation(const lang::Span& span, const std::string& msg) : SourceError("missing annotation", span, msg) {}
};

class UnsupportedConstruct : public lang::SourceError {
 public:
  UnsupportedConstruct(const lang::Span& span, const std::string& msg) : SourceError("unsupported", span, msg) {}
};

class AnnotationError : public lang::SourceError {
 public:
  AnnotationError(const lang::Span& span, const std::string& msg) : SourceError("annotation", span, msg) {}
};

struct VC {
  std::string name;
  std::string kind;  // initial, preservation, exit, exit-bound, definedness
  lang::Span span;   // the loop or function it comes from
  FormulaPtr formula;  // closed
  bool discharged = false;
  std::string reason;
};

struct LoopAnnotations {
  FormulaPtr invariant;
  TermPtr variant;
  TermPtr epsilon;  // null: 1 for INTEGER variants
};

class VcGenerator {
 public:
  VcGenerator(const lang::CheckedProgram& prog, const std::string& function) : prog_(prog), fn_(prog.function(function)) {
    if (fn_.is_prototype()) throw std::invalid_argument("'" + function + "' has no body");
    build_signature();
  }

  const Signature& signature() const { return sig_; }

  FormulaPtr precondition() const { return function_annotation("pre"); }
  FormulaPtr postcondition() const { return function_annotation("post"); }

  /// All VCs of the function, discharged ones included, in generation order.
  std::vector<VC> generate() {
    vcs_.clear();
    check_annotated(fn_.body);
    post_ = postcondition();
    FormulaPtr w = wp(fn_.body, fm::truth());
    emit_split("initial", fn_.span, precondition(), w);
    name_vcs();
    return vcs_;
  }

  /// wp of one statement against continuation q; loop VCs are collected.
  FormulaPtr wp(const lang::StmtPtr& s, const FormulaPtr& q) {
    using lang::StmtKind;
    switch (s->kind) {
      case StmtKind::Block: {
        FormulaPtr r = q;
        for (auto it = s->stmts.rbegin(); it != s->stmts.rend(); ++it) r = wp(*it, r);
        return r;
      }
      case StmtKind::Decl:
        if (s->value) return assign(s->name, s->value, q);
        if (s->sort && s->sort->array) {
          if (occurs(q, s->name)) throw UnsupportedConstruct(s->span, "array '" + s->name + "' is read before it is written");
          return q;
        }
        return substitute(q, s->name, term::constant(0, sort_of(*s->sort)));
      case StmtKind::Assign:
        if (s->index) {
          if (occurs(q, s->name))
            throw UnsupportedConstruct(s->span, "array updates are not supported in assertions (" + s->name + ")");
          return q;
        }
        return assign(s->name, s->value, q);
      case StmtKind::Return:
        return with_choice(s->value, [&](const lang::ExprPtr& e) { return substitute(post_, "result", term_of(e)); });
      case StmtKind::If: return wp_if(s, q);
      case StmtKind::While: return wp_while(s, q);
    }
    return q;
  }

  LoopAnnotations loop_annotations(const lang::StmtPtr& loop) const {
    LoopAnnotations a;
    std::vector<FormulaPtr> inv;
    for (const auto& ann : loop->annotations) {
      if (ann.key == "invariant") inv.push_back(parse_annotation(ann));
      else if (ann.key == "variant") a.variant = parse_annotation_term(ann);
      else if (ann.key == "epsilon") a.epsilon = parse_annotation_term(ann);
    }
    if (inv.empty()) throw MissingAnnotation(loop->span, "loop has no invariant");
    if (!a.variant) throw MissingAnnotation(loop->span, "loop has no variant");
    if (!a.epsilon && a.variant->sort == VSort::Real)
      throw MissingAnnotation(loop->span, "REAL variant needs an epsilon");
    a.invariant = fm::conj(inv);
    if (!a.epsilon) a.epsilon = term::integer(1);
    return a;
  }

  /// The guard of a loop as (exit, continue) formulas, or nullopt for a
  /// total INTEGER guard.
  std::optional<std::pair<FormulaPtr, FormulaPtr>> choice_guard(const lang::StmtPtr& loop) const {
    const auto& g = loop->value;
    if (g->kind == lang::ExprKind::Choose) {
      if (g->args.size() != 2) throw UnsupportedConstruct(g->span, "loop guards need a binary choose");
      return std::make_pair(formula_of(g->args[0]), formula_of(g->args[1]));
    }
    if (is_partial_test(g)) {
      auto [x, y] = std::pair{term_of(g->args[0]), term_of(g->args[1])};
      return std::make_pair(fm::cmp(CmpOp::Gt, y, x), fm::cmp(CmpOp::Gt, x, y));
    }
    return std::nullopt;
  }

  /// The loop's weakest precondition in the unsplit form with explicit
  /// quantifiers: five conjuncts, quantified over the variables the body
  /// assigns and the fresh value z of the variant.
  FormulaPtr appendix_form(const lang::StmtPtr& loop, const FormulaPtr& post) {
    LoopAnnotations ann = loop_annotations(loop);
    auto guard = choice_guard(loop);
    if (!guard) throw UnsupportedConstruct(loop->span, "appendix form applies to choose loops");
    auto [a, c] = *guard;
    std::vector<std::pair<std::string, VSort>> mods = modified(loop->body);
    VSort vs = ann.variant->sort;
    std::string z = fresh("z"), eps = fresh("c"), c0 = fresh("c0");
    TermPtr zt = term::var(z, vs), et = term::var(eps, vs), c0t = term::var(c0, vs);
    auto close = [&](FormulaPtr f, bool with_z) {
      if (with_z) f = fm::forall(z, vs, f);
      for (auto it = mods.rbegin(); it != mods.rend(); ++it) f = fm::forall(it->first, it->second, f);
      return f;
    };
    const FormulaPtr& inv = ann.invariant;
    std::vector<VC> saved;
    saved.swap(vcs_);
    FormulaPtr body_wp = wp(loop->body, fm::conj2(inv, fm::cmp(CmpOp::Le, ann.variant, term::sub(zt, et))));
    vcs_.swap(saved);
    FormulaPtr progress = fm::make(FKind::Implies, {fm::conj({inv, c, fm::cmp(CmpOp::Eq, ann.variant, zt)}), body_wp});
    std::vector<FormulaPtr> parts{
        inv,
        fm::exists(eps, vs, fm::conj2(fm::cmp(CmpOp::Gt, et, term::constant(0, vs)), close(progress, true))),
        fm::exists(c0, vs, close(fm::make(FKind::Implies, {fm::conj2(inv, fm::cmp(CmpOp::Le, ann.variant, c0t)), fm::negation(c)}), false)),
        close(fm::make(FKind::Implies, {fm::conj2(inv, a), post}), false),
        close(fm::make(FKind::Implies, {inv, fm::disj2(a, c)}), false)};
    return fm::make(FKind::And, std::move(parts));
  }

  // ---- expressions ----

  TermPtr term_of(const lang::ExprPtr& e) const {
    using lang::ExprKind;
    switch (e->kind) {
      case ExprKind::Int:
      case ExprKind::Rat: return term::constant(e->number, sort_of(*e->sort));
      case ExprKind::Var:
        if (e->sort->array) throw UnsupportedConstruct(e->span, "whole arrays cannot appear in assertions");
        return term::var(e->name, sort_of(*e->sort));
      case ExprKind::Index:
        return term::read(e->args[0]->name, sort_of(*e->sort), term_of(e->args[1]));
      case ExprKind::Neg: return term::neg(term_of(e->args[0]));
      case ExprKind::Add: return term::add(term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Sub: return term::sub(term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Mul: return term::mul(term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Div: return term::div(term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Scale: return term::mul(term::constant(e->number, sort_of(*e->sort)), term_of(e->args[0]));
      case ExprKind::Iota: return term::iota(term_of(e->args[0]));
      case ExprKind::Abs: return term::abs(term_of(e->args[0]));
      case ExprKind::Max: return term::max(term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Call: {
        const lang::FunctionDef* callee = prog_.program.find(e->name);
        if (!callee || !callee->is_prototype() || !callee->result->is_real())
          throw UnsupportedConstruct(e->span, "only calls of REAL host functions can appear in assertions");
        std::vector<TermPtr> args;
        for (const auto& a : e->args) args.push_back(term_of(a));
        return term::app(e->name, std::move(args));
      }
      default: throw UnsupportedConstruct(e->span, "a test or choose used as a number");
    }
  }

  FormulaPtr formula_of(const lang::ExprPtr& e) const {
    using lang::ExprKind;
    switch (e->kind) {
      case ExprKind::Gt: return fm::cmp(CmpOp::Gt, term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Ge: return fm::cmp(CmpOp::Ge, term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Eq: return fm::cmp(CmpOp::Eq, term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::Ne: return fm::cmp(CmpOp::Ne, term_of(e->args[0]), term_of(e->args[1]));
      case ExprKind::And: return fm::make(FKind::And, {formula_of(e->args[0]), formula_of(e->args[1])});
      case ExprKind::Or: return fm::make(FKind::Or, {formula_of(e->args[0]), formula_of(e->args[1])});
      case ExprKind::Not: return fm::negation(formula_of(e->args[0]));
      case ExprKind::Int: return e->number == 1 ? fm::truth() : fm::falsity();
      default: return fm::cmp(CmpOp::Eq, term_of(e), term::integer(1));
    }
  }

 private:
  const lang::CheckedProgram& prog_;
  const lang::FunctionDef& fn_;
  Signature sig_;
  FormulaPtr post_;
  std::vector<VC> vcs_;

  static VSort sort_of(const lang::Sort& s) {
    if (s.array) return s.base == lang::Base::Integer ? VSort::IntArray : VSort::RealArray;
    return s.base == lang::Base::Integer ? VSort::Int : VSort::Real;
  }

  static bool is_partial_test(const lang::ExprPtr& g) {
    return g->kind == lang::ExprKind::Gt && g->args[0]->sort && g->args[0]->sort->is_real();
  }

  void declare(const std::string& name, const lang::Sort& s) {
    auto [it, fresh] = sig_.vars.emplace(name, sort_of(s));
    if (!fresh && it->second != sort_of(s))
      throw UnsupportedConstruct(fn_.span, "variable '" + name + "' is declared with two sorts");
  }

  // Reports the first unannotated loop in source order, before any other
  // construct can fail.
  void check_annotated(const lang::StmtPtr& s) const {
    if (!s) return;
    if (s->kind == lang::StmtKind::While) loop_annotations(s);
    for (const auto& c : s->stmts) check_annotated(c);
    check_annotated(s->then_branch);
    check_annotated(s->else_branch);
    check_annotated(s->body);
  }

  void collect_decls(const lang::StmtPtr& s) {
    if (!s) return;
    if (s->kind == lang::StmtKind::Decl) declare(s->name, *s->sort);
    for (const auto& c : s->stmts) collect_decls(c);
    collect_decls(s->then_branch);
    collect_decls(s->else_branch);
    collect_decls(s->body);
  }

  void build_signature() {
    for (const auto& p : fn_.params) declare(p.name, *p.sort);
    collect_decls(fn_.body);
    sig_.vars["result"] = sort_of(*fn_.result);
    for (const auto& [name, v] : prog_.consts) sig_.vars.emplace(name, VSort::Int);
    for (const auto& f : prog_.program.functions)
      if (f.is_prototype() && f.result && f.result->is_real())
        sig_.functions[f.name] = static_cast<int>(f.params.size()) - 1;
  }

  FormulaPtr inline_consts(FormulaPtr f) const {
    for (const auto& [name, v] : prog_.consts) f = substitute(f, name, term::constant(mpq_class(v), VSort::Int));
    return f;
  }

  FormulaPtr parse_annotation(const lang::Annotation& a) const {
    try {
      return inline_consts(parse_formula(a.text, sig_));
    } catch (const VerifyError& e) {
      throw AnnotationError(a.span, a.key + ": " + e.what());
    }
  }

  TermPtr parse_annotation_term(const lang::Annotation& a) const {
    try {
      TermPtr t = parse_term(a.text, sig_);
      for (const auto& [name, v] : prog_.consts) t = substitute(t, name, term::constant(mpq_class(v), VSort::Int));
      return t;
    } catch (const VerifyError& e) {
      throw AnnotationError(a.span, a.key + ": " + e.what());
    }
  }

  FormulaPtr function_annotation(const std::string& key) const {
    std::vector<FormulaPtr> parts;
    for (const auto& a : fn_.annotations)
      if (a.key == key) parts.push_back(parse_annotation(a));
    return fm::conj(parts);
  }

  std::string fresh(const std::string& base) const {
    if (!sig_.vars.count(base)) return base;
    return fresh_name(base, [&](const std::string& n) { return sig_.vars.count(n) > 0; });
  }

  // ---- choose lifting ----

  static const lang::Expr* find_choose(const lang::ExprPtr& e) {
    if (e->kind == lang::ExprKind::Choose) return e.get();
    for (const auto& a : e->args)
      if (auto* c = find_choose(a)) return c;
    return nullptr;
  }

  static lang::ExprPtr replace_expr(const lang::ExprPtr& e, const lang::Expr* target, long value) {
    if (e.get() == target) {
      auto lit = lang::Expr::integer(value, e->span);
      lit->sort = lang::Sort::integer();
      return lit;
    }
    if (e->args.empty()) return e;
    auto c = std::make_shared<lang::Expr>(*e);
    for (auto& a : c->args) a = replace_expr(a, target, value);
    return c;
  }

  // Cases over the outcome of each choose in e, left to right.
  FormulaPtr with_choice(const lang::ExprPtr& e, const std::function<FormulaPtr(const lang::ExprPtr&)>& k) const {
    const lang::Expr* c = find_choose(e);
    if (!c) return k(e);
    std::vector<FormulaPtr> guards;
    for (const auto& g : c->args) guards.push_back(formula_of(g));
    std::vector<FormulaPtr> parts{fm::disj(guards)};
    for (std::size_t i = 0; i < guards.size(); ++i)
      parts.push_back(fm::implies(guards[i], with_choice(replace_expr(e, c, static_cast<long>(i)), k), true));
    return fm::conj(parts, true);
  }

  FormulaPtr assign(const std::string& x, const lang::ExprPtr& value, const FormulaPtr& q) const {
    return with_choice(value, [&](const lang::ExprPtr& e) { return substitute(q, x, term_of(e)); });
  }

  FormulaPtr wp_if(const lang::StmtPtr& s, const FormulaPtr& q) {
    FormulaPtr then_wp = wp(s->then_branch, q);
    FormulaPtr else_wp = s->else_branch ? wp(s->else_branch, q) : q;
    const auto& g = s->value;
    if (g->kind == lang::ExprKind::Choose && g->args.size() == 2) {
      FormulaPtr a = formula_of(g->args[0]), c = formula_of(g->args[1]);
      return fm::conj({fm::disj2(a, c), fm::implies(c, then_wp, true), fm::implies(a, else_wp, true)}, true);
    }
    if (is_partial_test(g)) {
      TermPtr x = term_of(g->args[0]), y = term_of(g->args[1]);
      FormulaPtr a = fm::cmp(CmpOp::Gt, y, x), c = fm::cmp(CmpOp::Gt, x, y);
      return fm::conj({fm::disj2(a, c), fm::implies(c, then_wp, true), fm::implies(a, else_wp, true)}, true);
    }
    return with_choice(g, [&](const lang::ExprPtr& e) {
      FormulaPtr b = formula_of(e);
      return fm::conj({fm::implies(b, then_wp, true), fm::implies(fm::negation(b), else_wp, true)}, true);
    });
  }

  FormulaPtr wp_while(const lang::StmtPtr& s, const FormulaPtr& q) {
    LoopAnnotations ann = loop_annotations(s);
    const FormulaPtr& inv = ann.invariant;
    const TermPtr& v = ann.variant;
    VSort vs = v->sort;
    TermPtr z = term::var(fresh(vs == VSort::Int ? "N" : "R"), vs);
    auto guard = choice_guard(s);
    if (guard) {
      auto [a, c] = *guard;
      FormulaPtr pre = fm::conj({inv, c, fm::cmp(CmpOp::Eq, v, z)});
      FormulaPtr target = fm::conj({fm::disj2(a, c), inv, fm::cmp(CmpOp::Le, v, term::sub(z, ann.epsilon))});
      emit_split("preservation", s->span, pre, wp(s->body, target));
      emit("exit-bound", s->span, fm::make(FKind::Implies, {fm::conj2(inv, fm::cmp(CmpOp::Le, v, term::constant(0, vs))), fm::negation(c)}));
      emit("exit", s->span, fm::make(FKind::Implies, {fm::conj2(inv, a), q}));
      emit("definedness", s->span, fm::make(FKind::Implies, {inv, fm::disj2(a, c)}), true,
           "carried by the loop rule: initiation and preservation both establish the disjunction");
      return fm::conj2(inv, fm::disj2(a, c));
    }
    FormulaPtr b = formula_of(s->value);
    FormulaPtr decreased = vs == VSort::Int && ann.epsilon->kind == TermKind::Const && ann.epsilon->value == 1
                               ? fm::cmp(CmpOp::Lt, v, z)
                               : fm::cmp(CmpOp::Le, v, term::sub(z, ann.epsilon));
    emit_split("preservation", s->span, fm::conj({inv, b, fm::cmp(CmpOp::Eq, v, z)}), wp(s->body, fm::conj2(inv, decreased)));
    emit("exit-bound", s->span, fm::make(FKind::Implies, {fm::conj2(inv, fm::cmp(CmpOp::Le, v, term::constant(0, vs))), fm::negation(b)}));
    emit("exit", s->span, fm::make(FKind::Implies, {fm::conj2(inv, fm::negation(b)), q}));
    return inv;
  }

  std::vector<std::pair<std::string, VSort>> modified(const lang::StmtPtr& s) const {
    std::set<std::string> names;
    std::function<void(const lang::StmtPtr&)> walk = [&](const lang::StmtPtr& st) {
      if (!st) return;
      if (st->kind == lang::StmtKind::Assign || st->kind == lang::StmtKind::Decl) names.insert(st->name);
      for (const auto& c : st->stmts) walk(c);
      walk(st->then_branch);
      walk(st->else_branch);
      walk(st->body);
    };
    walk(s);
    std::vector<std::pair<std::string, VSort>> out;
    for (const auto& n : names) out.emplace_back(n, sig_.vars.at(n));
    return out;
  }

  // ---- VC bookkeeping ----

  void emit(const std::string& kind, const lang::Span& span, const FormulaPtr& f, bool discharged = false,
            std::string reason = {}) {
    VC vc;
    vc.kind = kind;
    vc.span = span;
    vc.formula = universal_closure(f);
    if (!discharged && fm::is_true(normalize(f))) {
      discharged = true;
      reason = "tautology after normalization";
    }
    vc.discharged = discharged;
    vc.reason = std::move(reason);
    vcs_.push_back(std::move(vc));
  }

  // Splits h => c along conjunctions and implications built by branching rules.
  void emit_split(const std::string& kind, const lang::Span& span, const FormulaPtr& h, const FormulaPtr& c) {
    if (c->split && c->kind == FKind::And) {
      for (const auto& p : c->parts) emit_split(kind, span, h, p);
      return;
    }
    if (c->split && c->kind == FKind::Implies) {
      emit_split(kind, span, fm::conj2(h, c->parts[0]), c->parts[1]);
      return;
    }
    if (fm::is_true(c)) return;
    emit(kind, span, fm::is_true(h) ? c : fm::make(FKind::Implies, {h, c}));
  }

  void name_vcs() {
    int active = 0, done = 0;
    for (auto& vc : vcs_) vc.name = vc.discharged ? "discharged_" + std::to_string(done++) : "vc_" + std::to_string(active++);
  }
};

inline std::vector<VC> generate_vcs(const lang::CheckedProgram& prog, const std::string& function) {
  return VcGenerator(prog, function).generate();
}

inline std::vector<VC> active(const std::vector<VC>& vcs) {
  std::vector<VC> out;
  for (const auto& v : vcs)
    if (!v.discharged) out.push_back(v);
  return out;
}

}  // namespace erc::verify
