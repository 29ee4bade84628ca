#pragma once

// Text form of assertions: parser and printer. The printer's output is
// accepted by the parser, so VCs round-trip through .vc files.

#include "erc/verify/formula.hpp"

#include <cctype>
#include <optional>
#include <sstream>

namespace erc::verify {

/// Free symbols an assertion may mention.
struct Signature {
  SortMap vars;                          // scalars and arrays
  std::map<std::string, int> functions;  // REAL^n -> REAL symbols
};

class FormulaSyntaxError : public VerifyError {
 public:
  FormulaSyntaxError(const std::string& msg, std::size_t offset)
      : VerifyError(msg + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

struct FTok {
  enum Kind { Ident, Number, Op, End } kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<FTok> lex_formula(const std::string& s) {
  std::vector<FTok> out;
  std::size_t i = 0;
  static const char* ops[] = {"=>", "<=", ">=", "!=", "&&", "||", "<", ">", "=", "!", "+", "-", "*",
                              "/",  "(",  ")",  "[",  "]",  ",",  ".", ":", "|"};
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\'')) ++j;
      out.push_back({FTok::Ident, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      out.push_back({FTok::Number, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    bool matched = false;
    for (const char* op : ops) {
      std::size_t n = std::char_traits<char>::length(op);
      if (s.compare(i, n, op) == 0) {
        out.push_back({FTok::Op, op, i});
        i += n;
        matched = true;
        break;
      }
    }
    if (!matched) throw FormulaSyntaxError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({FTok::End, "", s.size()});
  return out;
}

inline mpq_class parse_decimal(const std::string& text) {
  auto dot = text.find('.');
  if (dot == std::string::npos) return mpq_class(mpz_class(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, text.size() - dot - 1);
  mpq_class q(mpz_class(digits), den);
  q.canonicalize();
  return q;
}

class FormulaParser {
 public:
  FormulaParser(const std::string& text, const Signature& sig) : toks_(lex_formula(text)), sig_(sig) {}

  FormulaPtr parse_all() {
    FormulaPtr f = formula();
    if (peek().kind != FTok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

  TermPtr parse_term_all() {
    TermPtr t = term_expr();
    if (peek().kind != FTok::End) fail("unexpected '" + peek().text + "'");
    return t;
  }

 private:
  std::vector<FTok> toks_;
  std::size_t i_ = 0;
  const Signature& sig_;
  std::vector<std::pair<std::string, VSort>> bound_;

  const FTok& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool is_op(const char* op, std::size_t k = 0) const { return peek(k).kind == FTok::Op && peek(k).text == op; }
  bool is_word(const char* w) const { return peek().kind == FTok::Ident && peek().text == w; }
  [[noreturn]] void fail(const std::string& msg) const { throw FormulaSyntaxError(msg, peek().pos); }
  [[noreturn]] void fail_at(std::size_t pos, const std::string& msg) const { throw FormulaSyntaxError(msg, pos); }
  void expect(const char* op) {
    if (!is_op(op)) fail(std::string("expected '") + op + "'");
    ++i_;
  }
  std::string ident() {
    if (peek().kind != FTok::Ident) fail("expected identifier");
    return toks_[i_++].text;
  }

  FormulaPtr formula() {
    if (is_word("forall") || is_word("exists") || is_word("exists1")) return quantified();
    return implication();
  }

  FormulaPtr quantified() {
    std::string q = ident();
    FKind k = q == "forall" ? FKind::Forall : q == "exists" ? FKind::Exists : FKind::Exists1;
    std::vector<std::pair<std::string, VSort>> vars;
    do {
      if (!vars.empty()) expect(",");
      std::string v = ident();
      VSort s = VSort::Real;
      if (is_op(":")) {
        ++i_;
        std::string sort = ident();
        if (sort == "INTEGER") s = VSort::Int;
        else if (sort == "REAL") s = VSort::Real;
        else fail("unknown sort '" + sort + "'");
        if (is_op("[") && is_op("]", 1)) {
          i_ += 2;
          s = s == VSort::Int ? VSort::IntArray : VSort::RealArray;
        }
      }
      vars.emplace_back(v, s);
    } while (is_op(","));
    expect(".");
    for (const auto& v : vars) bound_.push_back(v);
    FormulaPtr body = formula();
    for (std::size_t n = 0; n < vars.size(); ++n) bound_.pop_back();
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = fm::quant(k, it->first, it->second, body);
    return body;
  }

  FormulaPtr implication() {
    FormulaPtr lhs = disjunction();
    if (is_op("=>")) {
      ++i_;
      return fm::make(FKind::Implies, {lhs, is_quantifier() ? quantified() : implication()});
    }
    return lhs;
  }

  bool is_quantifier() const { return is_word("forall") || is_word("exists") || is_word("exists1"); }

  FormulaPtr disjunction() {
    std::vector<FormulaPtr> parts{conjunction()};
    while (is_op("||")) {
      ++i_;
      parts.push_back(conjunction());
    }
    return parts.size() == 1 ? parts[0] : fm::make(FKind::Or, std::move(parts));
  }

  FormulaPtr conjunction() {
    std::vector<FormulaPtr> parts{unary()};
    while (is_op("&&")) {
      ++i_;
      parts.push_back(unary());
    }
    return parts.size() == 1 ? parts[0] : fm::make(FKind::And, std::move(parts));
  }

  FormulaPtr unary() {
    if (is_op("!")) {
      ++i_;
      return fm::make(FKind::Not, {unary()});
    }
    if (is_quantifier()) return quantified();
    return atom();
  }

  static bool relop(const std::string& t) {
    return t == "<" || t == "<=" || t == "=" || t == "!=" || t == ">=" || t == ">";
  }

  FormulaPtr atom() {
    if (is_word("true")) return ++i_, fm::truth();
    if (is_word("false")) return ++i_, fm::falsity();
    if (is_word("cont") && is_op("(", 1)) {
      i_ += 2;
      std::string f = function_symbol();
      expect(")");
      return fm::cont(f);
    }
    if (is_word("uniq") && is_op("(", 1)) {
      i_ += 2;
      std::string f = function_symbol();
      expect(",");
      TermPtr a = term_expr();
      expect(",");
      TermPtr b = term_expr();
      expect(")");
      return fm::uniq(f, a, b);
    }
    if (is_op("(")) {
      // Either a parenthesized formula or a relation chain starting with a
      // parenthesized term; try the chain first.
      std::size_t save = i_;
      try {
        TermPtr t = term_expr();
        if (peek().kind == FTok::Op && relop(peek().text)) return chain(t);
      } catch (const VerifyError&) {
      }
      i_ = save;
      expect("(");
      FormulaPtr f = formula();
      expect(")");
      return f;
    }
    TermPtr t = term_expr();
    if (!(peek().kind == FTok::Op && relop(peek().text))) fail("expected a comparison");
    return chain(t);
  }

  FormulaPtr chain(TermPtr lhs) {
    std::vector<FormulaPtr> parts;
    while (peek().kind == FTok::Op && relop(peek().text)) {
      std::string t = toks_[i_++].text;
      CmpOp op = t == "<" ? CmpOp::Lt : t == "<=" ? CmpOp::Le : t == "=" ? CmpOp::Eq : t == "!=" ? CmpOp::Ne
               : t == ">=" ? CmpOp::Ge : CmpOp::Gt;
      TermPtr rhs = term_expr();
      parts.push_back(fm::cmp(op, lhs, rhs));
      lhs = rhs;
    }
    return parts.size() == 1 ? parts[0] : fm::make(FKind::And, std::move(parts));
  }

  std::string function_symbol() {
    std::string f = ident();
    if (!sig_.functions.count(f)) fail("unknown function symbol '" + f + "'");
    return f;
  }

  TermPtr term_expr() {
    TermPtr t = product();
    while (is_op("+") || is_op("-")) {
      bool plus = toks_[i_++].text == "+";
      TermPtr r = product();
      t = plus ? term::add(t, r) : term::sub(t, r);
    }
    return t;
  }

  TermPtr product() {
    TermPtr t = negation();
    while (is_op("*") || is_op("/")) {
      bool times = toks_[i_++].text == "*";
      TermPtr r = negation();
      t = times ? term::mul(t, r) : term::div(t, r);
    }
    return t;
  }

  TermPtr negation() {
    if (is_op("-")) {
      ++i_;
      return term::neg(negation());
    }
    return primary();
  }

  std::optional<VSort> lookup(const std::string& name) const {
    for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
      if (it->first == name) return it->second;
    auto v = sig_.vars.find(name);
    if (v != sig_.vars.end()) return v->second;
    return std::nullopt;
  }

  TermPtr primary() {
    const FTok& t = peek();
    if (t.kind == FTok::Number) {
      ++i_;
      mpq_class v = parse_decimal(t.text);
      return term::constant(v, t.text.find('.') == std::string::npos ? VSort::Int : VSort::Real);
    }
    if (is_op("(")) {
      ++i_;
      TermPtr e = term_expr();
      expect(")");
      return e;
    }
    if (is_op("|")) {
      ++i_;
      TermPtr e = term_expr();
      expect("|");
      return term::abs(e);
    }
    std::size_t at = peek().pos;
    std::string name = ident();
    if (is_op("(")) {
      ++i_;
      std::vector<TermPtr> args;
      if (!is_op(")")) {
        args.push_back(term_expr());
        while (is_op(",")) {
          ++i_;
          args.push_back(term_expr());
        }
      }
      expect(")");
      try {
        if (name == "iota" && args.size() == 1) return term::iota(args[0]);
        if (name == "abs" && args.size() == 1) return term::abs(args[0]);
        if (name == "max" && args.size() == 2) return term::max(args[0], args[1]);
      } catch (const FormulaSortError& e) {
        fail(e.what());
      }
      auto f = sig_.functions.find(name);
      if (f == sig_.functions.end()) fail_at(at, "unknown function '" + name + "'");
      if (static_cast<int>(args.size()) != f->second) fail_at(at, "wrong number of arguments to '" + name + "'");
      return term::app(name, std::move(args));
    }
    auto sort = lookup(name);
    if (!sort) fail_at(at, "unknown variable '" + name + "'");
    if (is_op("[")) {
      ++i_;
      TermPtr idx = term_expr();
      expect("]");
      if (*sort != VSort::IntArray && *sort != VSort::RealArray) fail("'" + name + "' is not an array");
      if (idx->sort != VSort::Int) fail("array index must be INTEGER");
      return term::read(name, *sort == VSort::IntArray ? VSort::Int : VSort::Real, idx);
    }
    if (*sort == VSort::IntArray || *sort == VSort::RealArray) fail_at(at, "array '" + name + "' used as a scalar");
    return term::var(name, *sort);
  }
};

}  // namespace detail

inline FormulaPtr parse_formula(const std::string& text, const Signature& sig) {
  return detail::FormulaParser(text, sig).parse_all();
}

inline TermPtr parse_term(const std::string& text, const Signature& sig) {
  return detail::FormulaParser(text, sig).parse_term_all();
}

// ---- printing ----

namespace detail {

inline int term_prec(const Term& t) {
  switch (t.kind) {
    case TermKind::Add:
    case TermKind::Sub: return 1;
    case TermKind::Mul:
    case TermKind::Div: return 2;
    case TermKind::Neg: return 3;
    case TermKind::Const: return t.value.get_den() != 1 ? 2 : (t.value < 0 ? 3 : 4);
    case TermKind::ToReal: return term_prec(*t.args[0]);
    default: return 4;
  }
}

inline void print_term(std::ostream& os, const Term& t, int ctx);

inline void print_child(std::ostream& os, const Term& t, int ctx) {
  bool paren = term_prec(t) < ctx;
  if (paren) os << '(';
  print_term(os, t, paren ? 0 : ctx);
  if (paren) os << ')';
}

inline void print_term(std::ostream& os, const Term& t, int) {
  switch (t.kind) {
    case TermKind::Var: os << t.name; return;
    case TermKind::Const:
      if (t.value.get_den() == 1) os << t.value.get_num().get_str();
      else os << t.value.get_num().get_str() << " / " << t.value.get_den().get_str();
      return;
    case TermKind::ToReal: print_term(os, *t.args[0], 0); return;
    case TermKind::Add:
    case TermKind::Sub:
      print_child(os, *t.args[0], 1);
      os << (t.kind == TermKind::Add ? " + " : " - ");
      print_child(os, *t.args[1], 2);
      return;
    case TermKind::Mul:
    case TermKind::Div:
      print_child(os, *t.args[0], 2);
      os << (t.kind == TermKind::Mul ? " * " : " / ");
      print_child(os, *t.args[1], 3);
      return;
    case TermKind::Neg:
      os << '-';
      print_child(os, *t.args[0], 3);
      return;
    case TermKind::Abs: {
      // pad so that nested bars never lex as `||`
      std::ostringstream inner;
      print_term(inner, *t.args[0], 0);
      std::string s = inner.str();
      bool pad = s.front() == '|' || s.back() == '|';
      os << (pad ? "| " : "|") << s << (pad ? " |" : "|");
      return;
    }
    case TermKind::Iota:
    case TermKind::Max:
    case TermKind::App: {
      os << (t.kind == TermKind::Iota ? "iota" : t.kind == TermKind::Max ? "max" : t.name) << '(';
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) os << ", ";
        print_term(os, *t.args[i], 0);
      }
      os << ')';
      return;
    }
    case TermKind::Read:
      os << t.name << '[';
      print_term(os, *t.args[0], 0);
      os << ']';
      return;
  }
}

inline int formula_prec(const Formula& f) {
  switch (f.kind) {
    case FKind::Forall:
    case FKind::Exists:
    case FKind::Exists1: return 0;
    case FKind::Implies: return 1;
    case FKind::Or: return 2;
    case FKind::And: return 3;
    case FKind::Not: return 4;
    default: return 5;
  }
}

inline void print_formula(std::ostream& os, const Formula& f);

inline void print_fchild(std::ostream& os, const Formula& f, int ctx) {
  bool paren = formula_prec(f) < ctx;
  if (paren) os << '(';
  print_formula(os, f);
  if (paren) os << ')';
}

inline void print_formula(std::ostream& os, const Formula& f) {
  switch (f.kind) {
    case FKind::True: os << "true"; return;
    case FKind::False: os << "false"; return;
    case FKind::Cmp:
      print_term(os, *f.terms[0], 0);
      os << ' ' << op_text(f.op) << ' ';
      print_term(os, *f.terms[1], 0);
      return;
    case FKind::Cont: os << "cont(" << f.name << ')'; return;
    case FKind::Uniq:
      os << "uniq(" << f.name << ", ";
      print_term(os, *f.terms[0], 0);
      os << ", ";
      print_term(os, *f.terms[1], 0);
      os << ')';
      return;
    case FKind::Not:
      os << '!';
      print_fchild(os, *f.parts[0], f.parts[0]->kind == FKind::Cmp ? 6 : 5);
      return;
    case FKind::And:
    case FKind::Or:
      for (std::size_t i = 0; i < f.parts.size(); ++i) {
        if (i) os << (f.kind == FKind::And ? " && " : " || ");
        print_fchild(os, *f.parts[i], formula_prec(f) + 1);
      }
      return;
    case FKind::Implies:
      print_fchild(os, *f.parts[0], 2);
      os << " => ";
      print_fchild(os, *f.parts[1], f.parts[1]->kind == FKind::Implies ? 1 : 2);
      return;
    case FKind::Forall:
    case FKind::Exists:
    case FKind::Exists1:
      os << (f.kind == FKind::Forall ? "forall " : f.kind == FKind::Exists ? "exists " : "exists1 ") << f.name << ':'
         << sort_name(f.bound_sort) << ". ";
      print_formula(os, *f.parts[0]);
      return;
  }
}

}  // namespace detail

inline std::string to_string(const TermPtr& t) {
  std::ostringstream os;
  detail::print_term(os, *t, 0);
  return os.str();
}

inline std::string to_string(const FormulaPtr& f) {
  std::ostringstream os;
  detail::print_formula(os, *f);
  return os.str();
}

}  // namespace erc::verify
