#pragma once

#include "erc/lang/ast.hpp"
#include "erc/lang/lexer.hpp"

#include <set>
#include <string_view>

namespace erc::lang {

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const std::string& file) : toks_(tokenize(src, file)) {}

  Program program() {
    Program prog;
    while (!at_end()) {
      auto notes = annotations();
      if (is_ident("CONST")) {
        if (!notes.empty()) throw SyntaxError(notes.front().span, "annotation not attached to a function or loop");
        prog.consts.push_back(const_def());
        continue;
      }
      prog.functions.push_back(function(std::move(notes)));
    }
    if (prog.functions.empty()) throw SyntaxError(peek().span, "program defines no function");
    std::set<std::string> names;
    for (const auto& f : prog.functions)
      if (!names.insert(f.name).second) throw SyntaxError(f.span, "function '" + f.name + "' defined twice");
    return prog;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == TokKind::End; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::Punct && peek(ahead).text == p;
  }
  bool is_ident(std::string_view w, std::size_t ahead = 0) const {
    return peek(ahead).kind == TokKind::Ident && peek(ahead).text == w;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    ++pos_;
    return true;
  }
  Token expect(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    return next();
  }
  void keyword(std::string_view w) {
    if (!is_ident(w)) fail("expected " + std::string(w));
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.span, msg + ", found " + found);
  }

  static bool reserved(const std::string& w) {
    static const std::set<std::string> kw{"INTEGER", "REAL", "IF",   "THEN",   "ELSE", "WHILE", "DO",
                                          "RETURN",  "CONST", "iota", "choose", "abs",  "max"};
    return kw.count(w) > 0;
  }

  std::string identifier() {
    if (peek().kind != TokKind::Ident || reserved(peek().text)) fail("expected identifier");
    return next().text;
  }

  std::vector<Annotation> annotations() {
    std::vector<Annotation> out;
    while (peek().kind == TokKind::Annotation) {
      const Token& t = next();
      auto tab = t.text.find('\t');
      out.push_back({t.text.substr(0, tab), t.text.substr(tab + 1), t.span});
    }
    return out;
  }

  static void require_keys(const std::vector<Annotation>& notes, std::set<std::string> allowed, const char* where) {
    for (const auto& a : notes)
      if (!allowed.count(a.key))
        throw SyntaxError(a.span, "annotation '" + a.key + "' is not allowed before " + where);
  }

  ConstDef const_def() {
    Span at = peek().span;
    keyword("CONST");
    ConstDef c;
    c.span = at;
    c.name = identifier();
    expect(":=");
    c.value = expr();
    expect(";");
    return c;
  }

  bool at_type() const { return is_ident("INTEGER") || is_ident("REAL"); }

  TypeExpr type() {
    TypeExpr t;
    t.span = peek().span;
    if (is_ident("INTEGER")) t.base = Base::Integer;
    else if (is_ident("REAL")) t.base = Base::Real;
    else fail("expected INTEGER or REAL");
    ++pos_;
    if (accept("[")) {
      t.length = expr();
      expect("]");
    }
    return t;
  }

  FunctionDef function(std::vector<Annotation> notes) {
    require_keys(notes, {"pre", "post"}, "a function");
    FunctionDef f;
    f.annotations = std::move(notes);
    f.result_type = type();
    f.span = peek().span;
    f.name = identifier();
    expect("(");
    std::set<std::string> seen;
    if (!is_punct(")")) {
      do {
        Param prm;
        prm.type = type();
        Span ps = peek().span;
        prm.name = identifier();
        if (!seen.insert(prm.name).second) throw SyntaxError(ps, "duplicate parameter '" + prm.name + "'");
        f.params.push_back(std::move(prm));
      } while (accept(","));
    }
    expect(")");
    if (f.takes_precision() && (f.params.empty() || f.params[0].type.base != Base::Integer || f.params[0].type.length))
      throw SyntaxError(f.span, "REAL function '" + f.name + "' lacks leading INTEGER precision parameter");
    if (accept(";")) return f;
    f.body = block();
    return f;
  }

  StmtPtr block() {
    auto b = Stmt::make(StmtKind::Block, peek().span);
    expect("{");
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}'");
      for (auto& s : statement()) b->stmts.push_back(std::move(s));
    }
    expect("}");
    return b;
  }

  std::vector<StmtPtr> statement() {
    auto notes = annotations();
    if (!notes.empty() && !is_ident("WHILE")) throw SyntaxError(notes.front().span, "loop annotation must precede WHILE");
    Span at = peek().span;
    if (at_type()) {
      TypeExpr t = type();
      std::vector<StmtPtr> decls;
      do {
        auto d = Stmt::make(StmtKind::Decl, peek().span);
        d->type = t;
        d->name = identifier();
        if (accept(":=")) d->value = expr();
        decls.push_back(std::move(d));
      } while (accept(","));
      expect(";");
      return decls;
    }
    if (is_ident("IF")) {
      ++pos_;
      auto s = Stmt::make(StmtKind::If, at);
      s->value = expr();
      keyword("THEN");
      s->then_branch = block();
      if (is_ident("ELSE")) {
        ++pos_;
        if (is_ident("IF")) {
          auto wrap = Stmt::make(StmtKind::Block, peek().span);
          wrap->stmts = statement();
          s->else_branch = wrap;
        } else {
          s->else_branch = block();
        }
      } else {
        s->else_branch = Stmt::make(StmtKind::Block, at);
      }
      return {s};
    }
    if (is_ident("WHILE")) {
      require_keys(notes, {"invariant", "variant", "epsilon"}, "a loop");
      ++pos_;
      auto s = Stmt::make(StmtKind::While, at);
      s->annotations = std::move(notes);
      s->value = expr();
      keyword("DO");
      s->body = block();
      return {s};
    }
    if (is_ident("RETURN")) {
      ++pos_;
      auto s = Stmt::make(StmtKind::Return, at);
      s->value = expr();
      expect(";");
      return {s};
    }
    auto s = Stmt::make(StmtKind::Assign, at);
    s->name = identifier();
    if (accept("[")) {
      s->index = expr();
      expect("]");
    }
    expect(":=");
    s->value = expr();
    expect(";");
    return {s};
  }

  // precedence, loosest first: ?:  ||  &&  comparisons  + -  * /  unary  postfix
  ExprPtr expr() {
    ExprPtr c = disjunction();
    if (is_punct("?")) {
      Span at = next().span;
      ExprPtr a = expr();
      expect(":");
      ExprPtr b = expr();
      return Expr::make(ExprKind::Cond, at, {c, a, b});
    }
    return c;
  }

  ExprPtr disjunction() {
    ExprPtr l = conjunction();
    while (is_punct("||")) {
      Span at = next().span;
      l = Expr::make(ExprKind::Or, at, {l, conjunction()});
    }
    return l;
  }

  ExprPtr conjunction() {
    ExprPtr l = comparison();
    while (is_punct("&&")) {
      Span at = next().span;
      l = Expr::make(ExprKind::And, at, {l, comparison()});
    }
    return l;
  }

  ExprPtr comparison() {
    ExprPtr l = additive();
    for (const char* op : {">", "<", ">=", "<=", "=", "!="}) {
      if (!is_punct(op)) continue;
      Span at = next().span;
      ExprPtr r = additive();
      std::string o = op;
      ExprPtr out;
      if (o == ">") out = Expr::make(ExprKind::Gt, at, {l, r});
      else if (o == "<") out = Expr::make(ExprKind::Gt, at, {r, l});
      else if (o == ">=") out = Expr::make(ExprKind::Ge, at, {l, r});
      else if (o == "<=") out = Expr::make(ExprKind::Ge, at, {r, l});
      else if (o == "=") out = Expr::make(ExprKind::Eq, at, {l, r});
      else out = Expr::make(ExprKind::Ne, at, {l, r});
      for (const char* again : {">", "<", ">=", "<=", "=", "!="})
        if (is_punct(again)) fail("comparisons do not chain; use &&");
      return out;
    }
    return l;
  }

  ExprPtr additive() {
    ExprPtr l = multiplicative();
    while (is_punct("+") || is_punct("-")) {
      const Token& t = next();
      l = Expr::make(t.text == "+" ? ExprKind::Add : ExprKind::Sub, t.span, {l, multiplicative()});
    }
    return l;
  }

  ExprPtr multiplicative() {
    ExprPtr l = unary();
    while (is_punct("*") || is_punct("/")) {
      const Token& t = next();
      l = Expr::make(t.text == "*" ? ExprKind::Mul : ExprKind::Div, t.span, {l, unary()});
    }
    return l;
  }

  ExprPtr unary() {
    if (is_punct("-")) {
      Span at = next().span;
      return Expr::make(ExprKind::Neg, at, {unary()});
    }
    if (is_punct("!")) {
      Span at = next().span;
      return Expr::make(ExprKind::Not, at, {unary()});
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (is_punct("[")) {
      Span at = next().span;
      ExprPtr i = expr();
      expect("]");
      e = Expr::make(ExprKind::Index, at, {e, i});
    }
    return e;
  }

  std::vector<ExprPtr> arguments() {
    expect("(");
    std::vector<ExprPtr> args;
    if (!is_punct(")")) {
      do args.push_back(expr());
      while (accept(","));
    }
    expect(")");
    return args;
  }

  ExprPtr primary() {
    const Token& t = peek();
    if (t.kind == TokKind::Number) {
      ++pos_;
      auto dot = t.text.find('.');
      if (dot == std::string::npos) return Expr::integer(mpz_class(t.text), t.span);
      std::string digits = t.text.substr(0, dot) + t.text.substr(dot + 1);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, t.text.size() - dot - 1);
      auto e = Expr::make(ExprKind::Rat, t.span);
      e->number = mpq_class(mpz_class(digits), den);
      e->number.canonicalize();
      return e;
    }
    if (accept("(")) {
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    if (t.kind != TokKind::Ident) fail("expected expression");
    Span at = t.span;
    auto builtin = [&](ExprKind k, std::size_t min_args, std::size_t max_args) {
      ++pos_;
      auto args = arguments();
      if (args.size() < min_args || args.size() > max_args)
        throw SyntaxError(at, "wrong number of arguments to " + t.text);
      return Expr::make(k, at, std::move(args));
    };
    if (t.text == "iota") return builtin(ExprKind::Iota, 1, 1);
    if (t.text == "abs") return builtin(ExprKind::Abs, 1, 1);
    if (t.text == "max") return builtin(ExprKind::Max, 2, 2);
    if (t.text == "choose") return builtin(ExprKind::Choose, 2, 64);
    std::string name = identifier();
    if (is_punct("(")) {
      auto e = Expr::make(ExprKind::Call, at, arguments());
      e->name = std::move(name);
      return e;
    }
    return Expr::var(std::move(name), at);
  }
};

}  // namespace detail

/// Parses ERC source text. Throws SyntaxError with line and column.
inline Program parse(std::string_view source, const std::string& file = "<input>") {
  return detail::Parser(source, file).program();
}

}  // namespace erc::lang
