#include "erc/lang.hpp"

#include <gtest/gtest.h>

using namespace erc::lang;

namespace {

std::string corpus(const std::string& name) { return read_file(std::string(ERC_CORPUS_DIR) + "/" + name); }

int count_loops(const StmtPtr& s) {
  if (!s) return 0;
  int n = s->kind == StmtKind::While;
  for (const auto& c : s->stmts) n += count_loops(c);
  return n + count_loops(s->then_branch) + count_loops(s->else_branch) + count_loops(s->body);
}

template <class E>
E expect_error(const std::string& src) {
  try {
    load(src, "t.erc");
  } catch (const E& e) {
    return e;
  }
  ADD_FAILURE() << "no error for: " << src;
  throw std::runtime_error("unreachable");
}

}  // namespace

TEST(Parse, IntegerFunction) {
  Program p = parse("INTEGER f(INTEGER n){ RETURN n + 1; }");
  ASSERT_EQ(p.functions.size(), 1u);
  EXPECT_EQ(p.functions[0].name, "f");
  EXPECT_EQ(p.functions[0].result_type.base, Base::Integer);
  auto c = typecheck(p);
  EXPECT_TRUE(c.function("f").result->is_integer());
}

TEST(Parse, RoundHasTwoLoops) {
  Program p = parse(corpus("round.erc"), "round.erc");
  ASSERT_NE(p.find("Round"), nullptr);
  EXPECT_EQ(count_loops(p.find("Round")->body), 2);
  EXPECT_NO_THROW(typecheck(p));
}

TEST(Parse, AnnotationsAttachToFunctionsAndLoops) {
  Program p = parse(corpus("trisection.erc"), "trisection.erc");
  const FunctionDef* t = p.find("Trisection");
  ASSERT_NE(t, nullptr);
  ASSERT_EQ(t->annotations.size(), 2u);
  EXPECT_EQ(t->annotations[0].key, "pre");
  EXPECT_EQ(t->annotations[0].text, "cont(f) && uniq(f, 0, 1)");
  const auto& loop = t->body->stmts[2];
  ASSERT_EQ(loop->kind, StmtKind::While);
  ASSERT_EQ(loop->annotations.size(), 3u);
  EXPECT_EQ(loop->annotations[2].key, "epsilon");
  EXPECT_TRUE(p.find("f")->is_prototype());
}

TEST(Parse, WholeCorpusChecks) {
  for (const char* f : {"round.erc", "trisection.erc", "gauss.erc", "exp.erc"})
    EXPECT_NO_THROW(load(corpus(f), f)) << f;
}

TEST(Parse, RealFunctionNeedsPrecisionParameter) {
  auto e = expect_error<SyntaxError>("REAL f(REAL x){ RETURN x; }");
  EXPECT_EQ(e.span().line, 1);
  EXPECT_NE(e.message().find("precision"), std::string::npos);
}

TEST(Parse, SyntaxErrorsCarryLineAndColumn) {
  auto e = expect_error<SyntaxError>("INTEGER f(INTEGER n){\n  RETURN n + ;\n}");
  EXPECT_EQ(e.span().line, 2);
  EXPECT_EQ(e.span().column, 14);
  expect_error<SyntaxError>("INTEGER f(INTEGER n){ n := 1 }");
  expect_error<SyntaxError>("INTEGER f(INTEGER n, INTEGER n){ RETURN n; }");
  expect_error<SyntaxError>("INTEGER f(INTEGER n){ RETURN 0 < n < 2; }");
  expect_error<SyntaxError>("INTEGER f(INTEGER n){ #; }");
}

TEST(Check, RealsAndIntegersDoNotMix) {
  auto e = expect_error<SortError>("REAL g(INTEGER p, REAL x, INTEGER n){ RETURN x + n; }");
  EXPECT_NE(e.message().find("iota"), std::string::npos);
  EXPECT_NO_THROW(load("REAL g(INTEGER p, REAL x, INTEGER n){ RETURN x + iota(n); }"));
}

TEST(Check, PresburgerRestriction) {
  expect_error<SortError>("INTEGER g(INTEGER n, INTEGER m){ RETURN n * m; }");
  auto c = load("INTEGER g(INTEGER n, INTEGER m){ RETURN 2 * m; }");
  const auto& ret = c.function("g").body->stmts[0]->value;
  EXPECT_EQ(ret->kind, ExprKind::Scale);
  EXPECT_EQ(ret->number, 2);
  expect_error<SortError>("INTEGER g(INTEGER m){ RETURN 70000 * m; }");
  expect_error<SortError>("INTEGER g(INTEGER m){ RETURN m / 2; }");
}

TEST(Check, ComparisonsBySort) {
  // partial > on reals, total > / = on integers; = on reals is rejected
  EXPECT_NO_THROW(load("INTEGER g(REAL x){ RETURN x > 1; }"));
  EXPECT_NO_THROW(load("INTEGER g(INTEGER n){ RETURN n = 1; }"));
  expect_error<SortError>("INTEGER g(REAL x){ RETURN x = 1; }");
  expect_error<SortError>("INTEGER g(REAL x){ RETURN x >= 1; }");
  auto c = load("INTEGER g(REAL x){ RETURN x > 1; }");
  const auto& gt = c.function("g").body->stmts[0]->value;
  EXPECT_TRUE(gt->args[1]->sort->is_real());  // the literal 1 became REAL
}

TEST(Check, GuardsAndReturns) {
  expect_error<SortError>("INTEGER g(REAL x){ IF x THEN { RETURN 1; } ELSE { RETURN 0; } }");
  expect_error<SortError>("INTEGER g(INTEGER n){ IF n > 0 THEN { RETURN 1; } }");
  expect_error<SortError>("INTEGER g(INTEGER n){ WHILE n > 0 DO { RETURN 1; } }");
  expect_error<SortError>("INTEGER g(INTEGER n){ RETURN h(n); }");
  expect_error<SortError>("INTEGER g(INTEGER n){ RETURN m; }");
  expect_error<SortError>("REAL g(INTEGER p){ RETURN 1; } INTEGER h(INTEGER n){ RETURN g(n); }");
}

TEST(Check, ConstsSizeArraysAndCanBeOverridden) {
  const char* src = "CONST d := 2; INTEGER g(INTEGER n){ INTEGER[d*d] a; RETURN d + n; }";
  auto c = load(src);
  EXPECT_EQ(c.consts.at("d"), 2);
  EXPECT_EQ(c.function("g").body->stmts[0]->sort->length, 4);
  auto c3 = load(src, "t.erc", {{"d", mpz_class(3)}});
  EXPECT_EQ(c3.function("g").body->stmts[0]->sort->length, 9);
  EXPECT_THROW(load(src, "t.erc", {{"e", mpz_class(3)}}), std::invalid_argument);
}

TEST(Check, CheckingDoesNotAlterTheParsedProgram) {
  Program p = parse("INTEGER g(INTEGER m){ RETURN 2 * m; }");
  auto a = typecheck(p);
  EXPECT_EQ(p.functions[0].body->stmts[0]->value->kind, ExprKind::Mul);
  EXPECT_FALSE(p.functions[0].body->stmts[0]->value->sort);
}
