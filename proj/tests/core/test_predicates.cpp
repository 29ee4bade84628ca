#include "erc/core/predicates.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace erc::core;

namespace {

RealNum q(long n, long d = 1) { return RealNum::from_rational(mpq_class(n, d)); }

LazyBoolPtr gt(RealNum a, RealNum b) { return std::make_shared<GreaterTest>(std::move(a), std::move(b)); }
LazyBoolPtr lit(bool v) { return std::make_shared<ConstBool>(v); }
LazyBoolPtr never() { return std::make_shared<Diverging>(); }
LazyBoolPtr after(std::uint64_t k) { return std::make_shared<TrueAfter>(k); }

EvalBudget small_budget() {
  EvalBudget b;
  b.max_steps = 200000;
  b.min_precision = -512;
  return b;
}

}  // namespace

TEST(PartialGreater, DecidesDistinctValues) {
  EXPECT_TRUE(gt_partial(q(1, 3), q(1, 4)));
  EXPECT_FALSE(gt_partial(q(-2), q(1, 1000)));
  RealNum tiny = RealNum::iota(-300);
  EXPECT_TRUE(gt_partial(tiny, RealNum()));
}

TEST(PartialGreater, EqualValuesRunOutOfBudget) {
  RealNum third = q(1, 3);
  RealNum also = RealNum::from_integer(1) - q(2, 3);
  EXPECT_THROW(gt_partial(third, also, small_budget()), BudgetExhausted);
  EXPECT_THROW(gt_partial(RealNum(), RealNum(), small_budget()), BudgetExhausted);
}

TEST(PartialGreater, AgreesWithRationalOrderOnRandomPairs) {
  erc::testing::RationalGen gen(1234, 100000, 1000);
  for (int i = 0; i < 1000; ++i) {
    mpq_class a = gen.next(), b = gen.next();
    if (a == b) continue;
    EXPECT_EQ(gt_partial(RealNum::from_rational(a), RealNum::from_rational(b)), a > b);
  }
}

// choose(a, b) against the truth table:
//   a true, b undefined -> 0;  a undefined, b true -> 1;
//   both true -> policy;       both false / undefined -> undefined.
TEST(Choose, TruthTable) {
  auto run = [](LazyBoolPtr a, LazyBoolPtr b, ChoicePolicy p = ChoicePolicy::left()) {
    return choose({std::move(a), std::move(b)}, p, small_budget()).index;
  };
  EXPECT_EQ(run(lit(true), never()), 0u);
  EXPECT_EQ(run(never(), lit(true)), 1u);
  EXPECT_EQ(run(lit(true), lit(false)), 0u);
  EXPECT_EQ(run(lit(false), lit(true)), 1u);
  EXPECT_EQ(run(lit(true), lit(true), ChoicePolicy::left()), 0u);
  EXPECT_EQ(run(lit(true), lit(true), ChoicePolicy::right()), 1u);
  EXPECT_THROW(run(lit(false), lit(false)), BudgetExhausted);
  EXPECT_THROW(run(lit(false), never()), BudgetExhausted);
  EXPECT_THROW(run(never(), never()), BudgetExhausted);
  // undefined comparison next to a true one
  EXPECT_EQ(run(gt(q(1, 3), RealNum::from_integer(1) - q(2, 3)), lit(true)), 1u);
}

TEST(Choose, DivergingBranchDoesNotStarveTrueBranch) {
  for (std::uint64_t k : {1ull, 10ull, 1000ull, 10000ull}) {
    EvalBudget b;
    b.max_steps = 10 * k + 10 * TrueAfter::kQuantum;
    auto out = choose({never(), after(k)}, ChoicePolicy::left(), b);
    EXPECT_EQ(out.index, 1u) << k;
    out = choose({after(k), never()}, ChoicePolicy::right(), b);
    EXPECT_EQ(out.index, 0u) << k;
  }
}

TEST(Choose, RecordsBranchStates) {
  auto out = choose({lit(false), lit(true), never()}, ChoicePolicy::left(), small_budget());
  EXPECT_EQ(out.index, 1u);
  ASSERT_EQ(out.states.size(), 3u);
  EXPECT_EQ(out.states[0], Truth::False);
  EXPECT_EQ(out.states[1], Truth::True);
  EXPECT_EQ(out.states[2], Truth::Unknown);
}

TEST(Choose, SeededRandomIsReproducible) {
  std::vector<std::size_t> first, second;
  for (int round = 0; round < 2; ++round) {
    Chooser chooser(ChoicePolicy::random(42));
    StepMeter meter(small_budget());
    auto& out = round == 0 ? first : second;
    for (int i = 0; i < 64; ++i) out.push_back(choose({lit(true), lit(true), lit(true)}, chooser, meter).index);
  }
  EXPECT_EQ(first, second);
  bool varied = false;
  for (auto i : first) varied = varied || i != first[0];
  EXPECT_TRUE(varied);
}

TEST(Junction, ConjunctionAndDisjunction) {
  StepMeter m(small_budget());
  JunctionBool a(true, {gt(q(2), q(1)), gt(q(1, 3), q(1, 4))});
  while (!a.settled()) a.step(m);
  EXPECT_EQ(a.state(), Truth::True);
  JunctionBool o(false, {never(), gt(q(2), q(1))});
  while (!o.settled()) o.step(m);
  EXPECT_EQ(o.state(), Truth::True);
  JunctionBool f(true, {gt(RealNum(), RealNum()), lit(false)});
  while (!f.settled()) f.step(m);
  EXPECT_EQ(f.state(), Truth::False);
  NotBool n(gt(q(1), q(2)));
  while (!n.settled()) n.step(m);
  EXPECT_EQ(n.state(), Truth::True);
}

TEST(SoftGreater, GuaranteesHold) {
  // 1 means x > -2^p, 0 means x < 2^p
  std::mt19937_64 rng(77);
  erc::testing::RationalGen gen(78, 4000, 1024);
  for (int i = 0; i < 500; ++i) {
    mpq_class x = gen.next();
    std::int64_t p = -static_cast<std::int64_t>(rng() % 12);
    int r = soft_gt(RealNum::from_rational(x), p, ChoicePolicy::random(i), small_budget());
    mpq_class bound = erc::testing::pow2q(p);
    if (r == 1) EXPECT_GT(x, -bound);
    else EXPECT_LT(x, bound);
  }
}

TEST(SoftGreater, IsTotalOnTheBoundary) {
  for (std::int64_t p : {0, -3, -10}) {
    RealNum at = RealNum::iota(p);
    RealNum third = q(1, 3) - q(1, 3);  // zero, not known exactly
    EXPECT_NO_THROW(soft_gt(at, p, ChoicePolicy::left(), small_budget()));
    EXPECT_NO_THROW(soft_gt(-at, p, ChoicePolicy::left(), small_budget()));
    EXPECT_NO_THROW(soft_gt(third, p, ChoicePolicy::left(), small_budget()));
    EXPECT_EQ(soft_gt(at, p, ChoicePolicy::left(), small_budget()), 1);
    EXPECT_EQ(soft_gt(-at, p, ChoicePolicy::left(), small_budget()), 0);
  }
  // clear cases
  EXPECT_EQ(soft_gt(q(5), 0, ChoicePolicy::left()), 1);
  EXPECT_EQ(soft_gt(q(-5), 0, ChoicePolicy::right()), 0);
  // x = 0: both branches true, policy decides
  EXPECT_EQ(soft_gt(RealNum(), -4, ChoicePolicy::left()), 0);
  EXPECT_EQ(soft_gt(RealNum(), -4, ChoicePolicy::right()), 1);
}
