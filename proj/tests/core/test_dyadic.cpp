#include "erc/core/interval.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using erc::core::Dyadic;
using erc::core::DyadicInterval;
using erc::testing::pow2q;

TEST(Dyadic, NormalFormStripsTrailingZeros) {
  Dyadic d(mpz_class(12), 3);  // 12 * 8 = 3 * 2^5
  EXPECT_EQ(d.mantissa(), 3);
  EXPECT_EQ(d.exponent(), 5);
  Dyadic z(mpz_class(0), 17);
  EXPECT_EQ(z.exponent(), 0);
}

TEST(Dyadic, NormalizationPreservesValue) {
  erc::testing::RationalGen gen(7);
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> exp(-80, 80);
  for (int i = 0; i < 500; ++i) {
    mpz_class m = gen.next().get_num() * 64;
    int e = exp(rng);
    Dyadic d(m, e);
    EXPECT_EQ(d.to_rational(), mpq_class(m) * pow2q(e));
    if (d.mantissa() != 0) {
      EXPECT_TRUE(mpz_odd_p(d.mantissa().get_mpz_t()));
    }
  }
}

TEST(Dyadic, ArithmeticMatchesRationals) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<long> mant(-100000, 100000);
  std::uniform_int_distribution<int> exp(-40, 40);
  for (int i = 0; i < 500; ++i) {
    Dyadic a(mpz_class(mant(rng)), exp(rng)), b(mpz_class(mant(rng)), exp(rng));
    EXPECT_EQ((a + b).to_rational(), a.to_rational() + b.to_rational());
    EXPECT_EQ((a - b).to_rational(), a.to_rational() - b.to_rational());
    EXPECT_EQ((a * b).to_rational(), a.to_rational() * b.to_rational());
    EXPECT_EQ(a < b, a.to_rational() < b.to_rational());
  }
}

TEST(Dyadic, GridRoundingIsDirected) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> mant(-1000000, 1000000);
  for (int i = 0; i < 300; ++i) {
    Dyadic a(mpz_class(mant(rng)), -20);
    for (int g : {-10, -3, 0, 4}) {
      Dyadic lo = a.floor_to(g), hi = a.ceil_to(g);
      EXPECT_LE(lo, a);
      EXPECT_GE(hi, a);
      EXPECT_LE((hi - lo).to_rational(), pow2q(g));
      EXPECT_GE(lo.exponent() >= g || lo.is_zero(), true);
    }
  }
}

TEST(Dyadic, QuotientBracketsTrueValue) {
  erc::testing::RationalGen gen(19);
  for (int i = 0; i < 300; ++i) {
    mpq_class q = gen.next();
    if (q == 0) continue;
    Dyadic den(q.get_num()), num(q.get_den());
    for (int g : {-30, -5, 0}) {
      Dyadic lo = Dyadic::quotient_floor(num, den, g);
      Dyadic hi = Dyadic::quotient_ceil(num, den, g);
      mpq_class truth = 1 / q;
      EXPECT_LE(lo.to_rational(), truth);
      EXPECT_GE(hi.to_rational(), truth);
      EXPECT_LE(hi.to_rational() - lo.to_rational(), pow2q(g));
    }
  }
}

TEST(Dyadic, SerializesAsMantissaTimesPowerOfTwo) {
  Dyadic d(mpz_class(-3), -7);
  EXPECT_EQ(d.to_string(), "-3*2^-7");
  EXPECT_EQ(Dyadic::parse("-3*2^-7"), d);
  EXPECT_EQ(Dyadic::parse(Dyadic(0L).to_string()), Dyadic(0L));
  EXPECT_THROW(Dyadic::parse("1.5"), std::invalid_argument);
}

TEST(DyadicInterval, OperationsEncloseAllPointSums) {
  DyadicInterval a(Dyadic(-1), Dyadic(2)), b(Dyadic(3), Dyadic(5));
  auto prod = a * b;
  EXPECT_EQ(prod.lo(), Dyadic(-5));
  EXPECT_EQ(prod.hi(), Dyadic(10));
  EXPECT_EQ((a - b).lo(), Dyadic(-6));
  EXPECT_EQ(abs(a).lo(), Dyadic(0L));
  EXPECT_THROW(a.reciprocal(-4), std::domain_error);
  auto r = b.reciprocal(-10);
  EXPECT_TRUE(r.contains(mpq_class(1, 4)));
  EXPECT_TRUE(r.contains(mpq_class(1, 5)));
}
