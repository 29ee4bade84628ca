#pragma once

// Independent exact-rational reference computations used by the tests.
// Nothing in here goes through RealNum.

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <utility>

namespace erc::testing {

inline mpq_class pow2q(std::int64_t e) {
  mpz_class one(1);
  mpz_class big;
  mpz_mul_2exp(big.get_mpz_t(), one.get_mpz_t(), static_cast<mp_bitcnt_t>(e < 0 ? -e : e));
  return e >= 0 ? mpq_class(big) : mpq_class(one, big);
}

/// Repeated doubling / halving.
inline mpq_class pow2_by_doubling(std::int64_t e) {
  mpq_class v(1);
  for (std::int64_t i = 0; i < e; ++i) v *= 2;
  for (std::int64_t i = 0; i > e; --i) v /= 2;
  return v;
}

/// Seeded rationals num/den with |num| <= max_num, 1 <= den <= max_den.
class RationalGen {
 public:
  explicit RationalGen(std::uint64_t seed, long max_num = 1000, long max_den = 64)
      : rng_(seed), num_(-max_num, max_num), den_(1, max_den) {}
  mpq_class next() {
    mpq_class q(num_(rng_), den_(rng_));
    q.canonicalize();
    return q;
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::uniform_int_distribution<long> num_;
  std::uniform_int_distribution<long> den_;
};

inline mpq_class floor_grid(const mpq_class& v, long bits) {
  mpq_class scaled = v * pow2q(bits);
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return mpq_class(f) / pow2q(bits);
}

inline mpq_class ceil_grid(const mpq_class& v, long bits) {
  mpq_class scaled = v * pow2q(bits);
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return mpq_class(c) / pow2q(bits);
}

/// Rational bracket [lo, hi] with lo <= (1+x/n)^n <= exp(x) <= (1+x/n)^(n+1) <= hi
/// for n = 2^log2n and x >= 0, using directed rounding on the grid 2^-grid_bits.
inline std::pair<mpq_class, mpq_class> exp_bracket(const mpq_class& x, int log2n, long grid_bits = 256) {
  mpq_class c = 1 + x / pow2q(log2n);
  mpq_class lo = floor_grid(c, grid_bits);
  mpq_class hi = ceil_grid(c, grid_bits);
  mpq_class c_hi = hi;
  for (int i = 0; i < log2n; ++i) {
    lo = floor_grid(lo * lo, grid_bits);
    hi = ceil_grid(hi * hi, grid_bits);
  }
  hi = ceil_grid(hi * c_hi, grid_bits);
  return {lo, hi};
}

/// Integer k with |x - k| < 1 exists as floor(x) and ceil(x); returns both.
inline std::pair<mpz_class, mpz_class> round_candidates(const mpq_class& x) {
  mpz_class f, c;
  mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return {f, c};
}

}  // namespace erc::testing
