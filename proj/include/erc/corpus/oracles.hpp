#pragma once

// Exact rational references for the corpus harness. None of this goes
// through the evaluator: everything is mpq arithmetic with explicit,
// directed rounding.

#include "erc/corpus/functions.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <utility>
#include <vector>

namespace erc::corpus::oracle {

inline mpq_class pow2(std::int64_t e) {
  mpq_class r(1);
  if (e >= 0) mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  else mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  return r;
}

/// Largest multiple of 2^-bits that is <= v.
inline mpq_class floor_grid(const mpq_class& v, long bits) {
  mpq_class scaled = v * pow2(bits);
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  mpq_class r(f);
  return r * pow2(-bits);
}

inline mpq_class ceil_grid(const mpq_class& v, long bits) { return -floor_grid(-v, bits); }

/// [lo, hi] containing exp(x) for x >= 0, from
/// (1 + x/n)^n <= exp(x) <= (1 + x/n)^(n+1) with n = 2^log2n.
inline std::pair<mpq_class, mpq_class> exp_bracket(const mpq_class& x, int log2n, long grid_bits = 256) {
  mpq_class c = 1 + x * pow2(-log2n);
  mpq_class lo = floor_grid(c, grid_bits), hi = ceil_grid(c, grid_bits);
  const mpq_class c_hi = hi;
  for (int i = 0; i < log2n; ++i) {
    lo = floor_grid(lo * lo, grid_bits);
    hi = ceil_grid(hi * hi, grid_bits);
  }
  return {lo, ceil_grid(hi * c_hi, grid_bits)};
}

/// Interval of width <= 2^-bits around the unique root of f in [0, 1], by
/// sign bisection on rationals. Requires f(0) f(1) < 0.
inline std::pair<mpq_class, mpq_class> root_bracket(const Polynomial& f, long bits) {
  mpq_class lo = 0, hi = 1;
  int s_lo = sgn(f(lo));
  while (hi - lo > pow2(-bits)) {
    mpq_class mid = (lo + hi) / 2;
    int s = sgn(f(mid));
    if (s == 0) return {mid, mid};
    if (s == s_lo) lo = mid;
    else hi = mid;
  }
  return {lo, hi};
}

/// Rank of a row-major rows x cols matrix by fraction-free elimination.
inline int rank(std::vector<mpq_class> a, int rows, int cols) {
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int piv = -1;
    for (int i = r; i < rows && piv < 0; ++i)
      if (a[i * cols + c] != 0) piv = i;
    if (piv < 0) continue;
    for (int j = 0; j < cols; ++j) std::swap(a[r * cols + j], a[piv * cols + j]);
    for (int i = r + 1; i < rows; ++i) {
      mpq_class factor = a[i * cols + c] / a[r * cols + c];
      for (int j = c; j < cols; ++j) a[i * cols + j] -= factor * a[r * cols + j];
    }
    ++r;
  }
  return r;
}

/// max_i |(A x)_i| for a row-major d x d matrix.
inline mpq_class residual(const std::vector<mpq_class>& a, const std::vector<mpq_class>& x, int d) {
  mpq_class worst = 0;
  for (int i = 0; i < d; ++i) {
    mpq_class s = 0;
    for (int j = 0; j < d; ++j) s += a[i * d + j] * x[j];
    if (abs(s) > worst) worst = abs(s);
  }
  return worst;
}

}  // namespace erc::corpus::oracle
