#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace erc::core {

/// Exact binary rational mantissa * 2^exponent, kept in normal form
/// (odd mantissa, or mantissa == 0 with exponent == 0).
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long v) : mantissa_(v) { normalize(); }  // NOLINT(google-explicit-constructor)
  explicit Dyadic(mpz_class m, std::int64_t e = 0) : mantissa_(std::move(m)), exponent_(e) { normalize(); }

  static Dyadic pow2(std::int64_t e) { return Dyadic(mpz_class(1), e); }

  const mpz_class& mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }
  int sign() const { return sgn(mantissa_); }
  bool is_zero() const { return mantissa_ == 0; }

  mpq_class to_rational() const {
    mpq_class q(mantissa_);
    if (exponent_ > 0) {
      mpz_class num = mantissa_;
      mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(exponent_));
      q = mpq_class(num);
    } else if (exponent_ < 0) {
      mpz_class den(1);
      mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-exponent_));
      q = mpq_class(mantissa_, den);
      q.canonicalize();
    }
    return q;
  }

  double to_double() const { return to_rational().get_d(); }

  /// Largest multiple of 2^grid that is <= *this.
  Dyadic floor_to(std::int64_t grid) const {
    if (exponent_ >= grid || is_zero()) return *this;
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(grid - exponent_));
    return Dyadic(std::move(q), grid);
  }

  /// Smallest multiple of 2^grid that is >= *this.
  Dyadic ceil_to(std::int64_t grid) const {
    if (exponent_ >= grid || is_zero()) return *this;
    mpz_class q;
    mpz_cdiv_q_2exp(q.get_mpz_t(), mantissa_.get_mpz_t(), static_cast<mp_bitcnt_t>(grid - exponent_));
    return Dyadic(std::move(q), grid);
  }

  /// floor / ceil of num/den on the grid 2^grid.
  static Dyadic quotient_floor(const Dyadic& num, const Dyadic& den, std::int64_t grid) {
    return quotient(num, den, grid, false);
  }
  static Dyadic quotient_ceil(const Dyadic& num, const Dyadic& den, std::int64_t grid) {
    return quotient(num, den, grid, true);
  }

  /// Rational r rounded down / up to the grid 2^grid.
  static Dyadic from_rational_floor(const mpq_class& r, std::int64_t grid) {
    return quotient_rational(r.get_num(), r.get_den(), grid, false);
  }
  static Dyadic from_rational_ceil(const mpq_class& r, std::int64_t grid) {
    return quotient_rational(r.get_num(), r.get_den(), grid, true);
  }

  /// Number of bits needed for |mantissa| plus the exponent, i.e. the
  /// smallest k with |value| < 2^k (value != 0).
  std::int64_t magnitude_bits() const {
    if (is_zero()) return INT64_MIN / 4;
    return static_cast<std::int64_t>(mpz_sizeinbase(mantissa_.get_mpz_t(), 2)) + exponent_;
  }

  Dyadic operator-() const { return Dyadic(-mantissa_, exponent_); }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.exponent_ == b.exponent_) return Dyadic(a.mantissa_ + b.mantissa_, a.exponent_);
    const Dyadic& lo = a.exponent_ < b.exponent_ ? a : b;
    const Dyadic& hi = a.exponent_ < b.exponent_ ? b : a;
    mpz_class shifted;
    mpz_mul_2exp(shifted.get_mpz_t(), hi.mantissa_.get_mpz_t(),
                 static_cast<mp_bitcnt_t>(hi.exponent_ - lo.exponent_));
    return Dyadic(shifted + lo.mantissa_, lo.exponent_);
  }
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    return Dyadic(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
  }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    int s = (a - b).sign();
    return s < 0 ? std::strong_ordering::less : s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }

  friend Dyadic abs(const Dyadic& a) { return a.sign() < 0 ? -a : a; }

  /// Trace serialization: "m*2^e".
  std::string to_string() const { return mantissa_.get_str() + "*2^" + std::to_string(exponent_); }

  static Dyadic parse(std::string_view text) {
    auto star = text.find("*2^");
    if (star == std::string_view::npos) throw std::invalid_argument("malformed dyadic: " + std::string(text));
    mpz_class m;
    if (m.set_str(std::string(text.substr(0, star)), 10) != 0)
      throw std::invalid_argument("malformed dyadic mantissa: " + std::string(text));
    return Dyadic(std::move(m), std::stoll(std::string(text.substr(star + 3))));
  }

 private:
  void normalize() {
    if (mantissa_ == 0) {
      exponent_ = 0;
      return;
    }
    auto tz = mpz_scan1(mantissa_.get_mpz_t(), 0);
    if (tz > 0) {
      mpz_fdiv_q_2exp(mantissa_.get_mpz_t(), mantissa_.get_mpz_t(), tz);
      exponent_ += static_cast<std::int64_t>(tz);
    }
  }

  static Dyadic quotient(const Dyadic& num, const Dyadic& den, std::int64_t grid, bool up) {
    if (den.is_zero()) throw std::domain_error("dyadic quotient by zero");
    // num/den = (mn/md) * 2^(en - ed)
    std::int64_t shift = num.exponent_ - den.exponent_;
    mpz_class n = num.mantissa_, d = den.mantissa_;
    if (shift >= 0)
      mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    else
      mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
    return quotient_rational(n, d, grid, up);
  }

  static Dyadic quotient_rational(mpz_class n, mpz_class d, std::int64_t grid, bool up) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (grid >= 0)
      mpz_mul_2exp(d.get_mpz_t(), d.get_mpz_t(), static_cast<mp_bitcnt_t>(grid));
    else
      mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), static_cast<mp_bitcnt_t>(-grid));
    mpz_class q;
    if (up)
      mpz_cdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    else
      mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return Dyadic(std::move(q), grid);
  }

  mpz_class mantissa_{0};
  std::int64_t exponent_ = 0;
};

}  // namespace erc::core
