#pragma once

#include "erc/core/dyadic.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace erc::core {

/// Closed interval [lo, hi] with dyadic endpoints. Every operation rounds outward.
class DyadicInterval {
 public:
  DyadicInterval() = default;
  explicit DyadicInterval(Dyadic point) : lo_(point), hi_(std::move(point)) {}
  DyadicInterval(Dyadic lo, Dyadic hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (hi_ < lo_) throw std::invalid_argument("interval with lo > hi");
  }

  const Dyadic& lo() const { return lo_; }
  const Dyadic& hi() const { return hi_; }
  Dyadic width() const { return hi_ - lo_; }
  bool is_point() const { return lo_ == hi_; }

  bool contains(const mpq_class& v) const { return lo_.to_rational() <= v && v <= hi_.to_rational(); }
  bool contains(const Dyadic& v) const { return lo_ <= v && v <= hi_; }
  bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }

  /// width <= 2^p
  bool width_within(std::int64_t p) const { return width() <= Dyadic::pow2(p); }

  /// Upper bound on |v| over the interval.
  Dyadic magnitude() const { return std::max(abs(lo_), abs(hi_)); }
  /// Lower bound on |v| over the interval (0 when it straddles zero).
  Dyadic mignitude() const {
    if (contains_zero()) return Dyadic{};
    return std::min(abs(lo_), abs(hi_));
  }

  bool overlaps(const DyadicInterval& o) const { return !(hi_ < o.lo_ || o.hi_ < lo_); }

  DyadicInterval intersect(const DyadicInterval& o) const {
    Dyadic lo = std::max(lo_, o.lo_);
    Dyadic hi = std::min(hi_, o.hi_);
    if (hi < lo) throw std::logic_error("disjoint enclosures of one real: unsound approximation");
    return {std::move(lo), std::move(hi)};
  }

  /// Outward rounding of both endpoints onto the grid 2^grid.
  DyadicInterval round_out(std::int64_t grid) const { return {lo_.floor_to(grid), hi_.ceil_to(grid)}; }

  DyadicInterval operator-() const { return {-hi_, -lo_}; }
  friend DyadicInterval operator+(const DyadicInterval& a, const DyadicInterval& b) {
    return {a.lo_ + b.lo_, a.hi_ + b.hi_};
  }
  friend DyadicInterval operator-(const DyadicInterval& a, const DyadicInterval& b) {
    return {a.lo_ - b.hi_, a.hi_ - b.lo_};
  }
  friend DyadicInterval operator*(const DyadicInterval& a, const DyadicInterval& b) {
    Dyadic p1 = a.lo_ * b.lo_, p2 = a.lo_ * b.hi_, p3 = a.hi_ * b.lo_, p4 = a.hi_ * b.hi_;
    return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
  }

  /// Enclosure of 1/x on the grid 2^grid. Requires 0 not in the interval.
  DyadicInterval reciprocal(std::int64_t grid) const {
    if (contains_zero()) throw std::domain_error("reciprocal of interval containing zero");
    const Dyadic one(1);
    return {Dyadic::quotient_floor(one, hi_, grid), Dyadic::quotient_ceil(one, lo_, grid)};
  }

  friend DyadicInterval abs(const DyadicInterval& a) {
    if (a.lo_.sign() >= 0) return a;
    if (a.hi_.sign() <= 0) return -a;
    return {Dyadic{}, std::max(-a.lo_, a.hi_)};
  }
  friend DyadicInterval max(const DyadicInterval& a, const DyadicInterval& b) {
    return {std::max(a.lo_, b.lo_), std::max(a.hi_, b.hi_)};
  }

  friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;

  std::string to_string() const { return "[" + lo_.to_string() + ", " + hi_.to_string() + "]"; }

 private:
  Dyadic lo_;
  Dyadic hi_;
};

}  // namespace erc::core
