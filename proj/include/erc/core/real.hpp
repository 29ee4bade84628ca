#pragma once

#include "erc/core/budget.hpp"
#include "erc/core/interval.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <cstdlib>
#include <utility>

namespace erc::core {

class RealNum;

namespace detail {

// Precision requests are snapped down to this lattice so that nodes reached
// along different paths share memo entries.
inline constexpr std::int64_t kPrecisionQuantum = 4;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

class Node {
 public:
  explicit Node(std::optional<Dyadic> point = std::nullopt) : point_(std::move(point)) {}
  virtual ~Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  DyadicInterval approx(std::int64_t p, StepMeter& meter) const {
    meter.require_precision(p);
    if (point_) return DyadicInterval(*point_);
    std::int64_t q = floor_div(p, kPrecisionQuantum) * kPrecisionQuantum;
    if (q < meter.budget().min_precision) q = p;
    {
      std::lock_guard lock(mu_);
      if (auto it = memo_.find(q); it != memo_.end()) return it->second;
    }
    meter.charge();
    DyadicInterval result = compute(q, meter);
    std::lock_guard lock(mu_);
    auto [it, inserted] = memo_.emplace(q, result);
    if (inserted) best_ = best_ ? best_->intersect(result) : result;
    return it->second;
  }

  std::optional<DyadicInterval> best() const {
    if (point_) return DyadicInterval(*point_);
    std::lock_guard lock(mu_);
    return best_;
  }

  const std::optional<Dyadic>& point() const { return point_; }

 protected:
  virtual DyadicInterval compute(std::int64_t p, StepMeter& meter) const = 0;

 private:
  std::optional<Dyadic> point_;
  mutable std::mutex mu_;
  mutable std::map<std::int64_t, DyadicInterval> memo_;
  mutable std::optional<DyadicInterval> best_;
};

using NodePtr = std::shared_ptr<const Node>;

class PointNode final : public Node {
 public:
  explicit PointNode(Dyadic v) : Node(std::move(v)) {}

 protected:
  DyadicInterval compute(std::int64_t, StepMeter&) const override { return DyadicInterval(*point()); }
};

class RationalNode final : public Node {
 public:
  explicit RationalNode(mpq_class v) : value_(std::move(v)) { value_.canonicalize(); }

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter&) const override {
    return {Dyadic::from_rational_floor(value_, p), Dyadic::from_rational_ceil(value_, p)};
  }

 private:
  mpq_class value_;
};

class NegNode final : public Node {
 public:
  explicit NegNode(NodePtr a) : a_(std::move(a)) {}

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter& m) const override { return -a_->approx(p, m); }

 private:
  NodePtr a_;
};

class SumNode final : public Node {
 public:
  SumNode(NodePtr a, NodePtr b, bool subtract) : a_(std::move(a)), b_(std::move(b)), subtract_(subtract) {}

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter& m) const override {
    DyadicInterval ia = a_->approx(p - 2, m);
    DyadicInterval ib = b_->approx(p - 2, m);
    return (subtract_ ? ia - ib : ia + ib).round_out(p - 2);
  }

 private:
  NodePtr a_, b_;
  bool subtract_;
};

// Smallest e with |x| + 1 <= 2^e, from the precision-0 enclosure.
inline std::int64_t magnitude_exponent(const Node& x, StepMeter& m) {
  Dyadic bound = x.approx(0, m).magnitude() + Dyadic(1);
  return bound.magnitude_bits();
}

class ProductNode final : public Node {
 public:
  ProductNode(NodePtr a, NodePtr b) : a_(std::move(a)), b_(std::move(b)) {}

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter& m) const override {
    std::int64_t ea = magnitude_exponent(*a_, m);
    std::int64_t eb = magnitude_exponent(*b_, m);
    // |a|*w(b) + |b|*w(a) <= 2^(p-3) + 2^(p-3); outward rounding adds < 2^(p-1).
    DyadicInterval ib = b_->approx(std::min<std::int64_t>(0, p - ea - 3), m);
    DyadicInterval ia = a_->approx(std::min<std::int64_t>(0, p - eb - 3), m);
    return (ia * ib).round_out(p - 2);
  }

 private:
  NodePtr a_, b_;
};

class ReciprocalNode final : public Node {
 public:
  explicit ReciprocalNode(NodePtr b) : b_(std::move(b)) {}

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter& m) const override {
    const Separation& sep = separate(m);
    std::int64_t q = std::min(sep.log2_lower - 1, p + 2 * sep.log2_lower - 3);
    DyadicInterval j = b_->approx(q, m).intersect(sep.enclosure);
    return j.reciprocal(p - 2);
  }

 private:
  struct Separation {
    DyadicInterval enclosure;
    std::int64_t log2_lower;  // 2^log2_lower <= |b|
  };

  // Refines the denominator at 2^-1, 2^-2, 2^-4, ... until zero is excluded.
  const Separation& separate(StepMeter& m) const {
    {
      std::lock_guard lock(mu_);
      if (sep_) return *sep_;
    }
    const std::int64_t floor = m.budget().min_precision;
    for (std::int64_t q = -1;; q *= 2) {
      if (q < floor) q = floor;
      DyadicInterval i = b_->approx(q, m);
      if (!i.contains_zero()) {
        std::int64_t lg = i.mignitude().magnitude_bits() - 1;
        std::lock_guard lock(mu_);
        if (!sep_) sep_ = Separation{i, lg};
        return *sep_;
      }
      if (q == floor)
        throw BudgetExhausted(BudgetExhausted::Cause::Precision,
                              "cannot separate divisor from zero (possible division by zero)");
    }
  }

  NodePtr b_;
  mutable std::mutex mu_;
  mutable std::optional<Separation> sep_;
};

class AbsNode final : public Node {
 public:
  explicit AbsNode(NodePtr a) : a_(std::move(a)) {}

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter& m) const override { return abs(a_->approx(p, m)); }

 private:
  NodePtr a_;
};

class MaxNode final : public Node {
 public:
  MaxNode(NodePtr a, NodePtr b) : a_(std::move(a)), b_(std::move(b)) {}

 protected:
  DyadicInterval compute(std::int64_t p, StepMeter& m) const override {
    return max(a_->approx(p, m), b_->approx(p, m));
  }

 private:
  NodePtr a_, b_;
};

}  // namespace detail

/// An exact real number, represented by a memoizing map from precision p to
/// an enclosing interval of width <= 2^p. Values are immutable and cheap to copy.
class RealNum {
 public:
  /// producer(q) must denote a real within 2^q of the limit value.
  using Producer = std::function<RealNum(std::int64_t, StepMeter&)>;

  RealNum() : RealNum(Dyadic{}) {}
  explicit RealNum(Dyadic v) : node_(std::make_shared<detail::PointNode>(std::move(v))) {}

  static RealNum from_integer(const mpz_class& n) { return RealNum(Dyadic(n)); }
  static RealNum from_integer(long n) { return RealNum(Dyadic(n)); }
  static RealNum from_rational(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    mpz_class den = c.get_den();
    // power-of-two denominators are exact dyadics
    if (mpz_popcount(den.get_mpz_t()) == 1)
      return RealNum(Dyadic(c.get_num(), -static_cast<std::int64_t>(mpz_sizeinbase(den.get_mpz_t(), 2) - 1)));
    return RealNum(std::make_shared<detail::RationalNode>(std::move(c)));
  }
  /// The binary precision embedding p -> 2^p.
  static RealNum iota(std::int64_t p) { return RealNum(Dyadic::pow2(p)); }

  static RealNum limit(Producer producer);
  static RealNum limit(std::function<RealNum(std::int64_t)> producer) {
    return limit(Producer([f = std::move(producer)](std::int64_t q, StepMeter&) { return f(q); }));
  }

  DyadicInterval approx(std::int64_t p, StepMeter& meter) const { return node_->approx(p, meter); }
  DyadicInterval approx(std::int64_t p, const EvalBudget& budget = {}) const {
    StepMeter meter(budget);
    return approx(p, meter);
  }

  /// Intersection of every enclosure computed so far (nullopt before the first).
  std::optional<DyadicInterval> best() const { return node_->best(); }

  /// Exact dyadic value when the number is known to be one.
  const std::optional<Dyadic>& exact() const { return node_->point(); }

  const void* identity() const { return node_.get(); }

  RealNum operator-() const {
    if (auto& e = exact()) return RealNum(-*e);
    return RealNum(std::make_shared<detail::NegNode>(node_));
  }
  friend RealNum operator+(const RealNum& a, const RealNum& b) {
    if (foldable(a, b)) return RealNum(*a.exact() + *b.exact());
    return RealNum(std::make_shared<detail::SumNode>(a.node_, b.node_, false));
  }
  friend RealNum operator-(const RealNum& a, const RealNum& b) {
    if (foldable(a, b)) return RealNum(*a.exact() - *b.exact());
    return RealNum(std::make_shared<detail::SumNode>(a.node_, b.node_, true));
  }
  friend RealNum operator*(const RealNum& a, const RealNum& b) {
    if (foldable(a, b)) return RealNum(*a.exact() * *b.exact());
    return RealNum(std::make_shared<detail::ProductNode>(a.node_, b.node_));
  }
  friend RealNum operator/(const RealNum& a, const RealNum& b) {
    const auto& db = b.exact();
    // division by a nonzero power of two stays exact
    if (db && !db->is_zero() && abs(db->mantissa()) == 1 && a.exact())
      return RealNum(*a.exact() * Dyadic(db->mantissa(), -db->exponent()));
    return a * reciprocal(b);
  }
  friend RealNum reciprocal(const RealNum& b) {
    return RealNum(std::make_shared<detail::ReciprocalNode>(b.node_));
  }
  friend RealNum abs(const RealNum& a) {
    if (auto& e = a.exact()) return RealNum(abs(*e));
    return RealNum(std::make_shared<detail::AbsNode>(a.node_));
  }
  friend RealNum max(const RealNum& a, const RealNum& b) {
    if (a.exact() && b.exact()) return RealNum(std::max(*a.exact(), *b.exact()));
    return RealNum(std::make_shared<detail::MaxNode>(a.node_, b.node_));
  }

 private:
  explicit RealNum(detail::NodePtr n) : node_(std::move(n)) {}

  // Exact dyadic operands are combined eagerly while their mantissas stay
  // small; beyond that, products like c^(2^k) would grow without bound.
  static constexpr std::size_t kFoldBits = 256;
  static bool foldable(const RealNum& a, const RealNum& b) {
    const auto& x = a.exact();
    const auto& y = b.exact();
    return x && y && mpz_sizeinbase(x->mantissa().get_mpz_t(), 2) <= kFoldBits &&
           mpz_sizeinbase(y->mantissa().get_mpz_t(), 2) <= kFoldBits &&
           std::llabs(x->exponent() - y->exponent()) <= static_cast<long long>(kFoldBits);
  }

  detail::NodePtr node_;
};

namespace detail {

class LimitNode final : public Node {
 public:
  explicit LimitNode(RealNum::Producer producer) : producer_(std::move(producer)) {}

 protected:
  // producer error 2^(q-2), inner enclosure width 2^(q-2), widened by 2^(q-2) each side
  DyadicInterval compute(std::int64_t q, StepMeter& m) const override {
    RealNum z = producer_(q - 2, m);
    DyadicInterval inner = z.approx(q - 2, m);
    Dyadic slack = Dyadic::pow2(q - 2);
    return {inner.lo() - slack, inner.hi() + slack};
  }

 private:
  RealNum::Producer producer_;
};

}  // namespace detail

inline RealNum RealNum::limit(Producer producer) {
  return RealNum(std::make_shared<detail::LimitNode>(std::move(producer)));
}

}  // namespace erc::core
