#pragma once

#include "erc/core/real.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace erc::core {

enum class Truth { Unknown, True, False };

inline char truth_letter(Truth t) { return t == Truth::True ? 'T' : t == Truth::False ? 'F' : 'U'; }

/// A suspended boolean refinable in bounded steps. Once True or False has been
/// observed it never changes. `exhausted()` means refinement hit the precision
/// floor without deciding.
class LazyBool {
 public:
  virtual ~LazyBool() = default;

  Truth state() const { return state_; }
  bool exhausted() const { return exhausted_; }
  bool settled() const { return state_ != Truth::Unknown || exhausted_; }

  /// Advances by one scheduling quantum.
  Truth step(StepMeter& meter) {
    if (!settled()) advance(meter);
    return state_;
  }

 protected:
  virtual void advance(StepMeter& meter) = 0;
  void resolve(Truth t) { state_ = t; }
  void give_up() { exhausted_ = true; }

 private:
  Truth state_ = Truth::Unknown;
  bool exhausted_ = false;
};

using LazyBoolPtr = std::shared_ptr<LazyBool>;

class ConstBool final : public LazyBool {
 public:
  explicit ConstBool(bool v) : value_(v) {}

 protected:
  void advance(StepMeter&) override { resolve(value_ ? Truth::True : Truth::False); }

 private:
  bool value_;
};

/// x > y over the reals: refines both sides one binary digit per quantum.
class GreaterTest final : public LazyBool {
 public:
  GreaterTest(RealNum x, RealNum y) : x_(std::move(x)), y_(std::move(y)) {}

 protected:
  void advance(StepMeter& meter) override {
    if (precision_ < meter.budget().min_precision) {
      give_up();
      return;
    }
    std::optional<DyadicInterval> ix, iy;
    try {
      ix = x_.approx(precision_, meter);
      iy = y_.approx(precision_, meter);
    } catch (const BudgetExhausted& e) {
      // an operand that cannot be refined (e.g. 1/0) leaves this branch undecided
      if (e.cause() != BudgetExhausted::Cause::Precision) throw;
      give_up();
      return;
    }
    --precision_;
    if (ix->lo() > iy->hi())
      resolve(Truth::True);
    else if (ix->hi() < iy->lo())
      resolve(Truth::False);
  }

 private:
  RealNum x_, y_;
  std::int64_t precision_ = 0;
};

class NotBool final : public LazyBool {
 public:
  explicit NotBool(LazyBoolPtr a) : a_(std::move(a)) {}

 protected:
  void advance(StepMeter& meter) override {
    Truth t = a_->step(meter);
    if (t == Truth::True) resolve(Truth::False);
    else if (t == Truth::False) resolve(Truth::True);
    else if (a_->exhausted()) give_up();
  }

 private:
  LazyBoolPtr a_;
};

/// Strict conjunction / disjunction: defined as soon as the answer is forced.
class JunctionBool final : public LazyBool {
 public:
  JunctionBool(bool conjunction, std::vector<LazyBoolPtr> parts)
      : conjunction_(conjunction), parts_(std::move(parts)) {}

 protected:
  void advance(StepMeter& meter) override {
    const Truth absorbing = conjunction_ ? Truth::False : Truth::True;
    const Truth neutral = conjunction_ ? Truth::True : Truth::False;
    bool all_neutral = true;
    bool stuck = false;
    for (auto& part : parts_) {
      Truth t = part->step(meter);
      if (t == absorbing) {
        resolve(absorbing);
        return;
      }
      if (t != neutral) {
        all_neutral = false;
        if (part->exhausted()) stuck = true;
      }
    }
    if (all_neutral) resolve(neutral);
    else if (stuck) {
      // an exhausted part can only be overridden by the absorbing value
      bool others_settled = true;
      for (auto& part : parts_) others_settled = others_settled && part->settled();
      if (others_settled) give_up();
    }
  }

 private:
  bool conjunction_;
  std::vector<LazyBoolPtr> parts_;
};

/// Test hook: becomes true after `steps` evaluation steps.
class TrueAfter final : public LazyBool {
 public:
  static constexpr std::uint64_t kQuantum = 256;
  explicit TrueAfter(std::uint64_t steps) : remaining_(steps) {}

 protected:
  void advance(StepMeter& meter) override {
    std::uint64_t n = std::min(remaining_, kQuantum);
    meter.charge(n == 0 ? 1 : n);
    remaining_ -= n;
    if (remaining_ == 0) resolve(Truth::True);
  }

 private:
  std::uint64_t remaining_;
};

/// Test hook: a computation that never produces a value.
class Diverging final : public LazyBool {
 protected:
  void advance(StepMeter& meter) override { meter.charge(TrueAfter::kQuantum); }
};

/// x > y with the partial semantics: 1 if x > y, 0 if x < y, BudgetExhausted
/// (standing in for divergence) when the enclosures keep overlapping.
inline bool gt_partial(const RealNum& x, const RealNum& y, StepMeter& meter) {
  const std::int64_t floor = meter.budget().min_precision;
  for (std::int64_t p = 0;; p = p == 0 ? -1 : p * 2) {
    if (p < floor) p = floor;
    DyadicInterval ix = x.approx(p, meter);
    DyadicInterval iy = y.approx(p, meter);
    if (ix.lo() > iy.hi()) return true;
    if (ix.hi() < iy.lo()) return false;
    if (p == floor)
      throw BudgetExhausted(BudgetExhausted::Cause::Precision, "comparison undecided at precision floor");
  }
}

inline bool gt_partial(const RealNum& x, const RealNum& y, const EvalBudget& budget = {}) {
  StepMeter meter(budget);
  return gt_partial(x, y, meter);
}

struct ChooseOutcome {
  std::size_t index = 0;
  std::vector<Truth> states;  // branch states in the deciding round
  std::uint64_t rounds = 0;
};

/// Parallel OR: returns the index of some branch that evaluates to true.
/// Branches are advanced round-robin, one quantum each, so a diverging branch
/// cannot starve a true one. Ties within a round go to the policy.
inline ChooseOutcome choose(const std::vector<LazyBoolPtr>& branches, Chooser& chooser, StepMeter& meter) {
  if (branches.size() < 2) throw std::invalid_argument("choose needs at least two branches");
  ChooseOutcome out;
  std::vector<std::size_t> winners;
  for (;;) {
    ++out.rounds;
    winners.clear();
    bool live = false;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      Truth t = branches[i]->step(meter);
      if (t == Truth::True) winners.push_back(i);
      if (!branches[i]->settled()) live = true;
    }
    if (!winners.empty()) {
      out.index = chooser.pick(winners);
      for (auto& b : branches) out.states.push_back(b->state());
      return out;
    }
    if (!live)
      throw BudgetExhausted(BudgetExhausted::Cause::Precision, "choose: no branch can become true");
  }
}

inline ChooseOutcome choose(const std::vector<LazyBoolPtr>& branches, ChoicePolicy policy = {},
                            const EvalBudget& budget = {}) {
  Chooser chooser(policy);
  StepMeter meter(budget);
  return choose(branches, chooser, meter);
}

/// Soft test x >_p 0 == choose(2^p > x, x > -2^p): 1 guarantees x > -2^p,
/// 0 guarantees x < 2^p. Total on all reals.
inline int soft_gt(const RealNum& x, std::int64_t p, Chooser& chooser, StepMeter& meter) {
  std::vector<LazyBoolPtr> branches{
      std::make_shared<GreaterTest>(RealNum::iota(p), x),
      std::make_shared<GreaterTest>(x, -RealNum::iota(p)),
  };
  return static_cast<int>(choose(branches, chooser, meter).index);
}

inline int soft_gt(const RealNum& x, std::int64_t p, ChoicePolicy policy = {}, const EvalBudget& budget = {}) {
  Chooser chooser(policy);
  StepMeter meter(budget);
  return soft_gt(x, p, chooser, meter);
}

}  // namespace erc::core
