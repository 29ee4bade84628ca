#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace erc::core {

/// Fuel for one evaluation. Running out is reported as BudgetExhausted,
/// the finite witness of a possibly diverging (undefined) computation.
struct EvalBudget {
  std::uint64_t max_steps = 10'000'000;
  std::int64_t min_precision = -4096;

  void validate() const {
    if (max_steps == 0) throw std::invalid_argument("EvalBudget: max_steps must be positive");
    if (min_precision >= 0) throw std::invalid_argument("EvalBudget: min_precision must be negative");
  }
};

class BudgetExhausted : public std::runtime_error {
 public:
  enum class Cause { Steps, Precision };

  BudgetExhausted(Cause cause, const std::string& what) : std::runtime_error(what), cause_(cause) {}
  Cause cause() const { return cause_; }

 private:
  Cause cause_;
};

/// Mutable step counter shared by everything running under one budget.
class StepMeter {
 public:
  explicit StepMeter(EvalBudget budget = {}) : budget_(budget) { budget_.validate(); }

  const EvalBudget& budget() const { return budget_; }
  std::uint64_t used() const { return used_; }
  std::uint64_t remaining() const { return budget_.max_steps - used_; }

  void charge(std::uint64_t n = 1) {
    if (n > remaining()) {
      used_ = budget_.max_steps;
      throw BudgetExhausted(BudgetExhausted::Cause::Steps,
                            "step budget of " + std::to_string(budget_.max_steps) + " exhausted");
    }
    used_ += n;
  }

  void require_precision(std::int64_t p) const {
    if (p < budget_.min_precision)
      throw BudgetExhausted(BudgetExhausted::Cause::Precision,
                            "precision 2^" + std::to_string(p) + " below budget floor 2^" +
                                std::to_string(budget_.min_precision));
  }

 private:
  EvalBudget budget_;
  std::uint64_t used_ = 0;
};

struct ChoicePolicy {
  enum class Mode { LeftFirst, RightFirst, SeededRandom };
  Mode mode = Mode::LeftFirst;
  std::uint64_t seed = 0;

  static ChoicePolicy left() { return {Mode::LeftFirst, 0}; }
  static ChoicePolicy right() { return {Mode::RightFirst, 0}; }
  static ChoicePolicy random(std::uint64_t seed) { return {Mode::SeededRandom, seed}; }

  std::string name() const {
    switch (mode) {
      case Mode::LeftFirst: return "left";
      case Mode::RightFirst: return "right";
      case Mode::SeededRandom: return "random(" + std::to_string(seed) + ")";
    }
    return "?";
  }
};

/// Stateful tie breaker. Identical policy + identical sequence of candidate
/// sets gives identical picks.
class Chooser {
 public:
  explicit Chooser(ChoicePolicy policy = {}) : policy_(policy), rng_(policy.seed) {}

  const ChoicePolicy& policy() const { return policy_; }

  /// candidates: ascending branch indices that became true in the same round.
  std::size_t pick(std::span<const std::size_t> candidates) {
    if (candidates.empty()) throw std::logic_error("Chooser::pick without candidates");
    switch (policy_.mode) {
      case ChoicePolicy::Mode::LeftFirst: return candidates.front();
      case ChoicePolicy::Mode::RightFirst: return candidates.back();
      case ChoicePolicy::Mode::SeededRandom: {
        if (candidates.size() == 1) return candidates.front();
        std::uniform_int_distribution<std::size_t> dist(0, candidates.size() - 1);
        return candidates[dist(rng_)];
      }
    }
    return candidates.front();
  }

 private:
  ChoicePolicy policy_;
  std::mt19937_64 rng_;
};

}  // namespace erc::core
