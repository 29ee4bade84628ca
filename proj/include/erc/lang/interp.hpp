#pragma once

#include "erc/core/predicates.hpp"
#include "erc/lang/typecheck.hpp"
#include "erc/lang/value.hpp"

#include <functional>
#include <map>
#include <memory>
#include <sstream>

namespace erc::lang {

/// Failure of a running program, with the site that raised it and the call
/// sites it propagated through (innermost first).
class RuntimeSignal : public std::runtime_error {
 public:
  enum class Kind { BudgetExhausted, IndexOutOfBounds, Diverged, BadBoolean };

  RuntimeSignal(Kind kind, Span span, const std::string& msg)
      : std::runtime_error(span.to_string() + ": " + msg), kind_(kind), span_(std::move(span)), message_(msg) {}

  Kind kind() const { return kind_; }
  const Span& span() const { return span_; }
  const std::string& message() const { return message_; }
  const std::vector<Span>& stack() const { return stack_; }
  void push(const Span& s) { stack_.push_back(s); }

  std::string describe() const {
    std::string out = what();
    for (const auto& s : stack_) out += "\n  via " + s.to_string();
    return out;
  }

 private:
  Kind kind_;
  Span span_;
  std::string message_;
  std::vector<Span> stack_;
};

inline const char* kind_name(RuntimeSignal::Kind k) {
  switch (k) {
    case RuntimeSignal::Kind::BudgetExhausted: return "BudgetExhausted";
    case RuntimeSignal::Kind::IndexOutOfBounds: return "IndexOutOfBounds";
    case RuntimeSignal::Kind::Diverged: return "Diverged";
    case RuntimeSignal::Kind::BadBoolean: return "BadBoolean";
  }
  return "?";
}

struct TraceRecord {
  enum class Kind { Choose, Cmp };
  Kind kind = Kind::Choose;
  std::string site;
  std::vector<core::Truth> states;  // Choose only
  std::size_t picked = 0;           // chosen index, or the comparison result

  bool operator==(const TraceRecord&) const = default;

  std::string to_string() const {
    if (kind == Kind::Cmp) return "CMP site=" + site + " result=" + std::to_string(picked);
    std::string s = "CHOOSE site=" + site + " states=";
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (i) s += ",";
      s += core::truth_letter(states[i]);
    }
    return s + " picked=" + std::to_string(picked);
  }
};

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<core::DyadicInterval> result;  // one enclosure per returned scalar

  std::size_t choices() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.kind == TraceRecord::Kind::Choose;
    return n;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& r : records) out += r.to_string() + "\n";
    out += "RESULT ";
    for (std::size_t i = 0; i < result.size(); ++i) out += (i ? " " : "") + result[i].to_string();
    return out + "\n";
  }
};

struct EvalStats {
  std::map<std::string, std::uint64_t> loop_iterations;  // per WHILE site
  std::uint64_t steps = 0;

  std::uint64_t total_iterations() const {
    std::uint64_t n = 0;
    for (const auto& [site, k] : loop_iterations) n += k;
    return n;
  }
};

struct EvalResult {
  Value value;
  Trace trace;
  EvalStats stats;
  std::map<std::string, Value> final_state;  // entry function's variables at RETURN
};

/// Called at every loop head of the entry function, before the guard, with
/// all variables in scope.
using LoopObserver = std::function<void(const Stmt& loop, const std::map<std::string, Value>& state)>;

struct EvalOptions {
  core::ChoicePolicy policy;
  core::EvalBudget budget;
  LoopObserver on_loop_head;
};

/// Host-provided implementation of a prototype. Receives the arguments
/// without the implicit precision and returns the exact value.
using NativeFn = std::function<Value(const std::vector<Value>&)>;
using Natives = std::map<std::string, NativeFn>;

namespace detail {

inline constexpr int kMaxCallDepth = 400;
inline constexpr std::int64_t kMaxIotaExponent = std::int64_t{1} << 32;

inline std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t mix(std::uint64_t seed, std::int64_t q, const std::string& site) {
  std::uint64_t h = fnv1a(14695981039346656037ULL ^ seed, site);
  h ^= static_cast<std::uint64_t>(q) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

// A branch whose value-context evaluation already failed to terminate.
class UndefinedBool final : public core::LazyBool {
 protected:
  void advance(core::StepMeter&) override { give_up(); }
};

struct Shared {
  CheckedProgram program;
  Natives natives;
};

struct Unwind {
  Value value;
};

class Machine {
 public:
  Machine(std::shared_ptr<const Shared> shared, core::StepMeter& meter, core::ChoicePolicy policy, Trace* trace,
          EvalStats* stats, int depth)
      : sh_(std::move(shared)), meter_(meter), chooser_(policy), seed_(policy.seed), trace_(trace), stats_(stats),
        depth_(depth) {}

  Value call(const FunctionDef& f, std::vector<Value> args, std::optional<std::int64_t> precision, const Span& at) {
    if (depth_ + static_cast<int>(frames_.size()) > kMaxCallDepth)
      throw RuntimeSignal(RuntimeSignal::Kind::BudgetExhausted, at, "call depth limit reached in '" + f.name + "'");
    if (f.is_prototype()) {
      auto it = sh_->natives.find(f.name);
      if (it == sh_->natives.end()) throw std::invalid_argument("prototype '" + f.name + "' has no binding");
      return it->second(args);
    }
    frames_.emplace_back();
    frames_.back().emplace_back();
    std::size_t skip = 0;
    if (f.takes_precision()) {
      frames_.back().back()[f.params[0].name] = Value(mpz_class(static_cast<long>(*precision)));
      skip = 1;
    }
    for (std::size_t i = 0; i < args.size(); ++i) frames_.back().back()[f.params[i + skip].name] = std::move(args[i]);
    try {
      exec(f.body);
    } catch (Unwind& u) {
      frames_.pop_back();
      return std::move(u.value);
    } catch (...) {
      frames_.pop_back();
      throw;
    }
    frames_.pop_back();
    throw std::logic_error("function ended without RETURN");
  }

 private:
  using Scope = std::map<std::string, Value>;
  std::shared_ptr<const Shared> sh_;
  core::StepMeter& meter_;
  core::Chooser chooser_;
  std::uint64_t seed_;
  Trace* trace_;
  EvalStats* stats_;
  int depth_;
  std::vector<std::vector<Scope>> frames_;
  std::map<std::string, Value>* final_state_ = nullptr;
  const LoopObserver* observer_ = nullptr;

  // inner scopes shadow outer ones
  std::map<std::string, Value> visible() const {
    std::map<std::string, Value> out;
    for (auto it = frames_.back().rbegin(); it != frames_.back().rend(); ++it)
      for (const auto& [name, v] : *it) out.emplace(name, v);
    return out;
  }

 public:
  void capture_final_state(std::map<std::string, Value>* out) { final_state_ = out; }
  void observe_loops(const LoopObserver* observer) { observer_ = observer; }

 private:

  [[noreturn]] static void budget(const core::BudgetExhausted& e, const Span& at) {
    throw RuntimeSignal(RuntimeSignal::Kind::BudgetExhausted, at, e.what());
  }

  void tick(const Span& at) {
    try {
      meter_.charge();
    } catch (const core::BudgetExhausted& e) {
      budget(e, at);
    }
  }

  Value& slot(const std::string& name) {
    auto& scopes = frames_.back();
    for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    throw std::logic_error("unbound variable '" + name + "' after checking");
  }

  static std::size_t checked_index(const mpz_class& i, std::size_t n, const Span& at) {
    if (i < 0 || i >= static_cast<unsigned long>(n))
      throw RuntimeSignal(RuntimeSignal::Kind::IndexOutOfBounds, at,
                          "index " + i.get_str() + " outside [0, " + std::to_string(n) + ")");
    return i.get_ui();
  }

  static bool boolean(const mpz_class& v, const Span& at) {
    if (v != 0 && v != 1)
      throw RuntimeSignal(RuntimeSignal::Kind::BadBoolean, at, "value " + v.get_str() + " used as a boolean");
    return v == 1;
  }

  void record(TraceRecord r) {
    if (trace_) trace_->records.push_back(std::move(r));
  }

  // ---- statements ----

  void exec(const StmtPtr& s) {
    tick(s->span);
    switch (s->kind) {
      case StmtKind::Decl: {
        Value v = s->value ? eval(s->value) : Value::zero(*s->sort);
        frames_.back().back()[s->name] = std::move(v);
        return;
      }
      case StmtKind::Assign: {
        Value v = eval(s->value);
        Value& target = slot(s->name);
        if (!s->index) {
          target = std::move(v);
          return;
        }
        mpz_class i = eval(s->index).integer();
        if (target.is<IntArray>()) {
          auto& a = target.as<IntArray>();
          a[checked_index(i, a.size(), s->index->span)] = v.integer();
        } else {
          auto& a = target.as<RealArray>();
          a[checked_index(i, a.size(), s->index->span)] = v.real();
        }
        return;
      }
      case StmtKind::Block: {
        frames_.back().emplace_back();
        try {
          for (const auto& c : s->stmts) exec(c);
        } catch (...) {
          frames_.back().pop_back();
          throw;
        }
        frames_.back().pop_back();
        return;
      }
      case StmtKind::If:
        exec(boolean(eval(s->value).integer(), s->value->span) ? s->then_branch : s->else_branch);
        return;
      case StmtKind::While: {
        std::uint64_t* counter = stats_ ? &stats_->loop_iterations[s->span.to_string()] : nullptr;
        while (true) {
          if (observer_ && frames_.size() == 1) (*observer_)(*s, visible());
          if (!boolean(eval(s->value).integer(), s->value->span)) break;
          if (counter) ++*counter;
          exec(s->body);
          tick(s->span);
        }
        return;
      }
      case StmtKind::Return: {
        Value v = eval(s->value);
        // block scopes are gone once Unwind propagates, so record them here
        if (final_state_ && frames_.size() == 1) *final_state_ = visible();
        throw Unwind{std::move(v)};
      }
    }
  }

  // ---- expressions ----

  Value eval(const ExprPtr& e) {
    const bool real = e->sort && e->sort->base == Base::Real && !e->sort->array;
    switch (e->kind) {
      case ExprKind::Int:
      case ExprKind::Rat:
        if (real) return RealNum::from_rational(e->number);
        return Value(e->number.get_num());
      case ExprKind::Var: return slot(e->name);
      case ExprKind::Index: {
        Value base = eval(e->args[0]);
        mpz_class i = eval(e->args[1]).integer();
        if (base.is<IntArray>()) {
          const auto& a = base.as<IntArray>();
          return a[checked_index(i, a.size(), e->args[1]->span)];
        }
        const auto& a = base.as<RealArray>();
        return a[checked_index(i, a.size(), e->args[1]->span)];
      }
      case ExprKind::Neg:
        if (real) return -eval(e->args[0]).real();
        return Value(mpz_class(-eval(e->args[0]).integer()));
      case ExprKind::Abs:
        if (real) return abs(eval(e->args[0]).real());
        return Value(mpz_class(::abs(eval(e->args[0]).integer())));
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
      case ExprKind::Max: return arith(e, real);
      case ExprKind::Scale: return Value(mpz_class(e->number.get_num() * eval(e->args[0]).integer()));
      case ExprKind::Gt: {
        Value a = eval(e->args[0]), b = eval(e->args[1]);
        if (a.is<mpz_class>()) return Value(a.integer() > b.integer() ? 1L : 0L);
        bool r = false;
        try {
          r = core::gt_partial(a.real(), b.real(), meter_);
        } catch (const core::BudgetExhausted& x) {
          budget(x, e->span);
        } catch (RuntimeSignal& s) {
          s.push(e->span);
          throw;
        }
        record({TraceRecord::Kind::Cmp, e->span.site(), {}, r ? 1u : 0u});
        return Value(r ? 1L : 0L);
      }
      case ExprKind::Ge: return Value(eval(e->args[0]).integer() >= eval(e->args[1]).integer() ? 1L : 0L);
      case ExprKind::Eq: return Value(eval(e->args[0]).integer() == eval(e->args[1]).integer() ? 1L : 0L);
      case ExprKind::Ne: return Value(eval(e->args[0]).integer() != eval(e->args[1]).integer() ? 1L : 0L);
      case ExprKind::And:
        if (!boolean(eval(e->args[0]).integer(), e->args[0]->span)) return Value(0L);
        return Value(boolean(eval(e->args[1]).integer(), e->args[1]->span) ? 1L : 0L);
      case ExprKind::Or:
        if (boolean(eval(e->args[0]).integer(), e->args[0]->span)) return Value(1L);
        return Value(boolean(eval(e->args[1]).integer(), e->args[1]->span) ? 1L : 0L);
      case ExprKind::Not: return Value(boolean(eval(e->args[0]).integer(), e->args[0]->span) ? 0L : 1L);
      case ExprKind::Choose: return Value(static_cast<long>(choose(e)));
      case ExprKind::Cond:
        return eval(boolean(eval(e->args[0]).integer(), e->args[0]->span) ? e->args[1] : e->args[2]);
      case ExprKind::Iota: {
        mpz_class n = eval(e->args[0]).integer();
        if (abs(n) > kMaxIotaExponent)
          throw RuntimeSignal(RuntimeSignal::Kind::BudgetExhausted, e->span, "iota exponent " + n.get_str() + " too large");
        return RealNum::iota(n.get_si());
      }
      case ExprKind::Call: return call_expr(e);
    }
    throw std::logic_error("unhandled expression");
  }

  Value arith(const ExprPtr& e, bool real) {
    Value a = eval(e->args[0]), b = eval(e->args[1]);
    if (real) {
      const RealNum &x = a.real(), &y = b.real();
      switch (e->kind) {
        case ExprKind::Add: return x + y;
        case ExprKind::Sub: return x - y;
        case ExprKind::Mul: return x * y;
        case ExprKind::Div: return x / y;
        default: return max(x, y);
      }
    }
    const mpz_class &x = a.integer(), &y = b.integer();
    switch (e->kind) {
      case ExprKind::Add: return Value(mpz_class(x + y));
      case ExprKind::Sub: return Value(mpz_class(x - y));
      case ExprKind::Max: return Value(x > y ? x : y);
      default: throw std::logic_error("integer operation not removed by checking");
    }
  }

  core::LazyBoolPtr lazy(const ExprPtr& e) {
    if (e->kind == ExprKind::Gt && e->args[0]->sort->is_real()) {
      Value a = eval(e->args[0]), b = eval(e->args[1]);
      return std::make_shared<core::GreaterTest>(a.real(), b.real());
    }
    if (e->kind == ExprKind::And || e->kind == ExprKind::Or)
      return std::make_shared<core::JunctionBool>(e->kind == ExprKind::And,
                                                  std::vector<core::LazyBoolPtr>{lazy(e->args[0]), lazy(e->args[1])});
    if (e->kind == ExprKind::Not) return std::make_shared<core::NotBool>(lazy(e->args[0]));
    try {
      return std::make_shared<core::ConstBool>(boolean(eval(e).integer(), e->span));
    } catch (const RuntimeSignal& s) {
      if (s.kind() != RuntimeSignal::Kind::BudgetExhausted || meter_.remaining() == 0) throw;
      return std::make_shared<UndefinedBool>();
    }
  }

  std::size_t choose(const ExprPtr& e) {
    std::vector<core::LazyBoolPtr> branches;
    for (const auto& a : e->args) branches.push_back(lazy(a));
    core::ChooseOutcome out;
    try {
      out = core::choose(branches, chooser_, meter_);
    } catch (const core::BudgetExhausted& x) {
      budget(x, e->span);
    } catch (RuntimeSignal& s) {
      s.push(e->span);
      throw;
    }
    record({TraceRecord::Kind::Choose, e->span.site(), out.states, out.index});
    return out.index;
  }

  Value call_expr(const ExprPtr& e) {
    const FunctionDef& f = sh_->program.function(e->name);
    std::vector<Value> args;
    for (const auto& a : e->args) args.push_back(eval(a));
    if (!f.takes_precision() || f.is_prototype()) {
      try {
        return call(f, std::move(args), std::nullopt, e->span);
      } catch (RuntimeSignal& s) {
        s.push(e->span);
        throw;
      }
    }
    // Exact call: the value is the limit of the approximations f(q, ...).
    auto shared = sh_;
    auto policy = chooser_.policy();
    std::uint64_t seed = seed_;
    int depth = depth_ + static_cast<int>(frames_.size());
    std::string site = e->span.to_string();
    Span span = e->span;
    const FunctionDef* fp = &f;
    return RealNum::limit([=](std::int64_t q, core::StepMeter& meter) {
      core::ChoicePolicy inner = policy;
      inner.seed = mix(seed, q, site);
      Machine m(shared, meter, inner, nullptr, nullptr, depth + 1);
      try {
        return m.call(*fp, args, q, span).real();
      } catch (RuntimeSignal& s) {
        s.push(span);
        throw;
      }
    });
  }
};

}  // namespace detail

/// Big-step evaluator for checked ERC programs.
class Interpreter {
 public:
  explicit Interpreter(CheckedProgram program, Natives natives = {})
      : shared_(std::make_shared<detail::Shared>(detail::Shared{std::move(program), std::move(natives)})) {
    for (const auto& f : shared_->program.program.functions)
      if (f.is_prototype() && !shared_->natives.count(f.name))
        throw std::invalid_argument("prototype '" + f.name + "' has no host binding");
  }

  const CheckedProgram& program() const { return shared_->program; }

  /// Runs `entry`. For REAL entries, `args` omit the precision p; the
  /// returned z satisfies |z - y| <= 2^p. Integer entries ignore p.
  EvalResult run(const std::string& entry, std::vector<Value> args, std::int64_t p,
                 const EvalOptions& options = {}) const {
    const FunctionDef& f = shared_->program.function(entry);
    std::size_t skip = f.takes_precision() ? 1 : 0;
    if (args.size() + skip != f.params.size())
      throw std::invalid_argument("'" + entry + "' expects " + std::to_string(f.params.size() - skip) + " argument(s)");
    for (std::size_t i = 0; i < args.size(); ++i)
      if (!args[i].matches(*f.params[i + skip].sort))
        throw std::invalid_argument("argument '" + f.params[i + skip].name + "' must have sort " +
                                    f.params[i + skip].sort->to_string());
    options.budget.validate();
    core::StepMeter meter(options.budget);
    EvalResult res;
    detail::Machine m(shared_, meter, options.policy, &res.trace, &res.stats, 0);
    m.capture_final_state(&res.final_state);
    if (options.on_loop_head) m.observe_loops(&options.on_loop_head);
    res.value = m.call(f, std::move(args), p, f.span);
    try {
      if (res.value.is<RealNum>()) {
        res.trace.result.push_back(res.value.real().approx(p, meter));
      } else if (res.value.is<RealArray>()) {
        for (const auto& x : res.value.as<RealArray>()) res.trace.result.push_back(x.approx(p, meter));
      } else if (res.value.is<mpz_class>()) {
        res.trace.result.emplace_back(core::Dyadic(res.value.integer()));
      }
    } catch (const core::BudgetExhausted& e) {
      throw RuntimeSignal(RuntimeSignal::Kind::BudgetExhausted, f.span, e.what());
    }
    res.stats.steps = meter.used();
    return res;
  }

 private:
  std::shared_ptr<const detail::Shared> shared_;
};

inline std::string to_string(const Value& v, std::int64_t p = -20) {
  auto real = [&](const RealNum& x) { return x.approx(p).to_string(); };
  if (v.is<mpz_class>()) return v.integer().get_str();
  if (v.is<RealNum>()) return real(v.real());
  std::string out = "{";
  if (v.is<IntArray>()) {
    for (std::size_t i = 0; i < v.as<IntArray>().size(); ++i) out += (i ? ", " : "") + v.as<IntArray>()[i].get_str();
  } else {
    for (std::size_t i = 0; i < v.as<RealArray>().size(); ++i) out += (i ? ", " : "") + real(v.as<RealArray>()[i]);
  }
  return out + "}";
}

}  // namespace erc::lang
