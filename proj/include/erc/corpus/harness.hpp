#pragma once

// Runs the corpus algorithms through the interpreter and checks every
// post-state against the exact oracles in oracles.hpp. `corpus.json` lists
// the seeded case families; run_manifest executes them.

#include "erc/corpus/oracles.hpp"
#include "erc/lang.hpp"
#include "erc/verify/runtime_check.hpp"
#include "erc/verify/syntax.hpp"

#include <json.hpp>

#include <filesystem>
#include <random>

namespace erc::corpus {

using core::ChoicePolicy;
using core::DyadicInterval;
using lang::Value;

struct CaseResult {
  bool ok = false;
  std::string detail;  // failed check, or the error that stopped the run
  nlohmann::json data;
};

namespace detail {

inline mpq_class lo(const DyadicInterval& i) { return i.lo().to_rational(); }
inline mpq_class hi(const DyadicInterval& i) { return i.hi().to_rational(); }

inline std::string str(const mpq_class& q) { return q.get_str(); }

/// WHILE statements of a function in source order.
inline std::vector<std::string> loop_sites(const lang::FunctionDef& f) {
  std::vector<std::string> out;
  std::function<void(const lang::StmtPtr&)> walk = [&](const lang::StmtPtr& s) {
    if (!s) return;
    if (s->kind == lang::StmtKind::While) out.push_back(s->span.to_string());
    for (const auto& c : s->stmts) walk(c);
    walk(s->then_branch);
    walk(s->else_branch);
    walk(s->body);
  };
  walk(f.body);
  return out;
}

inline std::vector<std::uint64_t> loop_counts(const lang::Interpreter& in, const std::string& fn,
                                              const lang::EvalStats& stats) {
  std::vector<std::uint64_t> out;
  for (const auto& site : loop_sites(in.program().function(fn))) {
    auto it = stats.loop_iterations.find(site);
    out.push_back(it == stats.loop_iterations.end() ? 0 : it->second);
  }
  return out;
}

inline lang::EvalOptions options(ChoicePolicy policy) {
  lang::EvalOptions o;
  o.policy = policy;
  return o;
}

inline Value real(const mpq_class& q) { return Value(core::RealNum::from_rational(q)); }

/// Runs f, turning evaluation errors into a failed case.
template <class F>
CaseResult guarded(F&& f) {
  try {
    return f();
  } catch (const core::BudgetExhausted& e) {
    return {false, std::string("BudgetExhausted: ") + e.what(), {}};
  } catch (const lang::RuntimeSignal& e) {
    return {false, std::string(lang::kind_name(e.kind())) + ": " + e.what(), {}};
  } catch (const std::exception& e) {
    return {false, e.what(), {}};
  }
}

}  // namespace detail

/// Round: |x - k| < 1, and the digit loop runs no more often than the
/// scaling loop (one iteration per binary digit of x).
inline CaseResult round_case(const lang::Interpreter& in, const mpq_class& x, ChoicePolicy policy) {
  return detail::guarded([&] {
    auto res = in.run("Round", {detail::real(x)}, 0, detail::options(policy));
    mpz_class k = res.value.integer();
    auto loops = detail::loop_counts(in, "Round", res.stats);
    CaseResult out;
    out.data = {{"x", detail::str(x)}, {"k", k.get_str()}, {"scale_loop", loops.at(0)}, {"digit_loop", loops.at(1)}};
    if (abs(x - k) >= 1) out.detail = "|x - k| >= 1";
    else if (loops[1] > loops[0]) out.detail = "digit loop ran more often than the scaling loop";
    out.ok = out.detail.empty();
    return out;
  });
}

/// Pivot on the first m entries of M (padded with zeros to the declared
/// length): M[i] != 0 and 0 <= i < m.
inline CaseResult pivot_case(const lang::Interpreter& in, const std::vector<mpq_class>& m_entries, ChoicePolicy policy) {
  return detail::guarded([&] {
    const auto& fn = in.program().function("Pivot");
    auto length = static_cast<std::size_t>(fn.params.at(1).sort->length);
    if (m_entries.empty() || m_entries.size() > length) throw std::invalid_argument("Pivot takes 1.." + std::to_string(length) + " entries");
    lang::RealArray arr;
    for (std::size_t i = 0; i < length; ++i) arr.push_back(core::RealNum::from_rational(i < m_entries.size() ? m_entries[i] : 0));
    auto res = in.run("Pivot", {Value(static_cast<long>(m_entries.size())), Value(std::move(arr))}, 0, detail::options(policy));
    mpz_class i = res.value.integer();
    CaseResult out;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& v : m_entries) entries.push_back(detail::str(v));
    out.data = {{"M", entries}, {"i", i.get_str()}};
    if (i < 0 || i >= static_cast<long>(m_entries.size())) out.detail = "index out of range";
    else if (m_entries[i.get_si()] == 0) out.detail = "M[i] = 0";
    out.ok = out.detail.empty();
    return out;
  });
}

/// Gauss on a d x d matrix of rank r (d is the program's CONST): the
/// returned vector has an entry of magnitude >= 1/2 and residual
/// |A x|_inf <= 2^(p + slack_bits), evaluated exactly on the midpoints of
/// the p-enclosures.
inline CaseResult gauss_case(const lang::Interpreter& in, const std::vector<mpq_class>& a, int r, std::int64_t p,
                             int slack_bits, ChoicePolicy policy) {
  CaseResult out = detail::guarded([&] {
    int d = static_cast<int>(in.program().consts.at("d").get_si());
    if (static_cast<int>(a.size()) != d * d) throw std::invalid_argument("matrix must be d x d with d = " + std::to_string(d));
    lang::RealArray arr;
    for (const auto& v : a) arr.push_back(core::RealNum::from_rational(v));
    auto res = in.run("Gauss", {Value(std::move(arr)), Value(static_cast<long>(r))}, p, detail::options(policy));
    std::vector<mpq_class> x;
    mpq_class biggest = 0;
    nlohmann::json xs = nlohmann::json::array();
    for (const auto& e : res.trace.result) {
      x.push_back((detail::lo(e) + detail::hi(e)) / 2);
      biggest = std::max(biggest, mpq_class(abs(x.back())));
      xs.push_back(x.back().get_d());
    }
    mpq_class residual = oracle::residual(a, x, d);
    CaseResult out;
    out.data = {{"d", d}, {"r", r}, {"p", p}, {"x", xs}, {"residual", residual.get_d()}};
    if (biggest < mpq_class(1, 2)) out.detail = "kernel vector is (nearly) zero";
    else if (residual > oracle::pow2(p + slack_bits)) out.detail = "residual above 2^(p + " + std::to_string(slack_bits) + ")";
    out.ok = out.detail.empty();
    return out;
  });
  // a run that stops early means Pivot found no nonzero entry
  if (!out.ok && out.data.is_null()) out.detail = "precondition rank(A) = " + std::to_string(r) + " violated: " + out.detail;
  return out;
}

/// Trisection on a test function: |x - root| <= 2^p, the loop invariant
/// (bracket with a unique root) holds at every loop head, and the loop runs
/// at most ceil(log_{3/2} 2^(1-p)) + 2 times.
inline CaseResult trisection_case(const lang::CheckedProgram& prog, const TestFunction& f, std::int64_t p,
                                  ChoicePolicy policy) {
  return detail::guarded([&] {
    lang::Interpreter in(prog, {{"f", native(f.poly)}});
    verify::Signature sig;
    sig.vars = {{"x", verify::VSort::Real}, {"y", verify::VSort::Real}};
    sig.functions = {{"f", 1}};
    auto inv = verify::parse_formula("0 <= x < y <= 1 && uniq(f, x, y)", sig);
    std::string broken;
    std::uint64_t heads = 0;
    auto o = detail::options(policy);
    o.on_loop_head = [&](const lang::Stmt&, const std::map<std::string, Value>& state) {
      ++heads;
      verify::StateEnv env;
      env.values = state;
      env.functions["f"] = &f.poly;
      auto ok = verify::holds_in_state(inv, env);
      if (broken.empty() && ok != std::optional<bool>(true))
        broken = "invariant " + std::string(ok ? "violated" : "undecided") + " at loop head " + std::to_string(heads);
    };
    auto res = in.run("Trisection", {}, p, o);
    DyadicInterval x = res.value.real().approx(p - 8);
    auto [rl, rh] = oracle::root_bracket(f.poly, static_cast<long>(8 - p));
    std::uint64_t iters = res.stats.total_iterations();
    // (2/3)^k 1 <= 2^(p-1) once k >= (1 - p) / log2(3/2)
    auto bound = static_cast<std::uint64_t>(std::ceil(static_cast<double>(1 - p) / std::log2(1.5))) + 2;
    CaseResult out;
    out.data = {{"f", f.key}, {"p", p}, {"x", detail::lo(x).get_d()}, {"iterations", iters}, {"bound", bound}};
    mpq_class tol = oracle::pow2(p);
    if (!broken.empty()) out.detail = broken;
    else if (detail::lo(x) < rl - tol || detail::hi(x) > rh + tol) out.detail = "|x - root| > 2^p";
    else if (iters > bound) out.detail = "loop ran " + std::to_string(iters) + " > " + std::to_string(bound) + " times";
    out.ok = out.detail.empty();
    return out;
  });
}

/// exp(x) for 0 <= x <= 2: |z - exp(x)| <= 2^p against a rational bracket
/// at n = 2^40, and a <= exp(x) <= b at every loop head.
inline CaseResult exp_case(const lang::Interpreter& in, const mpq_class& x, std::int64_t p, ChoicePolicy policy) {
  return detail::guarded([&] {
    if (x < 0 || x > 2) throw std::invalid_argument("exp_case needs 0 <= x <= 2");
    auto [ref_lo, ref_hi] = oracle::exp_bracket(x, 40);
    std::string broken;
    auto o = detail::options(policy);
    o.on_loop_head = [&](const lang::Stmt&, const std::map<std::string, Value>& state) {
      if (!broken.empty() || !state.count("a")) return;
      DyadicInterval a = state.at("a").real().approx(-80), b = state.at("b").real().approx(-80);
      if (detail::lo(a) > ref_hi || detail::hi(b) < ref_lo) broken = "bracket a <= exp(x) <= b violated";
    };
    auto res = in.run("Exp", {detail::real(x)}, p, o);
    DyadicInterval z = res.value.real().approx(p - 8);
    CaseResult out;
    out.data = {{"x", detail::str(x)}, {"p", p}, {"z", detail::lo(z).get_d()}};
    mpq_class tol = oracle::pow2(p);
    if (!broken.empty()) out.detail = broken;
    else if (detail::lo(z) < ref_hi - tol || detail::hi(z) > ref_lo + tol) out.detail = "|z - exp(x)| > 2^p";
    out.ok = out.detail.empty();
    return out;
  });
}

// ---- seeded case families ----

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  long uniform(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen); }
  mpq_class rational(long max_num, long max_den) {
    mpq_class q(uniform(-max_num, max_num), uniform(1, max_den));
    q.canonicalize();
    return q;
  }
};

/// Half-integers (where both answers are admissible), small fractions and
/// large values.
inline mpq_class round_input(Rng& rng) {
  switch (rng.uniform(0, 2)) {
    case 0: return mpq_class(2 * rng.uniform(-50, 50) + 1, 2);
    case 1: return rng.rational(100, 16);
    default: return rng.rational(1L << 20, 7);
  }
}

inline std::vector<mpq_class> pivot_input(Rng& rng, int max_len) {
  std::vector<mpq_class> m(static_cast<std::size_t>(rng.uniform(1, max_len)));
  for (auto& v : m) v = rng.uniform(0, 2) == 0 ? mpq_class(0) : rng.rational(4, 3);
  if (std::all_of(m.begin(), m.end(), [](const mpq_class& v) { return v == 0; }))
    m[static_cast<std::size_t>(rng.uniform(0, static_cast<long>(m.size()) - 1))] = rng.uniform(0, 1) ? 1 : -1;
  return m;
}

/// d x d matrix of rank exactly r (r < d) as a sum of r outer products.
inline std::vector<mpq_class> gauss_input(Rng& rng, int d, int r) {
  while (true) {
    std::vector<mpq_class> a(static_cast<std::size_t>(d * d), 0);
    for (int t = 0; t < r; ++t) {
      std::vector<mpq_class> u(d), v(d);
      for (auto& e : u) e = rng.rational(3, 2);
      for (auto& e : v) e = rng.rational(3, 2);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a[i * d + j] += u[i] * v[j];
    }
    if (oracle::rank(a, d, d) == r) return a;
  }
}

inline mpq_class exp_input(Rng& rng) {
  mpq_class q(rng.uniform(0, 32), 16);
  q.canonicalize();
  return q;
}

// ---- manifest ----

struct FamilyReport {
  std::string name;
  std::size_t passed = 0, total = 0;
  std::vector<nlohmann::json> failures;
};

/// Runs every family of a corpus.json manifest. Sources are resolved
/// relative to corpus_dir.
inline std::vector<FamilyReport> run_manifest(const nlohmann::json& manifest, const std::filesystem::path& corpus_dir,
                                              const std::function<void(const FamilyReport&)>& progress = {}) {
  std::vector<FamilyReport> out;
  auto source = [&](const nlohmann::json& fam) {
    auto file = fam.at("source").get<std::string>();
    return lang::load(lang::read_file((corpus_dir / file).string()), file);
  };
  for (const auto& [name, fam] : manifest.at("families").items()) {
    FamilyReport rep;
    rep.name = name;
    auto cases = fam.at("cases").get<int>();
    Rng rng(fam.at("seed").get<std::uint64_t>());
    std::vector<std::int64_t> precisions = fam.value("precisions", std::vector<std::int64_t>{-8});
    auto record = [&](const CaseResult& r, std::uint64_t seed) {
      ++rep.total;
      if (r.ok) ++rep.passed;
      else {
        auto j = r.data;
        j["seed"] = seed;
        j["error"] = r.detail;
        rep.failures.push_back(j);
      }
    };
    std::string algo = fam.at("algorithm").get<std::string>();
    // Round and Pivot return integers, so they have no precision
    if (algo == "round") {
      lang::Interpreter in(source(fam));
      for (int c = 0; c < cases; ++c) {
        std::uint64_t seed = rng.gen();
        record(round_case(in, round_input(rng), ChoicePolicy::random(seed)), seed);
      }
    } else if (algo == "pivot") {
      lang::Interpreter in(source(fam));
      int len = static_cast<int>(in.program().function("Pivot").params.at(1).sort->length);
      for (int c = 0; c < cases; ++c) {
        std::uint64_t seed = rng.gen();
        record(pivot_case(in, pivot_input(rng, len), ChoicePolicy::random(seed)), seed);
      }
    } else if (algo == "gauss") {
      lang::Interpreter in(source(fam));
      int d = static_cast<int>(in.program().consts.at("d").get_si());
      int slack = fam.at("residual_slack_bits").get<int>();
      for (std::int64_t p : precisions)
        for (int c = 0; c < cases; ++c) {
          std::uint64_t seed = rng.gen();
          int r = static_cast<int>(rng.uniform(0, d - 1));
          record(gauss_case(in, gauss_input(rng, d, r), r, p, slack, ChoicePolicy::random(seed)), seed);
        }
    } else if (algo == "trisection") {
      auto prog = source(fam);
      auto fns = fam.at("functions").get<std::vector<std::string>>();
      for (std::int64_t p : precisions)
        for (int c = 0; c < cases; ++c) {
          std::uint64_t seed = rng.gen();
          const auto& f = test_function(fns[static_cast<std::size_t>(c) % fns.size()]);
          record(trisection_case(prog, f, p, ChoicePolicy::random(seed)), seed);
        }
    } else if (algo == "exp") {
      lang::Interpreter in(source(fam));
      for (std::int64_t p : precisions)
        for (int c = 0; c < cases; ++c) {
          std::uint64_t seed = rng.gen();
          record(exp_case(in, exp_input(rng), p, ChoicePolicy::random(seed)), seed);
        }
    } else {
      throw std::invalid_argument("unknown algorithm '" + algo + "' in family " + name);
    }
    if (progress) progress(rep);
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace erc::corpus
