// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include "erc/corpus/harness.hpp"
#include "erc/lang.hpp"
#include "erc/verify.hpp"
#include "support/oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

using namespace erc;
using core::BudgetExhausted;
using core::ChoicePolicy;
using core::EvalBudget;
using core::RealNum;
using erc::testing::pow2q;

namespace {

const std::string kCorpus = ERC_CORPUS_DIR;
const std::string kData = ERC_TEST_DATA_DIR;

struct Verdict {
  bool pass = true;
  std::string note;
  void fail(const std::string& why) {
    if (pass) note = why;
    pass = false;
  }
};

lang::CheckedProgram load_corpus(const std::string& name) { return lang::load(lang::read_file(kCorpus + "/" + name), name); }

std::vector<std::filesystem::path> files_in(const std::string& dir, const std::string& ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: semantics soundness ----

struct Expr {
  RealNum real;
  mpq_class truth;
};

Expr random_expr(std::mt19937_64& rng, erc::testing::RationalGen& gen, int depth) {
  int op = depth == 0 ? 0 : static_cast<int>(rng() % 7);
  if (op == 0) {
    mpq_class q = gen.next();
    return {RealNum::from_rational(q), q};
  }
  if (op == 5) {
    auto a = random_expr(rng, gen, depth - 1);
    return {abs(a.real), abs(a.truth)};
  }
  auto a = random_expr(rng, gen, depth - 1), b = random_expr(rng, gen, depth - 1);
  switch (op) {
    case 1: return {a.real + b.real, a.truth + b.truth};
    case 2: return {a.real - b.real, a.truth - b.truth};
    case 3: return {a.real * b.real, a.truth * b.truth};
    case 4: return b.truth == 0 ? a : Expr{a.real / b.real, a.truth / b.truth};
    default: return {max(a.real, b.real), a.truth > b.truth ? a.truth : b.truth};
  }
}

Verdict semantics_soundness() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  erc::testing::RationalGen gen(1002, 200, 17);
  EvalBudget small;
  small.min_precision = -300;
  int undecided = 0;
  for (int i = 0; i < 1000 && v.pass; ++i) {
    Expr e = random_expr(rng, gen, 3);
    std::int64_t p = 4 - static_cast<std::int64_t>(rng() % 80);
    auto iv = e.real.approx(p);
    if (!iv.contains(e.truth)) v.fail("case " + std::to_string(i) + ": enclosure misses the value");
    if (iv.width().to_rational() > pow2q(p)) v.fail("case " + std::to_string(i) + ": width > 2^p");
    mpq_class other = e.truth + mpq_class(static_cast<long>(rng() % 201) - 100, 1 + static_cast<long>(rng() % 1000));
    other.canonicalize();
    if (other != e.truth && core::gt_partial(e.real, RealNum::from_rational(other)) != (e.truth > other))
      v.fail("case " + std::to_string(i) + ": gt_partial wrong");
    // the same value built another way: x + 1/3 - 1/3
    RealNum third = RealNum::from_rational(mpq_class(1, 3));
    try {
      core::gt_partial(e.real, (e.real + third) - third, small);
      v.fail("case " + std::to_string(i) + ": comparison of equal reals decided");
    } catch (const BudgetExhausted&) {
      ++undecided;
    }
  }
  double secs = seconds_since(t0);
  if (v.pass && secs > 60) v.fail("took " + std::to_string(secs) + " s");
  if (v.pass) {
    std::ostringstream s;
    s << "1000 cases, " << undecided << " equal-real comparisons exhausted, " << secs << " s";
    v.note = s.str();
  }
  return v;
}

// ---- 2: parallel-or progress ----

Verdict parallel_or() {
  Verdict v;
  using core::LazyBoolPtr;
  auto lit = [](bool b) -> LazyBoolPtr { return std::make_shared<core::ConstBool>(b); };
  auto never = []() -> LazyBoolPtr { return std::make_shared<core::Diverging>(); };
  auto after = [](std::uint64_t k) -> LazyBoolPtr { return std::make_shared<core::TrueAfter>(k); };
  EvalBudget b;
  b.max_steps = 1000000;
  b.min_precision = -256;
  for (std::uint64_t k : {0ull, 1ull, 10ull, 100ull, 1000ull, 10000ull}) {
    try {
      if (core::choose({after(k), never()}, ChoicePolicy::right(), b).index != 0) v.fail("k=" + std::to_string(k) + " wrong branch");
      if (core::choose({never(), after(k)}, ChoicePolicy::left(), b).index != 1) v.fail("k=" + std::to_string(k) + " wrong branch");
    } catch (const BudgetExhausted&) {
      v.fail("k=" + std::to_string(k) + " did not terminate");
    }
  }
  // the case table on defined inputs, under both tie policies
  struct Row {
    bool a, b;
    std::set<std::size_t> allowed;  // empty = undefined
  };
  for (const Row& row : {Row{true, true, {0, 1}}, Row{true, false, {0}}, Row{false, true, {1}}, Row{false, false, {}}}) {
    std::set<std::size_t> seen;
    for (auto pol : {ChoicePolicy::left(), ChoicePolicy::right()}) {
      try {
        auto idx = core::choose({lit(row.a), lit(row.b)}, pol, b).index;
        if (!row.allowed.count(idx)) v.fail("choose(" + std::to_string(row.a) + "," + std::to_string(row.b) + ") gave " + std::to_string(idx));
        seen.insert(idx);
      } catch (const BudgetExhausted&) {
        if (!row.allowed.empty()) v.fail("choose(" + std::to_string(row.a) + "," + std::to_string(row.b) + ") undefined");
      }
    }
    if (seen != row.allowed) v.fail("choose(" + std::to_string(row.a) + "," + std::to_string(row.b) + ") outcomes incomplete");
  }
  if (v.pass) v.note = "k up to 10^4 both orders; 4-row table exact";
  return v;
}

// ---- 3: corpus contracts ----

Verdict corpus_contracts() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(kCorpus + "/corpus.json");
  auto manifest = nlohmann::json::parse(in);
  std::ostringstream note;
  for (const auto& r : corpus::run_manifest(manifest, kCorpus)) {
    note << r.name << " " << r.passed << "/" << r.total << ", ";
    if (r.passed != r.total) v.fail(r.name + " " + std::to_string(r.passed) + "/" + std::to_string(r.total) + ": " + r.failures.front().dump());
    if (r.total < 100) v.fail(r.name + " has only " + std::to_string(r.total) + " cases");
  }
  // exp(1) at p = -20 against the test-side bracket with n = 2^40
  lang::Interpreter exp_in(load_corpus("exp.erc"));
  auto res = exp_in.run("Exp", {lang::Value(RealNum::from_integer(1))}, -20);
  auto z = res.value.real().approx(-28);
  auto [lo, hi] = erc::testing::exp_bracket(1, 40);
  mpq_class tol = pow2q(-20);
  if (z.lo().to_rational() < hi - tol || z.hi().to_rational() > lo + tol) v.fail("exp(1) off by more than 2^-20");
  double secs = seconds_since(t0);
  if (secs > 300) v.fail("took " + std::to_string(secs) + " s");
  if (v.pass) {
    note << "exp(1) ok, " << secs << " s";
    v.note = note.str();
  }
  return v;
}

// ---- 4: multivaluedness ----

Verdict multivalued() {
  Verdict v;
  lang::Interpreter round(load_corpus("round.erc"));
  std::set<std::string> ks;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto r = corpus::round_case(round, mpq_class(5, 2), ChoicePolicy::random(seed));
    if (!r.ok) v.fail("Round(5/2) seed " + std::to_string(seed) + ": " + r.detail);
    else ks.insert(r.data.at("k").get<std::string>());
  }
  if (ks != std::set<std::string>{"2", "3"}) v.fail("Round(5/2) gave only " + *ks.begin());
  lang::Interpreter pivot(load_corpus("gauss.erc"));
  std::set<std::string> is;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto r = corpus::pivot_case(pivot, {1, 1}, ChoicePolicy::random(seed));
    if (!r.ok) v.fail("Pivot([1,1]) seed " + std::to_string(seed) + ": " + r.detail);
    else is.insert(r.data.at("i").get<std::string>());
  }
  std::string pivot_seen;
  for (const auto& i : is) pivot_seen += (pivot_seen.empty() ? "" : ",") + i;
  if (is.size() != 2) {
    // diagnostic only: with |M[0]| = x the second branch x > |M[0]| is false,
    // so [1,1] forces index 0; [3/4,1] makes both branches true at i = 0
    std::set<std::string> alt;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto r = corpus::pivot_case(pivot, {mpq_class(3, 4), 1}, ChoicePolicy::random(seed));
      if (r.ok) alt.insert(r.data.at("i").get<std::string>());
    }
    v.fail("Round(5/2) gave {2,3}; Pivot([1,1]) gave only {" + pivot_seen + "} over 200 seeds (Pivot([3/4,1]) gives " +
           std::to_string(alt.size()) + " distinct indices)");
  }
  if (v.pass) v.note = "Round(5/2) in {2,3}; Pivot([1,1]) in {" + pivot_seen + "}";
  return v;
}

// ---- 5: consistency at adjacent precisions ----

Verdict consistency() {
  Verdict v;
  auto prog = load_corpus("trisection.erc");
  int checked = 0, skipped = 0;
  for (const auto& [key, tf] : corpus::test_functions()) {
    lang::Interpreter in(prog, {{"f", corpus::native(tf.poly)}});
    std::vector<ChoicePolicy> policies = {ChoicePolicy::left(), ChoicePolicy::right()};
    for (std::uint64_t s = 0; s < 8; ++s) policies.push_back(ChoicePolicy::random(s));
    for (std::int64_t p : {-8, -12})
      for (const auto& pol : policies) {
        lang::EvalOptions o;
        o.policy = pol;
        auto rep = lang::eval_consistency_check(in, "Trisection", {}, p, o);
        if (!rep.traces_coincide) {
          ++skipped;
          continue;
        }
        ++checked;
        if (!rep.holds) v.fail(key + " p=" + std::to_string(p) + ": " + rep.summary());
      }
  }
  if (checked == 0) v.fail("no run pair had coinciding traces");
  if (v.pass) v.note = std::to_string(checked) + " pairs within 3*2^(p-1), " + std::to_string(skipped) + " with differing traces";
  return v;
}

// ---- 6: VC goldens and wp structure ----

Verdict vc_goldens() {
  Verdict v;
  auto prog = load_corpus("trisection.erc");
  verify::VcGenerator gen(prog, "Trisection");
  auto open = verify::active(gen.generate());
  std::vector<verify::FormulaPtr> goldens;
  for (const auto& f : files_in(kCorpus + "/goldens/trisection", ".vc")) goldens.push_back(verify::read_vc_file(f).formula);
  if (open.size() != 5) v.fail(std::to_string(open.size()) + " open VCs, expected 5");
  auto match = verify::match_goldens(open, goldens);
  std::set<int> partners(match.begin(), match.end());
  if (goldens.size() != 5 || partners.count(-1) || partners.size() != 5) v.fail("generated VCs do not match the 5 goldens one to one");
  lang::StmtPtr loop;
  const auto& body = prog.function("Trisection").body;
  for (const auto& s : body->stmts)
    if (s->kind == lang::StmtKind::While) loop = s;
  auto q = gen.postcondition();
  auto form = gen.appendix_form(loop, q);
  if (form->kind != verify::FKind::And || form->parts.size() != 5 || form->parts[1]->kind != verify::FKind::Exists ||
      form->parts[2]->kind != verify::FKind::Exists)
    v.fail("while-wp is not the five-conjunct form");
  // wp(C1; C2, Q) = wp(C1, wp(C2, Q)) at every split of the body
  std::string whole = verify::to_string(gen.wp(body, q));
  for (std::size_t k = 1; k < body->stmts.size(); ++k) {
    auto head = lang::Stmt::make(lang::StmtKind::Block, body->span);
    auto tail = lang::Stmt::make(lang::StmtKind::Block, body->span);
    head->stmts.assign(body->stmts.begin(), body->stmts.begin() + static_cast<long>(k));
    tail->stmts.assign(body->stmts.begin() + static_cast<long>(k), body->stmts.end());
    if (verify::to_string(gen.wp(head, gen.wp(tail, q))) != whole) v.fail("composition differs at split " + std::to_string(k));
  }
  if (v.pass) v.note = "5/5 goldens matched; 5-conjunct while-wp; composition holds at " + std::to_string(body->stmts.size() - 1) + " splits";
  return v;
}

// ---- 7: sampler falsification ----

Verdict sampler() {
  Verdict v;
  int survived = 0, refuted = 0;
  for (const auto& f : files_in(kCorpus + "/goldens/trisection", ".vc")) {
    auto rep = verify::sample_check(verify::read_vc_file(f).formula, {.samples = 10000, .seed = 7});
    if (rep.refuted) v.fail("golden " + f.filename().string() + " refuted");
    else ++survived;
  }
  for (const auto& f : files_in(kData + "/mutants", ".vc")) {
    auto rep = verify::sample_check(verify::read_vc_file(f).formula, {.samples = 10000, .seed = 7});
    if (!rep.refuted) v.fail("mutant " + f.filename().string() + " not refuted");
    else ++refuted;
  }
  if (survived != 5 || refuted != 5) v.fail(std::to_string(survived) + " goldens survived, " + std::to_string(refuted) + " mutants refuted");
  if (v.pass) v.note = "5 goldens survive 10^4 samples; 5/5 mutants refuted";
  return v;
}

// ---- 8: Round is linear in the binary length ----

Verdict round_complexity() {
  Verdict v;
  lang::Interpreter in(load_corpus("round.erc"));
  std::vector<double> xs, ys;
  for (int j = 4; j <= 20; ++j) {
    mpq_class x = pow2q(j) + mpq_class(1, 2);
    auto r = corpus::round_case(in, x, ChoicePolicy::left());
    if (!r.ok) {
      v.fail("j=" + std::to_string(j) + ": " + r.detail);
      return v;
    }
    // binary length of the integer part
    xs.push_back(static_cast<double>(mpz_sizeinbase(mpz_class(pow2q(j).get_num()).get_mpz_t(), 2)));
    ys.push_back(r.data.at("scale_loop").get<double>() + r.data.at("digit_loop").get<double>());
  }
  double n = static_cast<double>(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  // one halving step and one digit step per bit
  const double expected = 2.0;
  std::ostringstream s;
  s << "slope " << slope << " iterations/bit (expected " << expected << ")";
  if (std::abs(slope - expected) > 0.2 * expected) v.fail(s.str());
  if (v.pass) v.note = s.str();
  return v;
}

// ---- 9: iota homomorphism ----

Verdict iota_homomorphism() {
  Verdict v;
  int pairs = 0;
  for (std::int64_t p = -64; p <= 64; ++p)
    for (std::int64_t q = -64; q <= 64; ++q) {
      RealNum prod = RealNum::iota(p) * RealNum::iota(q), quot = RealNum::iota(p) / RealNum::iota(q);
      if (!prod.exact() || prod.exact()->to_rational() != erc::testing::pow2_by_doubling(p + q) ||
          *prod.exact() != *RealNum::iota(p + q).exact())
        v.fail("iota(" + std::to_string(p) + ")*iota(" + std::to_string(q) + ")");
      if (!quot.exact() || quot.exact()->to_rational() != erc::testing::pow2_by_doubling(p - q) ||
          *quot.exact() != *RealNum::iota(p - q).exact())
        v.fail("iota(" + std::to_string(p) + ")/iota(" + std::to_string(q) + ")");
      ++pairs;
    }
  if (v.pass) v.note = std::to_string(pairs) + " pairs exact";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"semantics soundness", semantics_soundness},
      {"parallel-or progress", parallel_or},
      {"corpus contracts", corpus_contracts},
      {"multivaluedness observable", multivalued},
      {"consistency at (p, p-1)", consistency},
      {"VC goldens and wp structure", vc_goldens},
      {"sampler falsification", sampler},
      {"Round linear in binary length", round_complexity},
      {"iota homomorphism", iota_homomorphism},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << index << ". " << c.name << ": " << v.note << std::endl;
  }
  std::cout << 9 - failed << "/9 criteria passed" << std::endl;
  return failed;
}
