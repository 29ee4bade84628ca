#include "erc/corpus/functions.hpp"
#include "erc/lang.hpp"
#include "erc/verify.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace erc;
using namespace erc::verify;

namespace {

std::string corpus_text(const std::string& name) { return lang::read_file(std::string(ERC_CORPUS_DIR) + "/" + name); }

std::vector<std::filesystem::path> files_in(const std::string& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Signature reals(std::initializer_list<const char*> names) {
  Signature s;
  for (const char* n : names) s.vars[n] = VSort::Real;
  s.functions = {{"f", 1}};
  return s;
}

FormulaPtr closed(const std::string& text) { return parse_formula(text, Signature{{}, {{"f", 1}}}); }

}  // namespace

TEST(Sampler, GoldensSurviveTenThousandSamples) {
  for (const auto& path : files_in(std::string(ERC_CORPUS_DIR) + "/goldens/trisection")) {
    auto rep = sample_check(read_vc_file(path).formula, {.samples = 10000, .seed = 1});
    EXPECT_FALSE(rep.refuted) << path;
    EXPECT_EQ(rep.samples, 10000u);
    EXPECT_GT(rep.effective(), 100u) << path;
  }
}

TEST(Sampler, EveryMutantIsRefuted) {
  auto paths = files_in(std::string(ERC_TEST_DATA_DIR) + "/mutants");
  ASSERT_EQ(paths.size(), 5u);
  for (const auto& path : paths) {
    auto vc = read_vc_file(path).formula;
    auto rep = sample_check(vc, {.samples = 10000, .seed = 1});
    ASSERT_TRUE(rep.refuted) << path;
    EXPECT_FALSE(rep.counterexample.empty());
  }
}

TEST(Sampler, CounterexamplesFalsifyTheFormula) {
  auto vc = closed("forall x:REAL, y:REAL. x < y => x * x < y * y");
  auto rep = sample_check(vc, {.samples = 2000, .seed = 5});
  ASSERT_TRUE(rep.refuted);
  mpq_class x(rep.counterexample.at("x")), y(rep.counterexample.at("y"));
  // independent check
  EXPECT_LT(x, y);
  EXPECT_GE(x * x, y * y);
}

TEST(Sampler, IsDeterministicPerSeed) {
  auto vc = closed("forall x:REAL, n:INTEGER. x * iota(n) > 1 / 1000");
  auto a = sample_check(vc, {.samples = 500, .seed = 9});
  auto b = sample_check(vc, {.samples = 500, .seed = 9});
  EXPECT_EQ(a.refuted, b.refuted);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.counterexample, b.counterexample);
}

TEST(Sampler, OnePointRuleSolvesEqualities) {
  auto vc = closed("forall x:REAL, y:REAL, R:REAL. R = y - x && x < y => R > 0");
  auto rep = sample_check(vc, {.samples = 1000, .seed = 3});
  EXPECT_FALSE(rep.refuted);
  ASSERT_EQ(rep.solved.size(), 1u);
  EXPECT_EQ(rep.solved[0].rfind("R := ", 0), 0u);
  // without the rule an exact equality between sampled reals almost never holds
  EXPECT_GT(rep.effective(), 300u);
}

TEST(Sampler, NestedIntegerQuantifiersAreEnumerated) {
  auto ok = closed("forall n:INTEGER. 0 < n && n < 10 => (exists k:INTEGER. 0 <= k && k < n && k + 1 = n)");
  EXPECT_FALSE(sample_check(ok, {.samples = 500}).refuted);
  auto bad = closed("forall n:INTEGER. 0 < n => (forall k:INTEGER. 0 <= k && k < n => k + 2 <= n)");
  EXPECT_TRUE(sample_check(bad, {.samples = 500}).refuted);
}

TEST(Sampler, RealQuantifiersInsideAreRejected) {
  auto vc = closed("forall x:REAL. exists y:REAL. y > x");
  EXPECT_THROW(sample_check(vc), UnsupportedQuantifierShape);
  auto inner = closed("forall x:REAL. x > 0 => (forall y:REAL. y * y >= 0)");
  EXPECT_THROW(sample_check(inner), UnsupportedQuantifierShape);
}

TEST(Sampler, UniqIsDecidedExactly) {
  // linear f(t) = 2t - 1 has its root at 1/2
  auto sig = reals({"a", "b"});
  detail::Valuation env;
  env.f = &corpus::test_function("linear").poly;
  env.f_symbol = "f";
  auto u = parse_formula("uniq(f, a, b)", sig);
  auto at = [&](mpq_class a, mpq_class b) {
    env.scalars["a"] = a;
    env.scalars["b"] = b;
    return detail::holds(u, env, 4);
  };
  EXPECT_TRUE(at(0, 1));
  EXPECT_TRUE(at(mpq_class(1, 2), 1) == false);  // f(a) f(b) = 0
  EXPECT_FALSE(at(mpq_class(3, 4), 1));
  EXPECT_FALSE(at(1, 0));
}

class CorpusVcs : public ::testing::TestWithParam<std::pair<const char*, const char*>> {};

TEST_P(CorpusVcs, NoCounterexample) {
  auto [file, fn] = GetParam();
  auto prog = lang::load(corpus_text(file), file);
  auto open = active(generate_vcs(prog, fn));
  ASSERT_FALSE(open.empty());
  for (const auto& vc : open) {
    auto rep = sample_check(vc.formula, {.samples = 10000, .seed = 3});
    EXPECT_FALSE(rep.refuted) << fn << " " << vc.name << " (" << vc.kind << "): " << to_string(vc.formula);
    EXPECT_GT(rep.effective(), 0u) << fn << " " << vc.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Corpus, CorpusVcs,
                         ::testing::Values(std::pair{"round.erc", "Round"}, std::pair{"trisection.erc", "Trisection"},
                                           std::pair{"gauss.erc", "Pivot"}),
                         [](const auto& info) { return std::string(info.param.second); });

TEST(Sampler, WeakenedPivotInvariantIsCaught) {
  // without "the maximum lies at or after i", i + 1 < m is not preserved
  std::string text = corpus_text("gauss.erc");
  const std::string line = "  //@ invariant: exists k:INTEGER. i <= k && k < m && |M[k]| = x\n";
  auto at = text.find(line);
  ASSERT_NE(at, std::string::npos);
  text.erase(at, line.size());
  auto open = active(generate_vcs(lang::load(text, "gauss.erc"), "Pivot"));
  bool refuted = false;
  for (const auto& vc : open) refuted |= sample_check(vc.formula, {.samples = 10000, .seed = 3}).refuted;
  EXPECT_TRUE(refuted);
}

// Postconditions checked on final states of real executions.
TEST(RuntimeCheck, RoundPostHoldsOnRandomRuns) {
  auto prog = lang::load(corpus_text("round.erc"), "round.erc");
  VcGenerator gen(prog, "Round");
  FormulaPtr post = gen.postcondition();
  lang::Interpreter in(prog);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    mpq_class x(static_cast<long>(rng() % 4001) - 2000, static_cast<long>(rng() % 16) + 1);
    x.canonicalize();
    lang::EvalOptions o;
    o.policy = core::ChoicePolicy::random(i);
    auto res = in.run("Round", {lang::Value(core::RealNum::from_rational(x))}, -10, o);
    StateEnv env;
    env.values = res.final_state;
    env.values["result"] = res.value;
    auto ok = holds_in_state(post, env);
    ASSERT_TRUE(ok.has_value()) << x;
    EXPECT_TRUE(*ok) << "x = " << x;
  }
}

TEST(RuntimeCheck, TrisectionPostHoldsOnRandomRuns) {
  auto prog = lang::load(corpus_text("trisection.erc"), "trisection.erc");
  VcGenerator gen(prog, "Trisection");
  FormulaPtr post = gen.postcondition();
  for (const auto& [key, tf] : corpus::test_functions()) {
    lang::Interpreter in(prog, {{"f", corpus::native(tf.poly)}});
    for (int seed = 0; seed < 10; ++seed) {
      lang::EvalOptions o;
      o.policy = core::ChoicePolicy::random(seed);
      auto res = in.run("Trisection", {}, -10, o);
      StateEnv env;
      env.values = res.final_state;
      env.values["result"] = res.value;
      env.values["p"] = lang::Value(-10L);
      env.functions["f"] = &tf.poly;
      auto ok = holds_in_state(post, env);
      ASSERT_TRUE(ok.has_value()) << key << " seed " << seed;
      EXPECT_TRUE(*ok) << key << " seed " << seed;
    }
  }
}

TEST(RuntimeCheck, FalsePostIsReported) {
  Signature s;
  s.vars = {{"x", VSort::Real}, {"k", VSort::Int}};
  StateEnv env;
  env.values["x"] = lang::Value(core::RealNum::from_rational(mpq_class(5, 2)));
  env.values["k"] = lang::Value(7L);
  EXPECT_EQ(holds_in_state(parse_formula("|x - k| < 1", s), env), std::optional<bool>(false));
  EXPECT_EQ(holds_in_state(parse_formula("|x - k| > 1", s), env), std::optional<bool>(true));
  // 5/2 given only as a limit: equality stays undecided
  env.values["x"] = lang::Value(core::RealNum::limit(std::function<core::RealNum(std::int64_t)>([](std::int64_t p) {
    return core::RealNum::from_rational(mpq_class(5, 2)) + core::RealNum::iota(p - 1);
  })));
  EXPECT_EQ(holds_in_state(parse_formula("x = 5 / 2", s), env), std::nullopt);
}
