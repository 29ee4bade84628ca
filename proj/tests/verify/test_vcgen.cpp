#include "erc/lang.hpp"
#include "erc/verify.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace erc;
using namespace erc::verify;

namespace {

std::string corpus_text(const std::string& name) { return lang::read_file(std::string(ERC_CORPUS_DIR) + "/" + name); }

lang::CheckedProgram load_corpus(const std::string& name) { return lang::load(corpus_text(name), name); }

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  if (at != std::string::npos) text.replace(at, from.size(), to);
  return text;
}

std::vector<FormulaPtr> goldens() {
  std::vector<FormulaPtr> out;
  for (int i = 1; i <= 5; ++i)
    out.push_back(read_vc_file(std::string(ERC_CORPUS_DIR) + "/goldens/trisection/i" + std::to_string(i) + ".vc").formula);
  return out;
}

VC bare(FormulaPtr f) {
  VC vc;
  vc.formula = std::move(f);
  return vc;
}

int count_kind(const std::vector<VC>& vcs, const std::string& kind) {
  return static_cast<int>(std::count_if(vcs.begin(), vcs.end(), [&](const VC& v) { return v.kind == kind; }));
}

const char* kStraight = R"(
//@ pre: x > 0
//@ post: result > x
REAL Twice(INTEGER p, REAL x) {
  REAL y := x + 1;
  y := y * 2;
  IF y > 10 THEN {
    y := y - 1;
  }
  RETURN y;
}
)";

}  // namespace

TEST(VcGen, TrisectionHasFiveOpenConditions) {
  auto prog = load_corpus("trisection.erc");
  auto all = generate_vcs(prog, "Trisection");
  auto open = active(all);
  ASSERT_EQ(open.size(), 5u);
  EXPECT_EQ(count_kind(open, "preservation"), 3);
  EXPECT_EQ(count_kind(open, "exit"), 1);
  EXPECT_EQ(count_kind(open, "initial"), 1);
  for (const auto& vc : open) {
    EXPECT_TRUE(free_vars(vc.formula).empty()) << vc.name;
    EXPECT_EQ(vc.name.rfind("vc_", 0), 0u);
  }
  for (const auto& vc : all)
    if (vc.discharged) {
      EXPECT_FALSE(vc.reason.empty()) << vc.kind;
    }
}

TEST(VcGen, TrisectionMatchesGoldens) {
  auto open = active(generate_vcs(load_corpus("trisection.erc"), "Trisection"));
  auto match = match_goldens(open, goldens());
  std::set<int> partners(match.begin(), match.end());
  for (std::size_t i = 0; i < match.size(); ++i) EXPECT_GE(match[i], 0) << "golden i" << i + 1;
  EXPECT_EQ(partners.size(), 5u);
}

TEST(VcGen, MutantsMatchNoGolden) {
  auto open = active(generate_vcs(load_corpus("trisection.erc"), "Trisection"));
  for (const auto& entry : std::filesystem::directory_iterator(std::string(ERC_TEST_DATA_DIR) + "/mutants")) {
    auto m = read_vc_file(entry.path()).formula;
    EXPECT_EQ(match_goldens(open, {m})[0], -1) << entry.path();
  }
}

TEST(VcGen, AssignmentChainsBySubstitution) {
  auto prog = lang::load(kStraight, "twice.erc");
  VcGenerator gen(prog, "Twice");
  auto open = active(gen.generate());
  // hand-computed with y = 2(x + 1); the partial test y > 10 acts as
  // choose(y > 10, 10 > y), so definedness and both branches are separate
  std::vector<FormulaPtr> expected;
  for (const char* text : {"forall p:INTEGER, x:REAL. x > 0 => 2 * (x + 1) > 10 || 10 > 2 * (x + 1)",
                           "forall p:INTEGER, x:REAL. x > 0 && 2 * (x + 1) > 10 => 2 * (x + 1) - 1 > x",
                           "forall p:INTEGER, x:REAL. x > 0 && 10 > 2 * (x + 1) => 2 * (x + 1) > x"})
    expected.push_back(parse_formula(text, gen.signature()));
  ASSERT_EQ(open.size(), expected.size());
  auto match = match_goldens(open, expected);
  for (std::size_t i = 0; i < match.size(); ++i) {
    EXPECT_GE(match[i], 0) << to_string(expected[i]);
  }
  if (std::count(match.begin(), match.end(), -1))
    for (const auto& vc : open) ADD_FAILURE() << "generated: " << to_string(vc.formula);
}

TEST(VcGen, SequencingComposes) {
  for (auto [file, fn] : {std::pair{"twice", "Twice"}, std::pair{"trisection", "Trisection"}, std::pair{"round", "Round"}}) {
    auto prog = std::string(file) == "twice" ? lang::load(kStraight, "twice.erc") : load_corpus(std::string(file) + ".erc");
    VcGenerator gen(prog, fn);
    gen.generate();
    const auto& body = prog.function(fn).body;
    ASSERT_EQ(body->kind, lang::StmtKind::Block);
    FormulaPtr q = gen.postcondition();
    std::string whole = to_string(gen.wp(body, q));
    for (std::size_t k = 1; k < body->stmts.size(); ++k) {
      auto head = lang::Stmt::make(lang::StmtKind::Block, body->span);
      auto tail = lang::Stmt::make(lang::StmtKind::Block, body->span);
      head->stmts.assign(body->stmts.begin(), body->stmts.begin() + k);
      tail->stmts.assign(body->stmts.begin() + k, body->stmts.end());
      EXPECT_EQ(to_string(gen.wp(head, gen.wp(tail, q))), whole) << fn << " split at " << k;
    }
  }
}

TEST(VcGen, AppendixFormHasFiveConjuncts) {
  auto prog = load_corpus("trisection.erc");
  VcGenerator gen(prog, "Trisection");
  gen.generate();
  lang::StmtPtr loop;
  for (const auto& s : prog.function("Trisection").body->stmts)
    if (s->kind == lang::StmtKind::While) loop = s;
  ASSERT_TRUE(loop);
  auto f = gen.appendix_form(loop, gen.postcondition());
  ASSERT_EQ(f->kind, FKind::And);
  ASSERT_EQ(f->parts.size(), 5u);
  EXPECT_EQ(to_string(f->parts[0]), to_string(gen.loop_annotations(loop).invariant));
  EXPECT_EQ(f->parts[1]->kind, FKind::Exists);
  EXPECT_EQ(f->parts[2]->kind, FKind::Exists);
  // only the loop's context (p and f) stays free
  SortMap fv = free_vars(f);
  for (const auto& [name, sort] : fv) EXPECT_TRUE(name == "p" || name == "x" || name == "y") << name;
}

TEST(VcGen, MissingAnnotationsAreReported) {
  EXPECT_THROW(generate_vcs(load_corpus("exp.erc"), "Exp"), MissingAnnotation);
  EXPECT_THROW(generate_vcs(load_corpus("gauss.erc"), "Gauss"), MissingAnnotation);
  EXPECT_NO_THROW(generate_vcs(load_corpus("gauss.erc"), "Pivot"));
  std::string tri = corpus_text("trisection.erc");
  auto no_variant = lang::load(replace(tri, "//@ variant: y - x - iota(p - 1)\n", ""), "t.erc");
  EXPECT_THROW(generate_vcs(no_variant, "Trisection"), MissingAnnotation);
  auto no_epsilon = lang::load(replace(tri, "//@ epsilon: iota(p - 1) / 3\n", ""), "t.erc");
  EXPECT_THROW(generate_vcs(no_epsilon, "Trisection"), MissingAnnotation);
  auto bad_syntax = lang::load(replace(tri, "//@ variant: y - x - iota(p - 1)", "//@ variant: y - - "), "t.erc");
  EXPECT_THROW(generate_vcs(bad_syntax, "Trisection"), AnnotationError);
}

TEST(VcGen, TrivialConditionsAreKeptAsDischarged) {
  auto prog = lang::load("//@ post: result = 0\nINTEGER Zero() {\n  INTEGER x := 0;\n  RETURN x;\n}\n", "zero.erc");
  auto vcs = generate_vcs(prog, "Zero");
  ASSERT_EQ(vcs.size(), 1u);
  EXPECT_EQ(vcs[0].kind, "initial");
  EXPECT_TRUE(vcs[0].discharged);
  EXPECT_EQ(vcs[0].name, "discharged_0");
  EXPECT_TRUE(active(vcs).empty());
}

TEST(VcGen, ErrorsCarrySpans) {
  std::string tri = corpus_text("trisection.erc");
  auto prog = lang::load(replace(tri, "//@ variant: y - x - iota(p - 1)\n", ""), "t.erc");
  try {
    generate_vcs(prog, "Trisection");
    FAIL();
  } catch (const MissingAnnotation& e) {
    EXPECT_NE(std::string(e.what()).find("t.erc:"), std::string::npos) << e.what();
  }
}

TEST(Export, VcFilesRoundTrip) {
  auto prog = load_corpus("trisection.erc");
  VcGenerator gen(prog, "Trisection");
  for (const auto& vc : active(gen.generate())) {
    std::string text = write_vc(vc, gen.signature());
    EXPECT_EQ(text.rfind("# " + vc.name + ": " + vc.kind, 0), 0u);
    VcFile back = parse_vc_file(text);
    EXPECT_EQ(to_string(back.formula), to_string(vc.formula));
    EXPECT_EQ(back.sig.functions.at("f"), 1);
  }
  EXPECT_THROW(parse_vc_file("fun f 1\nx > 0\n"), VerifyError);
  EXPECT_THROW(parse_vc_file("fun f\nforall x:REAL. x > 0\n"), VerifyError);
}

TEST(Export, SmtScriptDeclaresEverything) {
  auto prog = load_corpus("trisection.erc");
  VcGenerator gen(prog, "Trisection");
  auto open = active(gen.generate());
  for (const auto& vc : open) {
    std::string smt = to_smtlib(vc, gen.signature());
    EXPECT_NE(smt.find("(set-logic ALL)"), std::string::npos);
    EXPECT_NE(smt.find("(declare-fun f (Real) Real)"), std::string::npos);
    EXPECT_NE(smt.find("(define-fun uniq_f"), std::string::npos);
    EXPECT_NE(smt.find("(declare-const p Int)"), std::string::npos);
    EXPECT_NE(smt.find("(assert (not "), std::string::npos);
    EXPECT_EQ(smt.substr(smt.size() - 12), "(check-sat)\n");
    // parentheses balance
    int depth = 0;
    for (char c : smt) {
      depth += c == '(' ? 1 : c == ')' ? -1 : 0;
      ASSERT_GE(depth, 0);
    }
    EXPECT_EQ(depth, 0);
  }
}

TEST(Export, OutputDirectoryAndIndex) {
  auto prog = load_corpus("trisection.erc");
  VcGenerator gen(prog, "Trisection");
  auto vcs = gen.generate();
  auto dir = std::filesystem::temp_directory_path() / "erc_vcgen_test";
  std::filesystem::remove_all(dir);
  write_vc_outputs(dir, "Trisection", "trisection.erc", vcs, gen.signature());
  std::ifstream in(dir / "index.json");
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["function"], "Trisection");
  ASSERT_EQ(j["vcs"].size(), vcs.size());
  int open = 0;
  for (const auto& e : j["vcs"]) {
    if (e["discharged"].get<bool>()) {
      EXPECT_TRUE(e.contains("reason"));
      continue;
    }
    ++open;
    EXPECT_TRUE(std::filesystem::exists(dir / e["smt2"].get<std::string>()));
    auto back = read_vc_file(dir / e["vc"].get<std::string>());
    EXPECT_GE(match_goldens({bare(back.formula)}, goldens()).size(), 1u);
  }
  EXPECT_EQ(open, 5);
  // the written files are the goldens up to renaming
  std::vector<VC> written;
  for (int i = 0; i < 5; ++i) written.push_back(bare(read_vc_file(dir / ("vc_" + std::to_string(i) + ".vc")).formula));
  for (int m : match_goldens(written, goldens())) EXPECT_GE(m, 0);
  std::filesystem::remove_all(dir);
}
