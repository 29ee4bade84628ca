// erc: run ERC programs, generate and sample-check verification conditions,
// and run the corpus suite.
//
// Exit codes:
//   0 success            4 BudgetExhausted          7 other runtime error
//   1 usage or I/O       5 missing annotation       8 golden mismatch or
//   2 SyntaxError          or unsupported construct   failing corpus case
//   3 SortError          6 counterexample found

#include "erc/corpus/harness.hpp"
#include "erc/lang.hpp"
#include "erc/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace erc;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSyntax = 2, kSort = 3, kBudget = 4, kAnnotation = 5, kCounterexample = 6,
            kRuntime = 7, kMismatch = 8 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

mpq_class parse_number(const std::string& text) {
  std::string t = text;
  bool neg = !t.empty() && t[0] == '-';
  if (neg) t = t.substr(1);
  mpq_class q;
  try {
    if (auto dot = t.find('.'); dot != std::string::npos) {
      std::string frac = t.substr(dot + 1);
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
      q = mpq_class(mpz_class(t.substr(0, dot).empty() ? "0" : t.substr(0, dot)) * scale + mpz_class(frac.empty() ? "0" : frac), scale);
    } else {
      q = mpq_class(t);
    }
  } catch (const std::invalid_argument&) {
    throw UsageError("not a number: '" + text + "'");
  }
  if (q.get_den() == 0) throw UsageError("not a number: '" + text + "'");
  q.canonicalize();
  return neg ? mpq_class(-q) : q;
}

lang::Value parse_argument(const std::string& text, const lang::Sort& sort) {
  auto integer = [&](const std::string& s) {
    mpq_class q = parse_number(s);
    if (q.get_den() != 1) throw UsageError("INTEGER argument expected, got '" + s + "'");
    return q.get_num();
  };
  if (!sort.array) {
    if (sort.base == lang::Base::Integer) return lang::Value(integer(text));
    return lang::Value(core::RealNum::from_rational(parse_number(text)));
  }
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) items.push_back(item);
  if (static_cast<std::int64_t>(items.size()) != sort.length)
    throw UsageError("array argument needs " + std::to_string(sort.length) + " entries, got " + std::to_string(items.size()));
  if (sort.base == lang::Base::Integer) {
    lang::IntArray a;
    for (const auto& i : items) a.push_back(integer(i));
    return lang::Value(std::move(a));
  }
  lang::RealArray a;
  for (const auto& i : items) a.push_back(core::RealNum::from_rational(parse_number(i)));
  return lang::Value(std::move(a));
}

lang::CheckedProgram load_source(const std::string& path) { return lang::load(lang::read_file(path), path); }

std::vector<std::string> bodies(const lang::CheckedProgram& prog) {
  std::vector<std::string> out;
  for (const auto& f : prog.program.functions)
    if (!f.is_prototype()) out.push_back(f.name);
  return out;
}

// ---- run ----

struct RunConfig {
  std::string file, entry, policy = "left", trace;
  std::optional<std::int64_t> p;
  std::optional<std::uint64_t> seed;
  std::uint64_t max_steps = core::EvalBudget{}.max_steps;
  std::int64_t min_precision = core::EvalBudget{}.min_precision;
  std::vector<std::string> fns, args;
};

core::ChoicePolicy make_policy(const std::string& mode, const std::optional<std::uint64_t>& seed) {
  if (mode == "left") return core::ChoicePolicy::left();
  if (mode == "right") return core::ChoicePolicy::right();
  if (!seed) throw UsageError("--policy random needs --seed");
  return core::ChoicePolicy::random(*seed);
}

void print_value(const lang::Value& v, const lang::EvalResult& res) {
  if (v.is<mpz_class>()) {
    std::cout << "result = " << v.integer().get_str() << "\n";
    return;
  }
  if (v.is<lang::IntArray>()) {
    std::cout << "result =";
    for (const auto& x : v.as<lang::IntArray>()) std::cout << ' ' << x.get_str();
    std::cout << "\n";
    return;
  }
  bool single = v.is<core::RealNum>();
  for (std::size_t i = 0; i < res.trace.result.size(); ++i) {
    const auto& e = res.trace.result[i];
    std::cout << (single ? std::string("result") : "result[" + std::to_string(i) + "]") << " in " << e.to_string()
              << "  ~ " << mpq_class((e.lo().to_rational() + e.hi().to_rational()) / 2).get_d() << "\n";
  }
}

int cmd_run(const RunConfig& cfg) {
  auto prog = load_source(cfg.file);
  std::string entry = cfg.entry;
  if (entry.empty()) {
    auto names = bodies(prog);
    if (names.size() != 1) throw UsageError("--entry is required when a file has several functions");
    entry = names[0];
  }
  const auto& fn = prog.function(entry);
  if (fn.takes_precision() && !cfg.p) throw UsageError("'" + entry + "' returns REAL and needs -p");
  lang::Natives natives;
  for (const auto& spec : cfg.fns) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw UsageError("--fn expects name=key, got '" + spec + "'");
    try {
      natives[spec.substr(0, eq)] = corpus::native(corpus::test_function(spec.substr(eq + 1)).poly);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::size_t skip = fn.takes_precision() ? 1 : 0;
  if (cfg.args.size() + skip != fn.params.size())
    throw UsageError("'" + entry + "' takes " + std::to_string(fn.params.size() - skip) + " argument(s)");
  std::vector<lang::Value> args;
  for (std::size_t i = 0; i < cfg.args.size(); ++i) args.push_back(parse_argument(cfg.args[i], *fn.params[i + skip].sort));
  lang::EvalOptions opt;
  opt.policy = make_policy(cfg.policy, cfg.seed);
  opt.budget.max_steps = cfg.max_steps;
  opt.budget.min_precision = cfg.min_precision;
  lang::Interpreter in(std::move(prog), std::move(natives));
  auto res = in.run(entry, std::move(args), cfg.p.value_or(0), opt);
  print_value(res.value, res);
  std::cout << "choices = " << res.trace.choices() << ", steps = " << res.stats.steps << "\n";
  if (!cfg.trace.empty()) {
    std::ofstream out(cfg.trace);
    if (!out) throw UsageError("cannot write " + cfg.trace);
    out << res.trace.serialize();
  }
  return kOk;
}

// ---- vc ----

struct VcConfig {
  std::string file, entry, out = "vcs", goldens;
  bool check_goldens = false;
};

std::vector<verify::FormulaPtr> read_goldens(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw UsageError("no golden directory " + dir.string());
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".vc") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<verify::FormulaPtr> out;
  for (const auto& f : files) out.push_back(verify::read_vc_file(f).formula);
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

int cmd_vc(const VcConfig& cfg) {
  auto prog = load_source(cfg.file);
  std::vector<std::string> names = cfg.entry.empty() ? bodies(prog) : std::vector<std::string>{cfg.entry};
  int status = kOk;
  for (const auto& name : names) {
    verify::VcGenerator gen(prog, name);
    auto vcs = gen.generate();
    auto open = verify::active(vcs);
    fs::path dir = names.size() == 1 ? fs::path(cfg.out) : fs::path(cfg.out) / name;
    verify::write_vc_outputs(dir, name, cfg.file, vcs, gen.signature());
    std::cout << name << ": " << open.size() << " VCs (" << vcs.size() - open.size() << " discharged) -> "
              << dir.string() << "\n";
    for (const auto& vc : vcs)
      std::cout << "  " << vc.name << "  " << vc.kind << " at " << vc.span.to_string()
                << (vc.discharged ? "  [" + vc.reason + "]" : "") << "\n";
    if (!cfg.check_goldens) continue;
    fs::path gdir = cfg.goldens.empty() ? fs::path(cfg.file).parent_path() / "goldens" / lower(name) : fs::path(cfg.goldens);
    auto goldens = read_goldens(gdir);
    auto match = verify::match_goldens(open, goldens);
    bool all = goldens.size() == open.size() && std::count(match.begin(), match.end(), -1) == 0;
    for (std::size_t i = 0; i < match.size(); ++i)
      std::cout << "  golden " << i + 1 << " -> " << (match[i] < 0 ? "NO MATCH" : open[match[i]].name) << "\n";
    std::cout << "  goldens: " << (all ? "match" : "MISMATCH") << " (" << goldens.size() << " golden, " << open.size()
              << " generated)\n";
    if (!all) status = kMismatch;
  }
  return status;
}

// ---- check ----

struct CheckConfig {
  std::vector<std::string> inputs;
  std::string entry;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
};

int cmd_check(const CheckConfig& cfg) {
  std::vector<std::pair<std::string, verify::FormulaPtr>> vcs;
  for (const auto& input : cfg.inputs) {
    fs::path path(input);
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path))
        if (e.path().extension() == ".vc") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) vcs.emplace_back(f.string(), verify::read_vc_file(f).formula);
    } else if (path.extension() == ".vc") {
      vcs.emplace_back(input, verify::read_vc_file(path).formula);
    } else {
      auto prog = load_source(input);
      for (const auto& name : cfg.entry.empty() ? bodies(prog) : std::vector<std::string>{cfg.entry})
        for (const auto& vc : verify::active(verify::generate_vcs(prog, name)))
          vcs.emplace_back(name + "/" + vc.name + " (" + vc.kind + ")", vc.formula);
    }
  }
  std::size_t refuted = 0, unsupported = 0;
  for (const auto& [label, f] : vcs) {
    try {
      auto rep = verify::sample_check(f, {.samples = cfg.samples, .seed = cfg.seed});
      if (rep.refuted) {
        ++refuted;
        std::cout << label << ": COUNTEREXAMPLE after " << rep.samples << " samples:";
        for (const auto& [v, val] : rep.counterexample) std::cout << ' ' << v << '=' << val;
        std::cout << "\n";
      } else {
        std::cout << label << ": no counterexample in " << rep.samples << " samples (" << rep.effective()
                  << " non-vacuous)\n";
      }
    } catch (const verify::UnsupportedQuantifierShape& e) {
      ++unsupported;
      std::cout << label << ": unsupported: " << e.what() << "\n";
    }
  }
  std::cout << vcs.size() << " VCs, " << refuted << " refuted, " << unsupported << " unsupported\n";
  return refuted ? kCounterexample : kOk;
}

// ---- corpus ----

struct CorpusConfig {
  std::string manifest = "corpus/corpus.json", family, json_out;
  std::optional<int> cases;
};

int cmd_corpus(const CorpusConfig& cfg) {
  std::ifstream in(cfg.manifest);
  if (!in) throw UsageError("cannot read " + cfg.manifest);
  auto manifest = nlohmann::json::parse(in);
  auto& fams = manifest.at("families");
  if (!cfg.family.empty()) {
    if (!fams.contains(cfg.family)) throw UsageError("no family '" + cfg.family + "' in " + cfg.manifest);
    fams = nlohmann::json{{cfg.family, fams.at(cfg.family)}};
  }
  if (cfg.cases)
    for (auto& [name, fam] : fams.items()) fam["cases"] = *cfg.cases;
  nlohmann::json report = nlohmann::json::object();
  bool all = true;
  corpus::run_manifest(manifest, fs::path(cfg.manifest).parent_path(), [&](const corpus::FamilyReport& r) {
    std::cout << r.name << ": " << r.passed << "/" << r.total << " passed\n";
    for (std::size_t i = 0; i < r.failures.size() && i < 5; ++i) std::cout << "  " << r.failures[i].dump() << "\n";
    report[r.name] = {{"passed", r.passed}, {"total", r.total}, {"failures", r.failures}};
    all = all && r.passed == r.total;
  });
  if (!cfg.json_out.empty()) std::ofstream(cfg.json_out) << report.dump(2) << "\n";
  return all ? kOk : kMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact real computation: interpreter, verifier and corpus"};
  app.require_subcommand(1);

  RunConfig run;
  if (const char* env = std::getenv("ERC_BUDGET_STEPS")) {
    try {
      run.max_steps = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: ERC_BUDGET_STEPS is not a number\n";
      return kUsage;
    }
  }
  auto* r = app.add_subcommand("run", "run a function at precision p");
  r->add_option("file", run.file, "source file")->required()->check(CLI::ExistingFile);
  r->add_option("args", run.args, "arguments: integers, rationals (5/2, 0.25), arrays as a,b,c");
  r->add_option("--entry,-e", run.entry, "function to run (default: the only one)");
  r->add_option("-p,--precision", run.p, "precision p: REAL results are returned within 2^p")->allow_extra_args(false);
  r->add_option("--policy", run.policy, "choice policy")->check(CLI::IsMember({"left", "right", "random"}));
  r->add_option("--seed", run.seed, "seed for --policy random");
  r->add_option("--max-steps", run.max_steps, "step budget (default from ERC_BUDGET_STEPS)");
  r->add_option("--min-precision", run.min_precision, "finest precision any refinement may use");
  r->add_option("--fn", run.fns, "bind a prototype to a test function, e.g. f=linear");
  r->add_option("--trace", run.trace, "write the choice trace to this file");

  VcConfig vc;
  auto* v = app.add_subcommand("vc", "generate verification conditions");
  v->add_option("file", vc.file, "annotated source")->required()->check(CLI::ExistingFile);
  v->add_option("--entry,-e", vc.entry, "only this function");
  v->add_option("--out,-o", vc.out, "output directory");
  v->add_flag("--check-goldens", vc.check_goldens, "compare with the stored golden VCs");
  v->add_option("--goldens", vc.goldens, "golden directory (default: <source dir>/goldens/<function>)");

  CheckConfig check;
  auto* c = app.add_subcommand("check", "sample-check VCs for counterexamples");
  c->add_option("inputs", check.inputs, ".vc files, directories of them, or .erc sources");
  c->add_option("--entry,-e", check.entry, "only this function of .erc inputs");
  c->add_option("--samples", check.samples, "samples per VC");
  c->add_option("--seed", check.seed, "sampler seed");

  CorpusConfig corp;
  auto* k = app.add_subcommand("corpus", "run the seeded corpus cases against their oracles");
  k->add_option("--manifest", corp.manifest, "corpus manifest");
  k->add_option("--family", corp.family, "only this family");
  k->add_option("--cases", corp.cases, "override cases per family and precision");
  k->add_option("--json", corp.json_out, "write a JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*r) return cmd_run(run);
    if (*v) return cmd_vc(vc);
    if (*c) return cmd_check(check);
    return cmd_corpus(corp);
  } catch (const lang::SyntaxError& e) {
    std::cerr << e.what() << "\n";
    return kSyntax;
  } catch (const lang::SortError& e) {
    std::cerr << e.what() << "\n";
    return kSort;
  } catch (const verify::MissingAnnotation& e) {
    std::cerr << e.what() << "\n";
    return kAnnotation;
  } catch (const verify::AnnotationError& e) {
    std::cerr << e.what() << "\n";
    return kAnnotation;
  } catch (const verify::UnsupportedConstruct& e) {
    std::cerr << e.what() << "\n";
    return kAnnotation;
  } catch (const lang::RuntimeSignal& e) {
    std::cerr << lang::kind_name(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == lang::RuntimeSignal::Kind::BudgetExhausted ? kBudget : kRuntime;
  } catch (const core::BudgetExhausted& e) {
    std::cerr << "BudgetExhausted: " << e.what() << "\n";
    return kBudget;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const verify::VerifyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
