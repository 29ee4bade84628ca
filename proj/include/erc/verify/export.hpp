#pragma once

// VC files (.vc, readable by parse_vc_file), SMT-LIB 2 scripts and the JSON
// index written by `erc vc`.

#include "erc/verify/wp.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <regex>

namespace erc::verify {

struct VcFile {
  std::vector<std::string> comments;
  Signature sig;
  FormulaPtr formula;
};

/// Text of a .vc file: `#` comments, `fun NAME ARITY` lines, then one
/// closed formula.
inline std::string write_vc(const VC& vc, const Signature& sig) {
  std::ostringstream os;
  os << "# " << vc.name << ": " << vc.kind << " at " << vc.span.to_string() << "\n";
  for (const auto& [f, n] : sig.functions) os << "fun " << f << ' ' << n << "\n";
  os << to_string(vc.formula) << "\n";
  return os.str();
}

inline VcFile parse_vc_file(const std::string& text) {
  VcFile out;
  std::istringstream in(text);
  std::string line, body;
  while (std::getline(in, line)) {
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') {
      out.comments.push_back(line.substr(start + 1));
      continue;
    }
    if (line.compare(start, 4, "fun ") == 0) {
      std::istringstream ls(line.substr(start + 4));
      std::string name;
      int arity = -1;
      if (!(ls >> name >> arity) || arity < 0) throw VerifyError("malformed declaration: " + line);
      out.sig.functions[name] = arity;
      continue;
    }
    body += line + "\n";
  }
  out.formula = parse_formula(body, out.sig);
  SortMap fv = free_vars(out.formula);
  if (!fv.empty()) throw VerifyError("VC file formula is not closed (free: " + fv.begin()->first + ")");
  return out;
}

inline VcFile read_vc_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_vc_file(ss.str());
  } catch (const VerifyError& e) {
    throw VerifyError(path.string() + ": " + e.what());
  }
}

// ---- SMT-LIB ----

namespace detail {

inline std::string smt_symbol(const std::string& name) {
  static const std::regex plain("[A-Za-z_][A-Za-z0-9_]*");
  return std::regex_match(name, plain) ? name : "|" + name + "|";
}

inline std::string smt_sort(VSort s) { return s == VSort::Int ? "Int" : "Real"; }

inline std::string smt_number(const mpz_class& v, bool real) {
  std::string digits = mpz_class(abs(v)).get_str() + (real ? ".0" : "");
  return v < 0 ? "(- " + digits + ")" : digits;
}

inline std::string smt_const(const mpq_class& v, VSort s) {
  if (s == VSort::Int) return smt_number(v.get_num(), false);
  if (v.get_den() == 1) return smt_number(v.get_num(), true);
  return "(/ " + smt_number(v.get_num(), true) + " " + smt_number(v.get_den(), true) + ")";
}

inline std::string smt_term(const TermPtr& t) {
  auto bin = [&](const char* op) { return std::string("(") + op + " " + smt_term(t->args[0]) + " " + smt_term(t->args[1]) + ")"; };
  bool real = t->sort == VSort::Real;
  switch (t->kind) {
    case TermKind::Var: return smt_symbol(t->name);
    case TermKind::Const: return smt_const(t->value, t->sort);
    case TermKind::Add: return bin("+");
    case TermKind::Sub: return bin("-");
    case TermKind::Mul: return bin("*");
    case TermKind::Div: return bin("/");
    case TermKind::Neg: return "(- " + smt_term(t->args[0]) + ")";
    case TermKind::Iota: return "(iota " + smt_term(t->args[0]) + ")";
    case TermKind::ToReal: return "(to_real " + smt_term(t->args[0]) + ")";
    case TermKind::Abs: return std::string(real ? "(abs_real " : "(abs_int ") + smt_term(t->args[0]) + ")";
    case TermKind::Max: return bin(real ? "max_real" : "max_int");
    case TermKind::Read: return "(" + smt_symbol(t->name) + " " + smt_term(t->args[0]) + ")";
    case TermKind::App: {
      std::string s = "(" + smt_symbol(t->name);
      for (const auto& a : t->args) s += " " + smt_term(a);
      return s + ")";
    }
  }
  return "?";
}

inline std::string smt_formula(const FormulaPtr& f) {
  auto nary = [&](const char* op) {
    std::string s = std::string("(") + op;
    for (const auto& p : f->parts) s += " " + smt_formula(p);
    return s + ")";
  };
  switch (f->kind) {
    case FKind::True: return "true";
    case FKind::False: return "false";
    case FKind::Cmp: {
      std::string a = smt_term(f->terms[0]), b = smt_term(f->terms[1]);
      switch (f->op) {
        case CmpOp::Lt: return "(< " + a + " " + b + ")";
        case CmpOp::Le: return "(<= " + a + " " + b + ")";
        case CmpOp::Eq: return "(= " + a + " " + b + ")";
        case CmpOp::Ne: return "(not (= " + a + " " + b + "))";
        case CmpOp::Ge: return "(>= " + a + " " + b + ")";
        case CmpOp::Gt: return "(> " + a + " " + b + ")";
      }
      return "?";
    }
    case FKind::Cont: return "cont_" + f->name;
    case FKind::Uniq: return "(uniq_" + f->name + " " + smt_term(f->terms[0]) + " " + smt_term(f->terms[1]) + ")";
    case FKind::Not: return "(not " + smt_formula(f->parts[0]) + ")";
    case FKind::And: return nary("and");
    case FKind::Or: return nary("or");
    case FKind::Implies: return nary("=>");
    case FKind::Forall:
    case FKind::Exists:
      return std::string(f->kind == FKind::Forall ? "(forall ((" : "(exists ((") + smt_symbol(f->name) + " " +
             smt_sort(f->bound_sort) + ")) " + smt_formula(f->parts[0]) + ")";
    case FKind::Exists1: return smt_formula(expand_macros(f));
  }
  return "?";
}

}  // namespace detail

/// SMT-LIB 2 script whose unsatisfiability is the validity of the VC. The
/// universal prefix becomes constants; iota is axiomatized by iota(0) = 1
/// and iota(n+1) = 2 iota(n); uniq follows its definition.
inline std::string to_smtlib(const VC& vc, const Signature& sig) {
  std::ostringstream os;
  os << "; " << vc.name << ": " << vc.kind << " at " << vc.span.to_string() << "\n";
  os << "(set-logic ALL)\n";
  os << "(declare-fun iota (Int) Real)\n";
  os << "(assert (= (iota 0) 1.0))\n";
  os << "(assert (forall ((n Int)) (= (iota (+ n 1)) (* 2.0 (iota n)))))\n";
  os << "(define-fun abs_real ((a Real)) Real (ite (>= a 0.0) a (- a)))\n";
  os << "(define-fun abs_int ((a Int)) Int (ite (>= a 0) a (- a)))\n";
  os << "(define-fun max_real ((a Real) (b Real)) Real (ite (>= a b) a b))\n";
  os << "(define-fun max_int ((a Int) (b Int)) Int (ite (>= a b) a b))\n";
  for (const auto& [f, n] : sig.functions) {
    std::string s = detail::smt_symbol(f);
    os << "(declare-fun " << s << " (";
    for (int i = 0; i < n; ++i) os << (i ? " " : "") << "Real";
    os << ") Real)\n";
    os << "(declare-const cont_" << f << " Bool)\n";
    if (n == 1)
      os << "(define-fun uniq_" << f << " ((a Real) (b Real)) Bool (and (< a b) (< (* (" << s << " a) (" << s
         << " b)) 0.0) (exists ((r Real)) (and (<= a r) (<= r b) (= (" << s
         << " r) 0.0) (forall ((t Real)) (=> (and (<= a t) (<= t b) (= (" << s << " t) 0.0)) (= t r)))))))\n";
  }
  FormulaPtr body = vc.formula;
  while (body->kind == FKind::Forall) {
    std::string s = detail::smt_symbol(body->name);
    switch (body->bound_sort) {
      case VSort::Int: os << "(declare-const " << s << " Int)\n"; break;
      case VSort::Real: os << "(declare-const " << s << " Real)\n"; break;
      case VSort::IntArray: os << "(declare-fun " << s << " (Int) Int)\n"; break;
      case VSort::RealArray: os << "(declare-fun " << s << " (Int) Real)\n"; break;
    }
    body = body->parts[0];
  }
  os << "(assert (not " << detail::smt_formula(body) << "))\n";
  os << "(check-sat)\n";
  return os.str();
}

inline nlohmann::json vc_index(const std::string& function, const std::string& file, const std::vector<VC>& vcs) {
  nlohmann::json j;
  j["function"] = function;
  j["file"] = file;
  j["vcs"] = nlohmann::json::array();
  for (const auto& vc : vcs) {
    nlohmann::json e{{"name", vc.name}, {"kind", vc.kind}, {"span", vc.span.to_string()}, {"discharged", vc.discharged}};
    if (vc.discharged) e["reason"] = vc.reason;
    else {
      e["smt2"] = vc.name + ".smt2";
      e["vc"] = vc.name + ".vc";
    }
    j["vcs"].push_back(std::move(e));
  }
  return j;
}

/// Writes vc_i.smt2 and vc_i.vc for every open VC, and index.json.
inline void write_vc_outputs(const std::filesystem::path& dir, const std::string& function, const std::string& file,
                             const std::vector<VC>& vcs, const Signature& sig) {
  std::filesystem::create_directories(dir);
  for (const auto& vc : vcs) {
    if (vc.discharged) continue;
    std::ofstream(dir / (vc.name + ".smt2")) << to_smtlib(vc, sig);
    std::ofstream(dir / (vc.name + ".vc")) << write_vc(vc, sig);
  }
  std::ofstream(dir / "index.json") << vc_index(function, file, vcs).dump(2) << "\n";
}

/// Matches generated VCs to goldens by canonical form; returns, for each
/// golden, the index of its generated partner or -1.
inline std::vector<int> match_goldens(const std::vector<VC>& generated, const std::vector<FormulaPtr>& goldens) {
  Normalizer n;
  std::vector<std::string> gen;
  for (const auto& vc : generated) gen.push_back(n.canonical(vc.formula));
  std::vector<bool> used(gen.size(), false);
  std::vector<int> out;
  for (const auto& g : goldens) {
    std::string key = n.canonical(g);
    int hit = -1;
    for (std::size_t i = 0; i < gen.size() && hit < 0; ++i)
      if (!used[i] && gen[i] == key) hit = static_cast<int>(i);
    if (hit >= 0) used[hit] = true;
    out.push_back(hit);
  }
  return out;
}

}  // namespace erc::verify
