#pragma once

#include "erc/lang/interp.hpp"

#include <map>
#include <string>
#include <vector>

namespace erc::corpus {

using core::RealNum;

/// Polynomial with rational coefficients, lowest degree first.
struct Polynomial {
  std::vector<mpq_class> coeffs;

  int degree() const {
    for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
      if (coeffs[i] != 0) return i;
    return -1;
  }

  mpq_class operator()(const mpq_class& x) const {
    mpq_class acc = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  RealNum operator()(const RealNum& x) const {
    RealNum acc;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + RealNum::from_rational(*it);
    return acc;
  }

  Polynomial derivative() const {
    Polynomial d;
    for (std::size_t i = 1; i < coeffs.size(); ++i) d.coeffs.push_back(coeffs[i] * static_cast<long>(i));
    return d;
  }

  void trim() {
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
  }

  std::string to_string(const std::string& var = "x") const {
    std::string out;
    for (int i = degree(); i >= 0; --i) {
      if (coeffs[i] == 0) continue;
      mpq_class c = coeffs[i];
      bool neg = c < 0;
      if (neg) c = -c;
      out += out.empty() ? (neg ? "-" : "") : (neg ? " - " : " + ");
      if (i == 0 || c != 1) out += c.get_str() + (i > 0 ? "*" : "");
      if (i >= 1) out += var;
      if (i >= 2) out += "^" + std::to_string(i);
    }
    return out.empty() ? "0" : out;
  }
};

inline Polynomial remainder(Polynomial a, const Polynomial& b) {
  a.trim();
  int db = b.degree();
  if (db < 0) throw std::domain_error("polynomial division by zero");
  while (a.degree() >= db) {
    int da = a.degree();
    mpq_class f = a.coeffs[da] / b.coeffs[db];
    for (int i = 0; i <= db; ++i) a.coeffs[da - db + i] -= f * b.coeffs[i];
    a.trim();
  }
  return a;
}

/// Number of distinct real roots in (a, b], by Sturm's theorem.
inline int count_roots(const Polynomial& p, const mpq_class& a, const mpq_class& b) {
  if (p.degree() <= 0) return 0;
  std::vector<Polynomial> seq{p, p.derivative()};
  while (seq.back().degree() > 0) {
    Polynomial r = remainder(seq[seq.size() - 2], seq.back());
    for (auto& c : r.coeffs) c = -c;
    if (r.degree() < 0) break;
    seq.push_back(r);
  }
  auto variations = [&](const mpq_class& x) {
    int v = 0, last = 0;
    for (const auto& s : seq) {
      int sg = sgn(s(x));
      if (sg == 0) continue;
      if (last != 0 && sg != last) ++v;
      last = sg;
    }
    return v;
  };
  return variations(a) - variations(b);
}

/// uniq(f, a, b): exactly one root in [a, b] and f(a) * f(b) < 0.
inline bool uniq(const Polynomial& p, const mpq_class& a, const mpq_class& b) {
  if (!(a < b)) return false;
  if (p(a) * p(b) >= 0) return false;
  return count_roots(p, a, b) == 1;
}

struct TestFunction {
  std::string key;
  Polynomial poly;
  std::string root;  // closed form, for reports
};

inline const std::map<std::string, TestFunction>& test_functions() {
  static const std::map<std::string, TestFunction> fns = [] {
    std::map<std::string, TestFunction> m;
    m["linear"] = {"linear", {{mpq_class(-1), mpq_class(2)}}, "1/2"};
    m["affine"] = {"affine", {{mpq_class(-1, 3), mpq_class(1)}}, "1/3"};
    m["cubic"] = {"cubic", {{mpq_class(-1, 8), mpq_class(-1, 2), mpq_class(0), mpq_class(1)}}, "(1+sqrt(5))/4"};
    return m;
  }();
  return fns;
}

inline const TestFunction& test_function(const std::string& key) {
  // descriptive aliases
  static const std::map<std::string, std::string> alias{
      {"linear_2x_minus_1", "linear"}, {"affine_x_minus_third", "affine"}, {"cubic_x3_minus_x_half_minus_eighth", "cubic"}};
  if (auto a = alias.find(key); a != alias.end()) return test_functions().at(a->second);
  auto it = test_functions().find(key);
  if (it == test_functions().end()) {
    std::string known;
    for (const auto& [k, f] : test_functions()) known += (known.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown test function '" + key + "' (known: " + known + ")");
  }
  return it->second;
}

/// Host binding for a REAL -> REAL prototype.
inline lang::NativeFn native(const Polynomial& p) {
  return [p](const std::vector<lang::Value>& args) -> lang::Value {
    if (args.size() != 1 || !args[0].is<RealNum>())
      throw std::invalid_argument("test functions take one REAL argument");
    return p(args[0].real());
  };
}

}  // namespace erc::corpus
