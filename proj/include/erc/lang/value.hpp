#pragma once

#include "erc/core/real.hpp"
#include "erc/lang/ast.hpp"

#include <variant>
#include <vector>

namespace erc::lang {

using core::RealNum;
using IntArray = std::vector<mpz_class>;
using RealArray = std::vector<RealNum>;

struct Value {
  std::variant<mpz_class, RealNum, IntArray, RealArray> data;

  Value() : data(mpz_class(0)) {}
  Value(mpz_class v) : data(std::move(v)) {}
  Value(long v) : data(mpz_class(v)) {}
  Value(RealNum v) : data(std::move(v)) {}
  Value(IntArray v) : data(std::move(v)) {}
  Value(RealArray v) : data(std::move(v)) {}

  static Value zero(const Sort& s) {
    if (!s.array) return s.base == Base::Integer ? Value(mpz_class(0)) : Value(RealNum());
    auto n = static_cast<std::size_t>(s.length);
    return s.base == Base::Integer ? Value(IntArray(n)) : Value(RealArray(n));
  }

  bool matches(const Sort& s) const {
    if (!s.array) return s.base == Base::Integer ? is<mpz_class>() : is<RealNum>();
    auto n = static_cast<std::size_t>(s.length);
    if (s.base == Base::Integer) return is<IntArray>() && as<IntArray>().size() == n;
    return is<RealArray>() && as<RealArray>().size() == n;
  }

  template <class T>
  bool is() const { return std::holds_alternative<T>(data); }
  template <class T>
  const T& as() const { return std::get<T>(data); }
  template <class T>
  T& as() { return std::get<T>(data); }

  const mpz_class& integer() const { return as<mpz_class>(); }
  const RealNum& real() const { return as<RealNum>(); }
};

}  // namespace erc::lang
