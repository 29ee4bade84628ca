#pragma once

#include "erc/lang/consistency.hpp"
#include "erc/lang/desugar.hpp"
#include "erc/lang/interp.hpp"
#include "erc/lang/parser.hpp"
#include "erc/lang/typecheck.hpp"

#include <fstream>
#include <sstream>

namespace erc::lang {

inline CheckedProgram load(std::string_view source, const std::string& file = "<input>",
                           const std::map<std::string, mpz_class>& const_overrides = {}) {
  return typecheck(parse(source, file), const_overrides);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace erc::lang
