#pragma once

#include "erc/lang/source.hpp"

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace erc::lang {

enum class TokKind { Ident, Number, Punct, Annotation, End };

struct Token {
  TokKind kind;
  std::string text;  // for Annotation: "key\ttext"
  Span span;
};

/// Splits ERC source into tokens. `//` comments are dropped except for
/// `//@ key: formula` annotations, which become tokens of their own.
inline std::vector<Token> tokenize(std::string_view src, const std::string& file) {
  static const char* const kPuncts[] = {":=", "&&", "||", ">=", "<=", "!=", "(", ")", "{", "}", "[", "]", ",",
                                        ";",  "+",  "-",  "*",  "/",  ">",  "<",  "=",  "!", "?", ":"};
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto here = [&] { return Span{file, line, col}; };
  auto bump = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(1);
      continue;
    }
    if (src.substr(i, 2) == "//") {
      Span at = here();
      std::size_t end = src.find('\n', i);
      if (end == std::string_view::npos) end = src.size();
      std::string_view body = src.substr(i + 2, end - i - 2);
      if (!body.empty() && body[0] == '@') {
        body.remove_prefix(1);
        std::size_t colon = body.find(':');
        if (colon == std::string_view::npos) throw SyntaxError(at, "annotation needs 'key: formula'");
        auto trim = [](std::string_view s) {
          while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
          while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
          return std::string(s);
        };
        out.push_back({TokKind::Annotation, trim(body.substr(0, colon)) + "\t" + trim(body.substr(colon + 1)), at});
      }
      bump(end - i);
      continue;
    }
    Span at = here();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({TokKind::Ident, std::string(src.substr(i, j - i)), at});
      bump(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        ++j;
        while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      }
      out.push_back({TokKind::Number, std::string(src.substr(i, j - i)), at});
      bump(j - i);
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      std::string_view pv(p);
      if (src.substr(i, pv.size()) == pv) {
        out.push_back({TokKind::Punct, std::string(pv), at});
        bump(pv.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw SyntaxError(at, std::string("unexpected character '") + c + "'");
  }
  out.push_back({TokKind::End, "", here()});
  return out;
}

}  // namespace erc::lang
