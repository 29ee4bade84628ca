#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace erc::lang {

struct Span {
  std::string file;
  int line = 0;
  int column = 0;

  std::string site() const { return file + ":" + std::to_string(line); }
  std::string to_string() const { return file + ":" + std::to_string(line) + ":" + std::to_string(column); }
};

/// Base for errors that point at a source location.
class SourceError : public std::runtime_error {
 public:
  SourceError(const std::string& kind, const Span& span, const std::string& msg)
      : std::runtime_error(span.to_string() + ": " + kind + ": " + msg), span_(span), message_(msg) {}
  const Span& span() const { return span_; }
  const std::string& message() const { return message_; }

 private:
  Span span_;
  std::string message_;
};

class SyntaxError : public SourceError {
 public:
  SyntaxError(const Span& span, const std::string& msg) : SourceError("syntax error", span, msg) {}
};

class SortError : public SourceError {
 public:
  SortError(const Span& span, const std::string& msg) : SourceError("sort error", span, msg) {}
};

}  // namespace erc::lang
