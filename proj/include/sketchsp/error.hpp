#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sketchsp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number of the offending line
/// (0 when the problem is not tied to a line, e.g. a truncated file).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A configuration or argument outside the documented domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A block shape that violates the cache constraint.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

#define SKETCHSP_REQUIRE(cond, ExcType, msg)  \
  do {                                        \
    if (!(cond)) throw ExcType(msg);          \
  } while (0)

}  // namespace sketchsp
