#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ibfit {

// Base of every error raised by the library. The CLI maps subclasses onto
// distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the support of a distribution, or an empty tail.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Distribution parameters violate the family's invariants.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Data carries no information for the requested estimate (zero variance,
// all tail samples at x_min, constant log-density differences).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Input text could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        detail_(what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }
  // The message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

// Structurally valid input whose content is not acceptable (bad config
// field, unknown measure name, missing balance-sheet month).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Not enough data to reach a verdict.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace ibfit
