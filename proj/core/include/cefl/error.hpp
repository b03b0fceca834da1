#pragma once

#include <stdexcept>
#include <string>

namespace cefl {

/// Raised when a model, protocol or run configuration violates a constraint.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation receives input of the wrong shape or range.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the CSV and config readers. Carries the 1-based line number
/// (0 when the failure is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Shape mismatches between objects that should always agree internally.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cefl

#include <vector>

namespace cefl {

/// Non-fatal events collected while generating data or running protocols.
using WarningLog = std::vector<std::string>;

}  // namespace cefl
