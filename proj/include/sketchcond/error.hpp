#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sketchcond {

/// Caller-supplied input violates a documented precondition (CLI exit code 2).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter lies outside the mathematical domain of an operation.
class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public PreconditionError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : PreconditionError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Factorization failure, iteration cap, or non-convergence (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw PreconditionError(what);
}

inline void require_domain(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace sketchcond
