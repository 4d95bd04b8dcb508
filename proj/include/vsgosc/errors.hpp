#pragma once

#include <stdexcept>
#include <string>

namespace vsgosc {

/// Malformed configuration text. `line` and `column` are 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A well-formed input that violates a model invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Newton iteration on the network equations did not reach tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// A unit's angle relative to the PCC left (-pi/2, pi/2).
class LossOfSynchronism : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root finding on a polynomial whose roots are not trustworthy.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace vsgosc
