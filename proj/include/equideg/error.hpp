#pragma once

#include <stdexcept>
#include <string>

namespace equideg {

// Base of every error the library raises. Messages are meant to be shown to
// the user verbatim by the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 64-bit integer overflow in ring or degree arithmetic.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// An eigenvalue sits within tolerance of a value the caller needs to be
// strictly on one side of (0 for Morse indices, k^2 for j_k, ...).
class DegenerateSpectrumError : public Error {
 public:
  DegenerateSpectrumError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A theorem's hypotheses are not met (e.g. more than one resonance on the interval).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The asymptotic Brouwer index is needed but the problem provides no rule.
class MissingIndexError : public Error {
 public:
  using Error::Error;
};

// Violated structural invariant of an input (odd Morse index on a complex
// block, non-symmetric matrix, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// det(A(lambda) - k^2) vanishes on a whole subinterval.
class TangencyError : public Error {
 public:
  using Error::Error;
};

// Gradient could not be evaluated (bad Kepler parameter, non-finite value).
class DomainError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  RankError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace equideg
