#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bayeswarp {

/// Malformed arguments: grid mismatch, bad sizes, out-of-range parameters.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A tangent vector or sphere point outside the injectivity radius of the
/// exponential map at the identity (||g|| >= pi - 1e-6, or an antipodal psi).
class InjectivityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Factorization failures and similar numerical breakdowns.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

}  // namespace bayeswarp
