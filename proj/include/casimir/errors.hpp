#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace casimir {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical or physical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or incomplete configuration (missing table, bad registry, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that parsed but violates an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Quadrature or series failed to reach its tolerance. Carries what was
// accumulated so callers can decide whether the partial answer is usable.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double partial_value,
                   double est_rel_error)
      : Error(what), partial_value_(partial_value),
        est_rel_error_(est_rel_error) {}

  double partial_value() const noexcept { return partial_value_; }
  double est_rel_error() const noexcept { return est_rel_error_; }

 private:
  double partial_value_;
  double est_rel_error_;
};

// The calibration data cannot separate the fitted parameters.
class IdentifiabilityError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace casimir
