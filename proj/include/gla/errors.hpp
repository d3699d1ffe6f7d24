#pragma once

#include <stdexcept>
#include <string>

namespace gla {

// Base class for all workbench errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration, invalid parameter, missing file. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operand shape mismatch; the message names the offending field.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An iterative method failed to converge. Carries the last residual norm.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_ = 0.0;
};

// Numerical structure violated: defective eigenbasis, Hamiltonian eigenvalues
// on the imaginary axis, singular Newton matrix, non-finite values. Exit code 1.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gla
