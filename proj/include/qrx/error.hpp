#pragma once

#include <stdexcept>
#include <string>

namespace qrx {

/// Invalid input to a library operation.
class ArgumentError : public std::invalid_argument
{
 public:
  using std::invalid_argument::invalid_argument;
};

/// A receiver configuration breaks a physical constraint (e.g. PNR ceiling).
class ConstraintError : public std::invalid_argument
{
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: quadrature or eigen-solver did not converge.
class NumericalError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError
{
 public:
  using NumericalError::NumericalError;
};

}  // namespace qrx
