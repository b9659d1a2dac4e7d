#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcca {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument value (out-of-range counts, bad configuration).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A matrix required to be (strictly) positive definite failed the floor test.
class NearSingularError : public Error {
 public:
  NearSingularError(const std::string& what, double eigenvalue)
      : Error(what), offending_eigenvalue(eigenvalue) {}
  double offending_eigenvalue;
};

/// An iterative solver ran out of its iteration budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double final_residual, std::size_t iterations)
      : Error(what), residual(final_residual), iters(iterations) {}
  double residual;
  std::size_t iters;
};

/// Malformed input file; `offset` is a byte offset or a 1-based line number.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t where) : Error(what), offset(where) {}
  std::size_t offset;
};

/// Numerically degenerate input (rank-deficient basis, collapsed deflation direction).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcca
