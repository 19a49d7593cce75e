#pragma once

#include <stdexcept>
#include <string>

namespace screener {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed numeric input.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The mixed Hessian D_xy b is numerically singular (bi-twist violated).
class SingularTwist : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of iterations.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// A Newton solution left the closed product domain.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class MaxSweepsExceeded : public Error {
 public:
  MaxSweepsExceeded(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class TooFewPairs : public Error {
 public:
  using Error::Error;
};

/// The function coincides with its support locally, so there is no defect to fit.
class AllZeroDefect : public Error {
 public:
  using Error::Error;
};

class NonpositiveDefect : public Error {
 public:
  using Error::Error;
};

/// A precondition on the constraint/boundary mode of a grid was not met.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace screener
