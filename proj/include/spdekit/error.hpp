#pragma once

#include <stdexcept>
#include <string>

namespace spdekit {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent on-disk data.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure or degenerate input data: singular Gram matrix,
/// vanishing denominators, blow-up, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Simulation state exceeded the magnitude bound.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, long step)
      : NumericalError(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace spdekit
