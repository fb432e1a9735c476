#pragma once

#include <stdexcept>
#include <string>

namespace topspec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed geometry: empty scaled domain, field/domain mismatch, U not a subset of D.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of budget. Carries the best residual reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what + " (best residual " + std::to_string(best_residual) + ")"),
        best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace topspec
