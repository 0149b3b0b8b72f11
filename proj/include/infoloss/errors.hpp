#pragma once

#include <stdexcept>
#include <string>

namespace infoloss {

/// Input rejected before any numerics ran: bad shape, violated precondition,
/// malformed config. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between operands (a ValidationError subtype).
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical invariant broke during a computation (positivity breach,
/// trace drift, isospectrality loss). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double time = -1.0)
      : std::runtime_error(what), time_(time) {}

  /// Simulation time at which the violation was observed, or -1.
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace infoloss
