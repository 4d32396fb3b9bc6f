#pragma once

#include <stdexcept>
#include <string>

namespace stark {

// Every failure raised by the toolkit derives from Error so callers (the
// survey layer in particular) can record it without aborting a batch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative x, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Query point outside a sampled range (tabulated grids, trajectories, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at the ξ = 0 singularity of the transformed equation.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Adaptive integrator step collapsed below the underflow threshold.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double at, double step, long accepted, long rejected)
      : Error(what), at_(at), step_(step), accepted_(accepted), rejected_(rejected) {}

  double at() const noexcept { return at_; }
  double step() const noexcept { return step_; }
  long accepted_steps() const noexcept { return accepted_; }
  long rejected_steps() const noexcept { return rejected_; }

 private:
  double at_;
  double step_;
  long accepted_;
  long rejected_;
};

/// Truncated oscillatory tail whose remainder estimate dominates its value.
class UnreliableTailError : public Error {
 public:
  using Error::Error;
};

/// Oscillatory phase with a stationary point inside the integration range.
class StationaryPhaseError : public Error {
 public:
  using Error::Error;
};

/// Sampling too coarse for the requested frequency or window.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Integral that does not converge absolutely and has no oscillation to help.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Numerical pipeline produced an impossible state (zero Prüfer amplitude,
/// failed agreement gate, ...).
class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace stark
