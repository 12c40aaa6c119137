#pragma once

#include <stdexcept>
#include <string>

namespace cdse {

// Base type for all errors raised by this library.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cholesky factorization failed. `pivot` is the zero-based row of the offending
// pivot, or -1 when the input was rejected before factorization started.
class FactorizationError : public EstimationError {
 public:
  FactorizationError(const std::string& what, int pivot_index)
      : EstimationError(what), pivot(pivot_index) {}
  int pivot;
};

// An integrator produced a non-finite state. `step` is the failing internal
// step; `particle` is the particle index when raised from an ensemble kernel.
class IntegrationError : public EstimationError {
 public:
  explicit IntegrationError(const std::string& what, int step_index, int particle_index = -1)
      : EstimationError(what), step(step_index), particle(particle_index) {}
  int step;
  int particle;
};

class DimensionError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// A user-supplied callback returned a non-finite value.
class EvaluationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// A covariance left the positive-semidefinite cone beyond tolerance.
class CovarianceError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// The innovation (or ensemble measurement) covariance could not be inverted.
class SingularInnovationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// Every particle weight vanished, even after log-space normalization.
class DegenerateWeightsError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// An input violated a documented call contract (e.g. unnormalized weights).
class ContractError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

// MAPE is undefined because a true state component is exactly zero.
class UndefinedMapeError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

class ConfigError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace cdse
