#pragma once

#include <functional>
#include <vector>

#include "cdse/numerics.hpp"
#include "cdse/types.hpp"

namespace cdse {

// Central-difference Jacobian of func at x. Per-component steps are
// rel_step * max(|x_j|, 1). Non-finite function values raise EvaluationError.
Matrix jacobian_fd(const std::function<Vector(const Vector&)>& func, const Vector& x,
                   double rel_step = 1e-6);

// Piecewise-constant signal over time: holds the last value at or before t and
// clamps to the first value before the first switch time (so it is total and
// right-continuous). A default-constructed signal evaluates to an empty vector.
class ExogenousSignal {
 public:
  ExogenousSignal() = default;
  static ExogenousSignal constant(Vector value);
  static ExogenousSignal piecewise(std::vector<double> times, std::vector<Vector> values);

  Vector at(double t) const;
  bool empty() const { return values_.empty(); }

 private:
  std::vector<double> times_;
  std::vector<Vector> values_;
};

// Continuous-time system with discrete measurements:
//   dx = drift(t, x, u, d, theta) dt + diffusion(t, x, u, d, theta) dw
//   y  = measurement(t, x, theta) + v,  v ~ N(0, measurement_noise)
//
// Callbacks must be pure given their arguments; a descriptor is immutable
// after construction and safe to evaluate concurrently.
struct ModelDescriptor {
  int n_x = 0;
  int n_u = 0;
  int n_d = 0;
  int n_y = 0;
  int n_w = 0;
  Vector theta;

  std::function<Vector(double t, const Vector& x, const Vector& u, const Vector& d,
                       const Vector& theta)>
      drift;
  std::function<Matrix(double t, const Vector& x, const Vector& u, const Vector& d,
                       const Vector& theta)>
      diffusion;
  std::function<Vector(double t, const Vector& x, const Vector& theta)> measurement;

  // Optional analytic Jacobians; when absent the *_jacobian_at accessors fall
  // back to jacobian_fd.
  std::function<Matrix(double t, const Vector& x, const Vector& u, const Vector& d,
                       const Vector& theta)>
      drift_jacobian;
  std::function<Matrix(double t, const Vector& x, const Vector& theta)> measurement_jacobian;

  Matrix measurement_noise;

  int n_theta() const { return static_cast<int>(theta.size()); }
  Matrix drift_jacobian_at(double t, const Vector& x, const Vector& u, const Vector& d) const;
  Matrix measurement_jacobian_at(double t, const Vector& x) const;
};

struct InitialBelief {
  Vector mean;
  Matrix cov;
};

}  // namespace cdse
