#pragma once

#include "cdse/numerics.hpp"
#include "cdse/types.hpp"

namespace cdse {

// Gaussian state estimate at a point in time. `cov` is kept symmetric by the
// filters that produce it.
struct GaussianBelief {
  Vector mean;
  Matrix cov;
  double time = 0.0;
};

// Diagnostics from one measurement update.
struct MeasurementUpdateReport {
  Vector innovation;
  Matrix innovation_cov;
  Matrix gain;
};

// P - K R_e K^T, symmetrized. The unscented update uses this form; the
// extended filter uses the Joseph form in production and keeps this one
// available so the algebraic equivalence of the two stays testable.
inline Matrix posterior_cov_subtraction(const Matrix& cov, const Matrix& gain,
                                        const Matrix& innovation_cov) {
  return symmetrize(cov - gain * innovation_cov * gain.transpose());
}

}  // namespace cdse
