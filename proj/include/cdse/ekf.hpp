#pragma once

#include "cdse/belief.hpp"
#include "cdse/model.hpp"

namespace cdse {

struct EkfUpdateResult {
  GaussianBelief belief;
  MeasurementUpdateReport report;
};

// Propagates mean and covariance to t_next by integrating
//   dx/dt = f(t, x, u, d),  dP/dt = A P + P A^T + sigma sigma^T
// as one stacked ODE with the fixed-step RK4 integrator, so the Jacobian A is
// re-evaluated along the mean trajectory at every stage. Inputs u and d are
// held constant over the interval.
GaussianBelief ekf_time_update(const GaussianBelief& belief, const ModelDescriptor& model,
                               const Vector& u, const Vector& d, double t_next, int n_steps);

// Standard linearized update with the Joseph-form covariance
// (I - K C) P (I - K C)^T + K R K^T.
EkfUpdateResult ekf_measurement_update(const GaussianBelief& belief, const Vector& y,
                                       const ModelDescriptor& model);

}  // namespace cdse
