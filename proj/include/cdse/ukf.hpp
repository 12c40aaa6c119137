#pragma once

#include <vector>

#include "cdse/belief.hpp"
#include "cdse/model.hpp"

namespace cdse {

// Scaled sigma-point weights for dimension n:
//   c = alpha^2 (n + kappa), lambda = c - n,
//   wm(0) = lambda / c, wc(0) = wm(0) + 1 - alpha^2 + beta,
//   wm(i) = wc(i) = 1 / (2c) for i >= 1.
struct UkfWeights {
  double c = 0.0;
  double lambda = 0.0;
  Vector wm;
  Vector wc;
};

UkfWeights ukf_weights(double alpha, double beta, double kappa, int n);

class UkfParams {
 public:
  UkfParams() = default;  // alpha 1, beta 2, kappa 0
  UkfParams(double alpha, double beta, double kappa);

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double kappa() const { return kappa_; }
  UkfWeights weights_for(int n) const { return ukf_weights(alpha_, beta_, kappa_, n); }

 private:
  double alpha_ = 1.0;
  double beta_ = 2.0;
  double kappa_ = 0.0;
};

// 2n+1 points: the mean, then mean +/- sqrt(c) times the columns of the lower
// Cholesky factor of cov. `noise_totals` is populated only by the time update
// (total Wiener increments attached to the extra noise points).
struct SigmaSet {
  std::vector<Vector> points;
  std::vector<Vector> noise_totals;
};

SigmaSet ukf_sigma_points(const Vector& mean, const Matrix& cov, double c);

struct UkfUpdateResult {
  GaussianBelief belief;
  MeasurementUpdateReport report;
};

// Augmented-noise time update. Weights are formed for n_x + n_w; the 2 n_x
// state points run through the ODE integrator while 2 n_w copies of the mean
// run through the SDE integrator, each with a deterministic total Wiener
// increment of +/- sqrt(c * dt) along one noise axis spread evenly over the
// internal steps. Prediction moments combine all 2 (n_x + n_w) + 1 points.
GaussianBelief ukf_time_update(const GaussianBelief& belief, const ModelDescriptor& model,
                               const Vector& u, const Vector& d, double t_next, int n_steps,
                               const UkfParams& params);

// Measurement update with fresh sigma points (weights formed for n_x) drawn
// from the predicted belief; posterior covariance is P - K R_e K^T.
UkfUpdateResult ukf_measurement_update(const GaussianBelief& belief, const Vector& y,
                                       const ModelDescriptor& model, const UkfParams& params);

}  // namespace cdse
