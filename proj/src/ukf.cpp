#include "cdse/ukf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cdse/errors.hpp"

namespace cdse {

namespace {

// Weighted mean recentred on the first point:
//   sum_i wm(i) x_i = x_0 + sum_{i>=1} wm(i) (x_i - x_0)
// (the weights sum to one). With small alpha the centre weight is a large
// negative number and the naive sum cancels catastrophically; the recentred
// form only ever scales deviations.
Vector weighted_mean(const std::vector<Vector>& points, const Vector& wm) {
  Vector acc = Vector::Zero(points.front().size());
  for (std::size_t i = 1; i < points.size(); ++i)
    acc += wm(static_cast<Eigen::Index>(i)) * (points[i] - points.front());
  return points.front() + acc;
}

}  // namespace

UkfWeights ukf_weights(double alpha, double beta, double kappa, int n) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("ukf_weights: alpha must lie in (0, 1]");
  if (beta < 0.0) throw std::invalid_argument("ukf_weights: beta must be non-negative");
  if (kappa < 0.0) throw std::invalid_argument("ukf_weights: kappa must be non-negative");
  if (n < 1) throw std::invalid_argument("ukf_weights: dimension must be positive");

  UkfWeights w;
  w.c = alpha * alpha * (n + kappa);
  w.lambda = w.c - n;
  w.wm = Vector::Constant(2 * n + 1, 1.0 / (2.0 * w.c));
  w.wc = w.wm;
  w.wm(0) = w.lambda / w.c;
  w.wc(0) = w.wm(0) + 1.0 - alpha * alpha + beta;
  return w;
}

UkfParams::UkfParams(double alpha, double beta, double kappa)
    : alpha_(alpha), beta_(beta), kappa_(kappa) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("UkfParams: alpha must lie in (0, 1]");
  if (beta < 0.0) throw std::invalid_argument("UkfParams: beta must be non-negative");
  if (kappa < 0.0) throw std::invalid_argument("UkfParams: kappa must be non-negative");
}

SigmaSet ukf_sigma_points(const Vector& mean, const Matrix& cov, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("ukf_sigma_points: scaling must be positive");
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw DimensionError("ukf_sigma_points: covariance does not match mean size " +
                         std::to_string(mean.size()));
  const Matrix l = cholesky_lower_auto(cov);
  const double s = std::sqrt(c);
  const Eigen::Index n = mean.size();
  SigmaSet set;
  set.points.resize(2 * static_cast<std::size_t>(n) + 1);
  set.points[0] = mean;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector offset = s * l.col(i);
    set.points[static_cast<std::size_t>(i) + 1] = mean + offset;
    set.points[static_cast<std::size_t>(n + i) + 1] = mean - offset;
  }
  return set;
}

GaussianBelief ukf_time_update(const GaussianBelief& belief, const ModelDescriptor& model,
                               const Vector& u, const Vector& d, double t_next, int n_steps,
                               const UkfParams& params) {
  const int n = model.n_x;
  const int nw = model.n_w;
  if (belief.mean.size() != n || belief.cov.rows() != n)
    throw DimensionError("ukf_time_update: belief does not match model state size " +
                         std::to_string(n));
  const double dt = t_next - belief.time;
  const UkfWeights w = params.weights_for(n + nw);

  SigmaSet set = ukf_sigma_points(belief.mean, symmetrize(belief.cov), w.c);
  const double total = std::sqrt(w.c * dt);
  for (int i = 0; i < nw; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vector inc = Vector::Zero(nw);
      inc(i) = sign * total;
      set.points.push_back(belief.mean);
      set.noise_totals.push_back(std::move(inc));
    }
  }

  auto drift = [&](double t, const Vector& x) { return model.drift(t, x, u, d, model.theta); };
  auto diffusion = [&](double t, const Vector& x) {
    return model.diffusion(t, x, u, d, model.theta);
  };

  // Few points, cheap per-point work: propagation stays sequential. Results
  // would be identical in any evaluation order since no RNG is involved.
  const std::size_t n_state_points = 2 * static_cast<std::size_t>(n) + 1;
  for (std::size_t i = 0; i < n_state_points; ++i)
    set.points[i] = integrate_ode(drift, set.points[i], belief.time, t_next, n_steps);
  for (std::size_t j = 0; j < set.noise_totals.size(); ++j) {
    NoiseSource noise = NoiseSource::deterministic(set.noise_totals[j]);
    set.points[n_state_points + j] = integrate_sde_em(drift, diffusion, set.points[n_state_points + j],
                                                      belief.time, t_next, n_steps, noise);
  }

  GaussianBelief out;
  out.mean = weighted_mean(set.points, w.wm);
  Matrix cov = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    const Vector dev = set.points[i] - out.mean;
    cov.noalias() += w.wc(static_cast<Eigen::Index>(i)) * (dev * dev.transpose());
  }
  out.cov = symmetrize(cov);
  out.time = t_next;
  return out;
}

UkfUpdateResult ukf_measurement_update(const GaussianBelief& belief, const Vector& y,
                                       const ModelDescriptor& model, const UkfParams& params) {
  const int n = model.n_x;
  const UkfWeights w = params.weights_for(n);
  const SigmaSet set = ukf_sigma_points(belief.mean, symmetrize(belief.cov), w.c);

  std::vector<Vector> z(set.points.size());
  for (std::size_t i = 0; i < set.points.size(); ++i)
    z[i] = model.measurement(belief.time, set.points[i], model.theta);
  if (y.size() != z.front().size())
    throw DimensionError("ukf_measurement_update: measurement has size " +
                         std::to_string(y.size()) + ", model predicts " +
                         std::to_string(z.front().size()));

  const Vector zbar = weighted_mean(z, w.wm);
  Matrix r_zz = Matrix::Zero(y.size(), y.size());
  Matrix cross = Matrix::Zero(n, y.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Vector zdev = z[i] - zbar;
    const Vector xdev = set.points[i] - belief.mean;
    const double wc = w.wc(static_cast<Eigen::Index>(i));
    r_zz.noalias() += wc * (zdev * zdev.transpose());
    cross.noalias() += wc * (xdev * zdev.transpose());
  }

  MeasurementUpdateReport report;
  report.innovation = y - zbar;
  report.innovation_cov = symmetrize(r_zz + model.measurement_noise);
  Matrix l;
  try {
    l = cholesky_lower(report.innovation_cov);
  } catch (const FactorizationError& e) {
    throw SingularInnovationError(std::string("ukf_measurement_update: ") + e.what());
  }
  if (l.diagonal().minCoeff() <= 0.0)
    throw SingularInnovationError("ukf_measurement_update: innovation covariance is singular");
  report.gain = solve_right_spd(l, cross);

  GaussianBelief out;
  out.time = belief.time;
  out.mean = belief.mean + report.gain * report.innovation;
  out.cov = posterior_cov_subtraction(belief.cov, report.gain, report.innovation_cov);
  return {std::move(out), std::move(report)};
}

}  // namespace cdse
