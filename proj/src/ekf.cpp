#include "cdse/ekf.hpp"

#include <algorithm>
#include <string>

#include "cdse/errors.hpp"

namespace cdse {

GaussianBelief ekf_time_update(const GaussianBelief& belief, const ModelDescriptor& model,
                               const Vector& u, const Vector& d, double t_next, int n_steps) {
  const Eigen::Index n = model.n_x;
  if (belief.mean.size() != n || belief.cov.rows() != n || belief.cov.cols() != n)
    throw DimensionError("ekf_time_update: belief does not match model state size " +
                         std::to_string(n));

  Vector z0(n + n * n);
  z0.head(n) = belief.mean;
  Eigen::Map<Matrix>(z0.data() + n, n, n) = belief.cov;

  auto rhs = [&](double t, const Vector& z) {
    const Vector x = z.head(n);
    const Eigen::Map<const Matrix> cov(z.data() + n, n, n);
    const Matrix a = model.drift_jacobian_at(t, x, u, d);
    const Matrix sig = model.diffusion(t, x, u, d, model.theta);
    Vector dz(n + n * n);
    dz.head(n) = model.drift(t, x, u, d, model.theta);
    Eigen::Map<Matrix>(dz.data() + n, n, n) =
        a * cov + cov * a.transpose() + sig * sig.transpose();
    return dz;
  };

  const Vector z1 = integrate_ode(rhs, z0, belief.time, t_next, n_steps);

  GaussianBelief out;
  out.mean = z1.head(n);
  out.cov = symmetrize(Eigen::Map<const Matrix>(z1.data() + n, n, n));
  out.time = t_next;
  const double floor = 1e-10 * std::max(out.cov.trace(), 1e-12);
  if (min_eigenvalue(out.cov) < -floor)
    throw CovarianceError("ekf_time_update: propagated covariance is indefinite beyond tolerance");
  return out;
}

EkfUpdateResult ekf_measurement_update(const GaussianBelief& belief, const Vector& y,
                                       const ModelDescriptor& model) {
  const Vector predicted = model.measurement(belief.time, belief.mean, model.theta);
  if (y.size() != predicted.size())
    throw DimensionError("ekf_measurement_update: measurement has size " +
                         std::to_string(y.size()) + ", model predicts " +
                         std::to_string(predicted.size()));

  const Matrix c = model.measurement_jacobian_at(belief.time, belief.mean);
  MeasurementUpdateReport report;
  report.innovation = y - predicted;
  report.innovation_cov = symmetrize(c * belief.cov * c.transpose() + model.measurement_noise);

  Matrix l;
  try {
    l = cholesky_lower(report.innovation_cov);
  } catch (const FactorizationError& e) {
    throw SingularInnovationError(std::string("ekf_measurement_update: ") + e.what());
  }
  if (l.diagonal().minCoeff() <= 0.0)
    throw SingularInnovationError("ekf_measurement_update: innovation covariance is singular");
  report.gain = solve_right_spd(l, belief.cov * c.transpose());

  GaussianBelief out;
  out.time = belief.time;
  out.mean = belief.mean + report.gain * report.innovation;
  const Matrix ikc = Matrix::Identity(model.n_x, model.n_x) - report.gain * c;
  out.cov = symmetrize(ikc * belief.cov * ikc.transpose() +
                       report.gain * model.measurement_noise * report.gain.transpose());
  return {std::move(out), std::move(report)};
}

}  // namespace cdse
