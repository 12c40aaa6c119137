#include "cdse/enkf.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "cdse/errors.hpp"

namespace cdse {

ParticleSet enkf_init(const InitialBelief& initial, int n_particles, RngStream& rng, double t0) {
  return init_particle_set(initial, n_particles, rng, t0);
}

ParticleSet enkf_time_update(ParticleSet set, const ModelDescriptor& model, const Vector& u,
                             const Vector& d, double t_next, int n_steps,
                             const EnkfOptions& options) {
  propagate_particles(set, model, u, d, t_next, n_steps, options.threads);
  return set;
}

ParticleSet enkf_measurement_update(ParticleSet set, const Vector& y, const ModelDescriptor& model,
                                    RngStream& rng, const EnkfOptions& options) {
  Matrix l;
  try {
    l = cholesky_lower_auto(symmetrize(model.measurement_noise));
  } catch (const FactorizationError& e) {
    throw FactorizationError(std::string("enkf_measurement_update: measurement noise: ") + e.what(),
                             e.pivot);
  }
  std::vector<Vector> perturbations(static_cast<std::size_t>(set.size()));
  for (auto& v : perturbations) v = l * rng.normal_vector(y.size());
  return enkf_measurement_update_with_noise(std::move(set), y, model, perturbations, options);
}

ParticleSet enkf_measurement_update_with_noise(ParticleSet set, const Vector& y,
                                               const ModelDescriptor& model,
                                               const std::vector<Vector>& perturbations,
                                               const EnkfOptions& options) {
  const int np = set.size();
  if (np < 2) throw DimensionError("enkf_measurement_update: need at least two particles");
  if (perturbations.size() != static_cast<std::size_t>(np))
    throw DimensionError("enkf_measurement_update: need one perturbation per particle");

  std::vector<Vector> predicted(static_cast<std::size_t>(np));
#pragma omp parallel for schedule(static) num_threads(std::max(1, options.threads))
  for (int i = 0; i < np; ++i)
    predicted[static_cast<std::size_t>(i)] =
        model.measurement(set.time, set.states[static_cast<std::size_t>(i)], model.theta);
  if (predicted.front().size() != y.size())
    throw DimensionError("enkf_measurement_update: measurement has size " +
                         std::to_string(y.size()) + ", model predicts " +
                         std::to_string(predicted.front().size()));

  // Fixed-order serial reductions keep the result independent of thread count.
  const Moments state_m = ensemble_moments(set.states);
  const Moments pred_m = ensemble_moments(predicted);

  Matrix cross = Matrix::Zero(model.n_x, y.size());
  if (options.cross_cov == EnkfCrossCov::DeterministicPredictions) {
    for (int i = 0; i < np; ++i) {
      const auto s = static_cast<std::size_t>(i);
      cross.noalias() +=
          (set.states[s] - state_m.mean) * (predicted[s] - pred_m.mean).transpose();
    }
  } else {
    Vector pbar = Vector::Zero(y.size());
    for (const Vector& v : perturbations) pbar += y + v;
    pbar /= static_cast<double>(np);
    for (int i = 0; i < np; ++i) {
      const auto s = static_cast<std::size_t>(i);
      cross.noalias() +=
          (set.states[s] - state_m.mean) * (y + perturbations[s] - pbar).transpose();
    }
  }
  cross /= static_cast<double>(np - 1);

  const Matrix ens_cov = symmetrize(pred_m.cov + model.measurement_noise);
  Matrix l;
  try {
    l = cholesky_lower(ens_cov);
  } catch (const FactorizationError& e) {
    throw SingularInnovationError(std::string("enkf_measurement_update: ") + e.what());
  }
  if (l.diagonal().minCoeff() <= 0.0)
    throw SingularInnovationError("enkf_measurement_update: innovation covariance is singular");
  const Matrix gain = solve_right_spd(l, cross);

#pragma omp parallel for schedule(static) num_threads(std::max(1, options.threads))
  for (int i = 0; i < np; ++i) {
    const auto s = static_cast<std::size_t>(i);
    set.states[s] += gain * (y + perturbations[s] - predicted[s]);
  }
  return set;
}

}  // namespace cdse
