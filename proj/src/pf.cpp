#include "cdse/pf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "cdse/errors.hpp"

namespace cdse {

ParticleSet pf_time_update(ParticleSet set, const ModelDescriptor& model, const Vector& u,
                           const Vector& d, double t_next, int n_steps, const PfOptions& options) {
  propagate_particles(set, model, u, d, t_next, n_steps, options.threads);
  return set;
}

WeightVector pf_log_likelihoods(const ParticleSet& set, const Vector& y,
                                const ModelDescriptor& model, int threads) {
  Matrix l;
  try {
    l = cholesky_lower(symmetrize(model.measurement_noise));
  } catch (const FactorizationError& e) {
    throw FactorizationError(std::string("pf_log_likelihoods: measurement noise: ") + e.what(),
                             e.pivot);
  }
  if (l.diagonal().minCoeff() <= 0.0)
    throw FactorizationError("pf_log_likelihoods: measurement noise covariance is singular", -1);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  const double log_norm =
      -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) + log_det);

  const int np = set.size();
  WeightVector lw(np);
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads))
  for (int i = 0; i < np; ++i) {
    const Vector e =
        y - model.measurement(set.time, set.states[static_cast<std::size_t>(i)], model.theta);
    const Vector white = l.triangularView<Eigen::Lower>().solve(e);
    lw(i) = log_norm - 0.5 * white.squaredNorm();
  }
  return lw;
}

WeightVector normalize_log_weights(const WeightVector& log_weights) {
  const double top = log_weights.maxCoeff();
  if (!std::isfinite(top))
    throw DegenerateWeightsError("normalize_log_weights: every particle weight vanished");
  WeightVector w = (log_weights.array() - top).exp();
  const double sum = w.sum();
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw DegenerateWeightsError("normalize_log_weights: weight sum is not positive");
  return w / sum;
}

WeightVector pf_likelihood_weights(const ParticleSet& set, const Vector& y,
                                   const ModelDescriptor& model, int threads) {
  return normalize_log_weights(pf_log_likelihoods(set, y, model, threads));
}

ParticleSet systematic_resample_at(const ParticleSet& set, const WeightVector& weights,
                                   double q1) {
  const int np = set.size();
  if (weights.size() != np)
    throw DimensionError("systematic_resample: weight vector does not match particle count");
  if (!(q1 > 0.0 && q1 <= 1.0))
    throw ContractError("systematic_resample: q1 must lie in (0, 1]");
  if (weights.minCoeff() < 0.0)
    throw ContractError("systematic_resample: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw ContractError("systematic_resample: weights sum to " + std::to_string(weights.sum()) +
                        ", expected 1 within 1e-9");

  ParticleSet out;
  out.time = set.time;
  out.streams = set.streams;
  out.states.resize(static_cast<std::size_t>(np));
  int l = 0;
  double cum = weights(0);
  for (int i = 0; i < np; ++i) {
    const double q = (static_cast<double>(i) + q1) / static_cast<double>(np);
    while (q > cum && l < np - 1) {
      ++l;
      cum += weights(l);
    }
    out.states[static_cast<std::size_t>(i)] = set.states[static_cast<std::size_t>(l)];
  }
  return out;
}

ParticleSet systematic_resample(const ParticleSet& set, const WeightVector& weights,
                                RngStream& rng) {
  return systematic_resample_at(set, weights, rng.uniform01_open0());
}

ParticleSet pf_measurement_update(ParticleSet set, const Vector& y, const ModelDescriptor& model,
                                  RngStream& rng, const PfOptions& options) {
  WeightVector lw = pf_log_likelihoods(set, y, model, options.threads);
  if (set.weights.size() != 0) lw += set.weights.array().log().matrix();
  const WeightVector w = normalize_log_weights(lw);

  if (options.ess_threshold > 0.0) {
    const double ess = 1.0 / w.squaredNorm();
    if (ess >= options.ess_threshold * static_cast<double>(set.size())) {
      set.weights = w;
      return set;
    }
  }
  return systematic_resample(set, w, rng);
}

}  // namespace cdse
