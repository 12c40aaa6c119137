#include "cdse/particles.hpp"

#include <algorithm>
#include <exception>
#include <string>
#include <utility>

#include "cdse/errors.hpp"

namespace cdse {

ParticleSet init_particle_set(const InitialBelief& initial, int n_particles, RngStream& rng,
                              double t0) {
  if (n_particles < 2) throw DimensionError("init_particle_set: need at least two particles");
  const Matrix l = cholesky_lower_auto(symmetrize(initial.cov));
  ParticleSet set;
  set.time = t0;
  set.states.resize(static_cast<std::size_t>(n_particles));
  set.streams.reserve(static_cast<std::size_t>(n_particles));
  for (int i = 0; i < n_particles; ++i) {
    set.states[static_cast<std::size_t>(i)] = initial.mean + l * rng.normal_vector(initial.mean.size());
    set.streams.push_back(rng.substream(static_cast<std::uint64_t>(i)));
  }
  return set;
}

namespace {

struct SlotFailure {
  std::exception_ptr unexpected;  // non-integration exception, rethrown as-is
  int step = -1;
  std::string message;
  bool failed = false;
};

void propagate_slot(ParticleSet& set, std::size_t i, const ModelDescriptor& model, const Vector& u,
                    const Vector& d, double t_next, int n_steps) {
  auto drift = [&](double t, const Vector& x) { return model.drift(t, x, u, d, model.theta); };
  auto diffusion = [&](double t, const Vector& x) {
    return model.diffusion(t, x, u, d, model.theta);
  };
  NoiseSource noise = NoiseSource::random(set.streams[i]);
  set.states[i] =
      integrate_sde_em(drift, diffusion, set.states[i], set.time, t_next, n_steps, noise);
}

void rethrow_first_failure(const std::vector<SlotFailure>& failures) {
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].failed) continue;
    if (failures[i].unexpected) std::rethrow_exception(failures[i].unexpected);
    throw IntegrationError(failures[i].message + " (particle " + std::to_string(i) + ")",
                           failures[i].step, static_cast<int>(i));
  }
}

}  // namespace

void propagate_particles_serial(ParticleSet& set, const ModelDescriptor& model, const Vector& u,
                                const Vector& d, double t_next, int n_steps) {
  for (std::size_t i = 0; i < set.states.size(); ++i) {
    try {
      propagate_slot(set, i, model, u, d, t_next, n_steps);
    } catch (const IntegrationError& e) {
      throw IntegrationError(std::string(e.what()) + " (particle " + std::to_string(i) + ")",
                             e.step, static_cast<int>(i));
    }
  }
  set.time = t_next;
}

void propagate_particles(ParticleSet& set, const ModelDescriptor& model, const Vector& u,
                         const Vector& d, double t_next, int n_steps, int threads) {
  const int np = set.size();
  std::vector<SlotFailure> failures(static_cast<std::size_t>(np));
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads))
  for (int i = 0; i < np; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    try {
      propagate_slot(set, slot, model, u, d, t_next, n_steps);
    } catch (const IntegrationError& e) {
      failures[slot].failed = true;
      failures[slot].step = e.step;
      failures[slot].message = e.what();
    } catch (...) {
      failures[slot].failed = true;
      failures[slot].unexpected = std::current_exception();
    }
  }
  rethrow_first_failure(failures);
  set.time = t_next;
}

Moments particle_moments(const ParticleSet& set) {
  if (set.weights.size() == 0) return ensemble_moments(set.states);
  if (set.weights.size() != set.size())
    throw DimensionError("particle_moments: weight vector does not match particle count");
  const Eigen::Index n = set.states.front().size();
  Vector mean = Vector::Zero(n);
  for (int i = 0; i < set.size(); ++i) mean += set.weights(i) * set.states[static_cast<std::size_t>(i)];
  Matrix cov = Matrix::Zero(n, n);
  double sq = 0.0;
  for (int i = 0; i < set.size(); ++i) {
    const Vector dev = set.states[static_cast<std::size_t>(i)] - mean;
    cov.noalias() += set.weights(i) * (dev * dev.transpose());
    sq += set.weights(i) * set.weights(i);
  }
  // Unbiased normalization for normalized weights, matching 1/(N-1) when uniform.
  if (sq < 1.0) cov /= 1.0 - sq;
  return {std::move(mean), std::move(cov)};
}

}  // namespace cdse
