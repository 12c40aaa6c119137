#pragma once

#include "cdse/particles.hpp"

namespace cdse {

// How the state-measurement cross covariance is formed in the ensemble update:
// from deviations of the deterministic predictions h(x_i) (default), or from
// deviations of the perturbed measurements y + v_i.
enum class EnkfCrossCov { DeterministicPredictions, PerturbedMeasurements };

struct EnkfOptions {
  EnkfCrossCov cross_cov = EnkfCrossCov::DeterministicPredictions;
  int threads = 1;
};

ParticleSet enkf_init(const InitialBelief& initial, int n_particles, RngStream& rng,
                      double t0 = 0.0);

ParticleSet enkf_time_update(ParticleSet set, const ModelDescriptor& model, const Vector& u,
                             const Vector& d, double t_next, int n_steps,
                             const EnkfOptions& options = {});

// Stochastic ensemble update: each particle is corrected with the shared gain
// and its own perturbed copy of the measurement,
//   x_i += K ((y + v_i) - h(x_i)),  v_i ~ N(0, R).
// Perturbations are drawn from `rng` in slot order before any parallel work.
ParticleSet enkf_measurement_update(ParticleSet set, const Vector& y, const ModelDescriptor& model,
                                    RngStream& rng, const EnkfOptions& options = {});

// Same update with caller-supplied perturbations, one per particle.
ParticleSet enkf_measurement_update_with_noise(ParticleSet set, const Vector& y,
                                               const ModelDescriptor& model,
                                               const std::vector<Vector>& perturbations,
                                               const EnkfOptions& options = {});

}  // namespace cdse
