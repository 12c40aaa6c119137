#pragma once

#include <vector>

#include "cdse/model.hpp"
#include "cdse/numerics.hpp"
#include "cdse/rng.hpp"

namespace cdse {

// Equal-weight particle cloud unless `weights` is non-empty (it becomes
// non-empty only when a particle filter's ESS gate skips a resampling step).
// Each slot owns an RNG stream that drives its process noise; streams stay
// attached to slots across resampling, so results are reproducible for a given
// seed no matter how many threads propagate the cloud.
struct ParticleSet {
  std::vector<Vector> states;
  std::vector<RngStream> streams;
  Vector weights;
  double time = 0.0;

  int size() const { return static_cast<int>(states.size()); }
};

// Draws n_particles i.i.d. samples from the initial belief using `rng` in slot
// order and derives one substream of `rng` per slot. Reuse the same rng for
// two sets only if they are meant to be correlated.
ParticleSet init_particle_set(const InitialBelief& initial, int n_particles, RngStream& rng,
                              double t0 = 0.0);

// Euler-Maruyama propagation of every particle to t_next, each slot drawing
// noise from its own stream. Serial reference implementation.
void propagate_particles_serial(ParticleSet& set, const ModelDescriptor& model, const Vector& u,
                                const Vector& d, double t_next, int n_steps);

// OpenMP kernel with static scheduling. Bitwise identical to the serial
// reference for any thread count, because all randomness is per-slot and every
// write goes to the worker's own slots.
void propagate_particles(ParticleSet& set, const ModelDescriptor& model, const Vector& u,
                         const Vector& d, double t_next, int n_steps, int threads);

// Sample moments of the cloud; honours carried weights when present.
Moments particle_moments(const ParticleSet& set);

}  // namespace cdse
