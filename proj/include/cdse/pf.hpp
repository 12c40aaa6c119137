#pragma once

#include "cdse/particles.hpp"

namespace cdse {

using WeightVector = Vector;

struct PfOptions {
  int threads = 1;
  // Resample only when ESS = 1 / sum(w^2) drops below this fraction of the
  // particle count; 0 disables the gate, so every update resamples. When the
  // gate skips resampling the normalized weights are carried in the set and
  // folded into the next update.
  double ess_threshold = 0.0;
};

ParticleSet pf_time_update(ParticleSet set, const ModelDescriptor& model, const Vector& u,
                           const Vector& d, double t_next, int n_steps,
                           const PfOptions& options = {});

// Per-particle Gaussian measurement log density,
//   log N(y; h(x_i), R) = -(n_y/2) log(2 pi) - (1/2) log|R| - (1/2) e^T R^-1 e.
WeightVector pf_log_likelihoods(const ParticleSet& set, const Vector& y,
                                const ModelDescriptor& model, int threads = 1);

// exp of log weights normalized to sum 1, with the running maximum subtracted
// first so only relative likelihoods matter. Raises DegenerateWeightsError
// when every weight vanishes even in log space.
WeightVector normalize_log_weights(const WeightVector& log_weights);

// Normalized likelihood weights for one measurement (prior weights, if any,
// are the caller's business; see pf_measurement_update).
WeightVector pf_likelihood_weights(const ParticleSet& set, const Vector& y,
                                   const ModelDescriptor& model, int threads = 1);

// Systematic resampling: one uniform draw q1 places the comb
// q_i = (i - 1 + q1) / N over the cumulative weights; particle l is selected
// for every q_i in (s_{l-1}, s_l]. Copy counts therefore never differ from
// N w_l by more than one in either direction. Slot streams are not resampled:
// slot i keeps its stream no matter which state it receives.
ParticleSet systematic_resample(const ParticleSet& set, const WeightVector& weights,
                                RngStream& rng);
ParticleSet systematic_resample_at(const ParticleSet& set, const WeightVector& weights, double q1);

// Bootstrap update: weight by measurement likelihood, then resample (always,
// unless an ESS gate is enabled and satisfied).
ParticleSet pf_measurement_update(ParticleSet set, const Vector& y, const ModelDescriptor& model,
                                  RngStream& rng, const PfOptions& options = {});

}  // namespace cdse
