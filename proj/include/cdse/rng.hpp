#pragma once

#include <cstdint>

#include "cdse/types.hpp"

namespace cdse {

// Counter-seeded PRNG stream (xoshiro256++ core, splitmix64 seeding).
//
// A stream is identified by (seed, stream_id) and always produces the same
// draw sequence for that identity, regardless of thread schedule, platform or
// how many other streams exist. State is a handful of machine words, so large
// per-particle stream arrays stay cheap. Normal draws use Box-Muller with the
// second value of each pair cached, which keeps sequences reproducible without
// relying on the implementation-defined std::normal_distribution.
//
// A stream is single-owner mutable: share it across threads only by giving
// each worker its own substream.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Derived stream with a statistically independent sequence. Depends only on
  // this stream's identity and `index`, never on how much has been drawn.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  double uniform01();       // [0, 1)
  double uniform01_open0(); // (0, 1]
  double normal();          // N(0, 1)
  Vector normal_vector(Eigen::Index n);

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Process-noise increments for one SDE integration pass over an interval.
// Random: independent Wiener increments N(0, h I) drawn from a stream.
// Deterministic: a fixed total increment spread uniformly over the interval,
// so an internal step of width h receives (h / interval) * total.
class NoiseSource {
 public:
  static NoiseSource random(RngStream& stream);
  static NoiseSource deterministic(Vector total_increment);

  bool is_random() const { return stream_ != nullptr; }
  const Vector& total_increment() const { return total_; }

  Vector step_increment(Eigen::Index n_noise, double h, double interval);

 private:
  NoiseSource() = default;
  RngStream* stream_ = nullptr;  // non-owning
  Vector total_;
};

}  // namespace cdse
