#include "cdse/rng.hpp"

#include <cmath>
#include <numbers>

#include "cdse/errors.hpp"

namespace cdse {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += kGolden;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t z = seed ^ (kGolden * (stream_id + 0x632BE59BD9B4E019ULL));
  for (auto& s : state_) s = splitmix64(z);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RngStream RngStream::substream(std::uint64_t index) const {
  std::uint64_t z = stream_id_ ^ (0xD1B54A32D192ED03ULL * (index + 1));
  return RngStream(seed_, splitmix64(z));
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform01_open0() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform01_open0();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(angle);
  has_cached_normal_ = true;
  return r * std::cos(angle);
}

Vector RngStream::normal_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

NoiseSource NoiseSource::random(RngStream& stream) {
  NoiseSource s;
  s.stream_ = &stream;
  return s;
}

NoiseSource NoiseSource::deterministic(Vector total_increment) {
  NoiseSource s;
  s.total_ = std::move(total_increment);
  return s;
}

Vector NoiseSource::step_increment(Eigen::Index n_noise, double h, double interval) {
  if (is_random()) return std::sqrt(h) * stream_->normal_vector(n_noise);
  if (total_.size() != n_noise)
    throw DimensionError("NoiseSource: total increment has size " + std::to_string(total_.size()) +
                         ", diffusion expects " + std::to_string(n_noise));
  return (h / interval) * total_;
}

}  // namespace cdse
