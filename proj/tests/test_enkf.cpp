#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "cdse/enkf.hpp"
#include "oracles.hpp"

using namespace cdse;
using cdse::testing::make_linear_model;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

bool same_bits(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
    if (std::memcmp(a[i].data(), b[i].data(),
                    sizeof(double) * static_cast<std::size_t>(a[i].size())) != 0)
      return false;
  }
  return true;
}

ModelDescriptor scalar_ou_model(double lambda, double sigma) {
  ModelDescriptor m;
  m.n_x = 1;
  m.n_y = 1;
  m.n_w = 1;
  m.drift = [lambda](double, const Vector& x, const Vector&, const Vector&, const Vector&) {
    return Vector(-lambda * x);
  };
  m.diffusion = [sigma](double, const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Constant(1, 1, sigma);
  };
  m.measurement = [](double, const Vector& x, const Vector&) { return x; };
  m.measurement_noise = Matrix::Identity(1, 1);
  return m;
}

// Nonlinear three-state, two-measurement model for the update property tests.
ModelDescriptor bilinear_model() {
  ModelDescriptor m;
  m.n_x = 3;
  m.n_y = 2;
  m.n_w = 3;
  m.drift = [](double, const Vector& x, const Vector&, const Vector&, const Vector&) {
    return Vector(-0.5 * x);
  };
  m.diffusion = [](double, const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix(0.2 * Matrix::Identity(3, 3));
  };
  m.measurement = [](double, const Vector& x, const Vector&) {
    Vector y(2);
    y << x(0) * x(0), x(1) + x(2);
    return y;
  };
  Matrix r(2, 2);
  r << 0.5, 0.1, 0.1, 0.4;
  m.measurement_noise = r;
  return m;
}

}  // namespace

TEST_CASE("init with a zero covariance collapses every particle onto the mean") {
  Vector mean(2);
  mean << 1.5, -2.0;
  RngStream rng(7);
  const ParticleSet set = enkf_init({mean, Matrix::Zero(2, 2)}, 32, rng, 3.0);
  CHECK(set.size() == 32);
  CHECK(set.time == 3.0);
  CHECK(set.weights.size() == 0);
  for (const Vector& x : set.states) CHECK((x - mean).norm() == 0.0);
}

TEST_CASE("init is reproducible for a fixed seed") {
  const InitialBelief prior{Vector::Zero(3), Matrix::Identity(3, 3)};
  RngStream rng_a(42);
  RngStream rng_b(42);
  const ParticleSet a = enkf_init(prior, 100, rng_a);
  const ParticleSet b = enkf_init(prior, 100, rng_b);
  CHECK(same_bits(a.states, b.states));
  RngStream rng_c(43);
  const ParticleSet c = enkf_init(prior, 100, rng_c);
  CHECK(!same_bits(a.states, c.states));
}

TEST_CASE("init sampling moments match the initial belief") {
  Vector mean(2);
  mean << 1.0, -2.0;
  Matrix cov(2, 2);
  cov << 4.0, 1.0, 1.0, 9.0;
  RngStream rng(11);
  const int np = 10000;
  const ParticleSet set = enkf_init({mean, cov}, np, rng);
  const Moments m = particle_moments(set);
  for (int i = 0; i < 2; ++i) {
    const double stderr_mean = std::sqrt(cov(i, i) / np);
    CHECK(std::abs(m.mean(i) - mean(i)) <= 5.0 * stderr_mean);
    const double stderr_var = cov(i, i) * std::sqrt(2.0 / (np - 1));
    CHECK(std::abs(m.cov(i, i) - cov(i, i)) <= 5.0 * stderr_var);
  }
  CHECK(std::abs(m.cov(0, 1) - cov(0, 1)) <=
        5.0 * std::sqrt((cov(0, 0) * cov(1, 1) + cov(0, 1) * cov(0, 1)) / np));
}

TEST_CASE("time update with zero drift and zero diffusion leaves states untouched") {
  ModelDescriptor m = make_linear_model(Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                                        Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  RngStream rng(5);
  ParticleSet set = enkf_init({Vector::Zero(2), Matrix::Identity(2, 2)}, 40, rng);
  const std::vector<Vector> before = set.states;
  set = enkf_time_update(std::move(set), m, Vector(), Vector(), 2.0, 8);
  CHECK(set.time == 2.0);
  CHECK(same_bits(set.states, before));
}

TEST_CASE("noiseless time update reproduces the per-particle euler recursion") {
  Matrix a(2, 2);
  a << -0.3, 0.1, 0.05, -0.2;
  ModelDescriptor m = make_linear_model(a, Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                                        Matrix::Identity(2, 2));
  RngStream rng(9);
  ParticleSet set = enkf_init({Vector::Constant(2, 1.0), Matrix::Identity(2, 2)}, 16, rng);
  const std::vector<Vector> before = set.states;
  const double dt = 0.5;
  const int n_steps = 10;
  set = enkf_time_update(std::move(set), m, Vector(), Vector(), dt, n_steps);
  const double h = dt / n_steps;
  for (int i = 0; i < set.size(); ++i) {
    Vector x = before[static_cast<std::size_t>(i)];
    for (int k = 0; k < n_steps; ++k) x += h * (a * x);
    CHECK((set.states[static_cast<std::size_t>(i)] - x).norm() <= 1e-12 * (1.0 + x.norm()));
  }
}

TEST_CASE("ensemble of ornstein-uhlenbeck paths reaches the euler stationary variance") {
  const double lambda = 0.5;
  const double sigma = 1.0;
  ModelDescriptor m = scalar_ou_model(lambda, sigma);
  RngStream rng(21);
  const int np = 10000;
  ParticleSet set = enkf_init({Vector::Zero(1), Matrix::Zero(1, 1)}, np, rng);
  const double t_end = 20.0;
  const int n_steps = 2000;
  set = enkf_time_update(std::move(set), m, Vector(), Vector(), t_end, n_steps,
                         {EnkfCrossCov::DeterministicPredictions, 4});
  const double h = t_end / n_steps;
  // Euler-Maruyama fixed point of var <- (1 - lambda h)^2 var + sigma^2 h.
  const double discrete_var =
      sigma * sigma * h / (1.0 - (1.0 - lambda * h) * (1.0 - lambda * h));
  const Moments mom = particle_moments(set);
  CHECK(std::abs(mom.mean(0)) <= 5.0 * std::sqrt(discrete_var / np));
  CHECK(std::abs(mom.cov(0, 0) - discrete_var) <= 5.0 * discrete_var * std::sqrt(2.0 / (np - 1)));
}

TEST_CASE("time update is bitwise identical across thread counts") {
  ModelDescriptor m = bilinear_model();
  RngStream rng_a(17);
  RngStream rng_b(17);
  ParticleSet serial = enkf_init({Vector::Ones(3), 0.5 * Matrix::Identity(3, 3)}, 101, rng_a);
  ParticleSet parallel = enkf_init({Vector::Ones(3), 0.5 * Matrix::Identity(3, 3)}, 101, rng_b);
  serial = enkf_time_update(std::move(serial), m, Vector(), Vector(), 1.0, 20,
                            {EnkfCrossCov::DeterministicPredictions, 1});
  parallel = enkf_time_update(std::move(parallel), m, Vector(), Vector(), 1.0, 20,
                              {EnkfCrossCov::DeterministicPredictions, 4});
  CHECK(same_bits(serial.states, parallel.states));
}

TEST_CASE("measurement update with identical particles applies a zero gain") {
  ModelDescriptor m = bilinear_model();
  RngStream rng(3);
  ParticleSet set = enkf_init({Vector::Ones(3), Matrix::Zero(3, 3)}, 12, rng);
  const std::vector<Vector> before = set.states;
  set = enkf_measurement_update(std::move(set), Vector::Constant(2, 5.0), m, rng);
  CHECK(same_bits(set.states, before));
}

TEST_CASE("two particle scalar update matches the hand computation") {
  ModelDescriptor m = make_linear_model(Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                        Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  ParticleSet set;
  set.states = {scalar(0.0), scalar(2.0)};
  RngStream parent(1);
  set.streams = {parent.substream(0), parent.substream(1)};
  // Ensemble stats: mean 1, variance 2, predictions equal states, so
  // R_zz = 2, R_yy = 3, R_xy = 2 and the gain is 2/3.
  const std::vector<Vector> no_noise{scalar(0.0), scalar(0.0)};
  set = enkf_measurement_update_with_noise(std::move(set), scalar(1.0), m, no_noise);
  CHECK(set.states[0](0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(set.states[1](0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("large ensemble linear update converges to the kalman posterior") {
  Matrix c(1, 2);
  c << 1.0, 0.5;
  const Matrix r = Matrix::Constant(1, 1, 0.5);
  ModelDescriptor m =
      make_linear_model(Matrix::Zero(2, 2), Matrix::Identity(2, 2), c, r);
  Vector mean(2);
  mean << 1.0, -1.0;
  Matrix cov(2, 2);
  cov << 2.0, 0.5, 0.5, 1.0;
  const Vector y = scalar(2.0);
  const cdse::testing::KalmanStep post =
      cdse::testing::kalman_update({mean, cov}, c, r, y);

  RngStream rng(31);
  const int np = 100000;
  ParticleSet set = enkf_init({mean, cov}, np, rng);
  set = enkf_measurement_update(std::move(set), y, m, rng,
                                {EnkfCrossCov::DeterministicPredictions, 4});
  const Moments mom = particle_moments(set);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(mom.mean(i) - post.mean(i)) <= 5.0 * std::sqrt(post.cov(i, i) / np));
    CHECK(std::abs(mom.cov(i, i) - post.cov(i, i)) <=
          5.0 * post.cov(i, i) * std::sqrt(2.0 / (np - 1)));
  }
}

TEST_CASE("update applies the shared gain to each perturbed innovation") {
  ModelDescriptor m = bilinear_model();
  RngStream rng(13);
  const int np = 50;
  ParticleSet set = enkf_init({Vector::Ones(3), 0.3 * Matrix::Identity(3, 3)}, np, rng);
  std::vector<Vector> noise(static_cast<std::size_t>(np));
  for (auto& v : noise) v = 0.2 * rng.normal_vector(2);
  Vector y(2);
  y << 1.2, 2.1;

  const std::vector<Vector> prior = set.states;
  std::vector<Vector> predicted(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i)
    predicted[i] = m.measurement(set.time, prior[i], m.theta);
  const Moments state_m = ensemble_moments(prior);
  const Moments pred_m = ensemble_moments(predicted);
  Matrix cross = Matrix::Zero(3, 2);
  for (std::size_t i = 0; i < prior.size(); ++i)
    cross += (prior[i] - state_m.mean) * (predicted[i] - pred_m.mean).transpose();
  cross /= np - 1.0;
  const Matrix gain =
      (symmetrize(pred_m.cov + m.measurement_noise).ldlt().solve(cross.transpose())).transpose();

  set = enkf_measurement_update_with_noise(std::move(set), y, m, noise);
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const Vector expected = prior[i] + gain * (y + noise[i] - predicted[i]);
    CHECK((set.states[i] - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
  }
}

TEST_CASE("perturbed measurement cross covariance variant matches its definition") {
  ModelDescriptor m = bilinear_model();
  RngStream rng(29);
  const int np = 60;
  ParticleSet set = enkf_init({Vector::Ones(3), 0.3 * Matrix::Identity(3, 3)}, np, rng);
  std::vector<Vector> noise(static_cast<std::size_t>(np));
  for (auto& v : noise) v = 0.5 * rng.normal_vector(2);
  Vector y(2);
  y << 0.8, 1.9;

  const std::vector<Vector> prior = set.states;
  std::vector<Vector> predicted(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i)
    predicted[i] = m.measurement(set.time, prior[i], m.theta);
  const Moments state_m = ensemble_moments(prior);
  const Moments pred_m = ensemble_moments(predicted);
  Vector pbar = Vector::Zero(2);
  for (const Vector& v : noise) pbar += y + v;
  pbar /= static_cast<double>(np);
  Matrix cross = Matrix::Zero(3, 2);
  for (std::size_t i = 0; i < prior.size(); ++i)
    cross += (prior[i] - state_m.mean) * (y + noise[i] - pbar).transpose();
  cross /= np - 1.0;
  const Matrix gain =
      (symmetrize(pred_m.cov + m.measurement_noise).ldlt().solve(cross.transpose())).transpose();

  set = enkf_measurement_update_with_noise(std::move(set), y, m, noise,
                                           {EnkfCrossCov::PerturbedMeasurements, 1});
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const Vector expected = prior[i] + gain * (y + noise[i] - predicted[i]);
    CHECK((set.states[i] - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
  }
}

TEST_CASE("rng driven update draws cholesky scaled perturbations in slot order") {
  ModelDescriptor m = bilinear_model();
  RngStream init_rng(19);
  ParticleSet set_a = enkf_init({Vector::Ones(3), 0.3 * Matrix::Identity(3, 3)}, 25, init_rng);
  ParticleSet set_b = set_a;
  Vector y(2);
  y << 1.0, 2.0;

  RngStream update_rng_a(77);
  set_a = enkf_measurement_update(std::move(set_a), y, m, update_rng_a);

  RngStream update_rng_b(77);
  const Matrix l = cholesky_lower_auto(symmetrize(m.measurement_noise));
  std::vector<Vector> noise(static_cast<std::size_t>(set_b.size()));
  for (auto& v : noise) v = l * update_rng_b.normal_vector(2);
  set_b = enkf_measurement_update_with_noise(std::move(set_b), y, m, noise);
  CHECK(same_bits(set_a.states, set_b.states));
}

TEST_CASE("measurement update is bitwise identical across thread counts") {
  ModelDescriptor m = bilinear_model();
  RngStream rng(23);
  ParticleSet base = enkf_init({Vector::Ones(3), 0.3 * Matrix::Identity(3, 3)}, 77, rng);
  std::vector<Vector> noise(static_cast<std::size_t>(base.size()));
  for (auto& v : noise) v = 0.3 * rng.normal_vector(2);
  Vector y(2);
  y << 1.1, 1.8;
  ParticleSet serial = base;
  ParticleSet parallel = std::move(base);
  serial = enkf_measurement_update_with_noise(std::move(serial), y, m, noise,
                                              {EnkfCrossCov::DeterministicPredictions, 1});
  parallel = enkf_measurement_update_with_noise(std::move(parallel), y, m, noise,
                                                {EnkfCrossCov::DeterministicPredictions, 4});
  CHECK(same_bits(serial.states, parallel.states));
}

TEST_CASE("degenerate ensembles and malformed inputs raise typed errors") {
  ModelDescriptor m = make_linear_model(Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                                        Matrix::Identity(1, 1), Matrix::Zero(1, 1));
  RngStream rng(2);

  ParticleSet lone;
  lone.states = {scalar(1.0)};
  lone.streams = {rng.substream(0)};
  CHECK_THROWS_AS(enkf_measurement_update(std::move(lone), scalar(0.0), m, rng), DimensionError);

  ParticleSet pair = enkf_init({Vector::Zero(1), Matrix::Identity(1, 1)}, 4, rng);
  CHECK_THROWS_AS(enkf_measurement_update_with_noise(std::move(pair), scalar(0.0), m,
                                                     {scalar(0.0)}),
                  DimensionError);

  // Identical particles plus a zero measurement noise leave nothing to invert.
  ParticleSet flat = enkf_init({Vector::Zero(1), Matrix::Zero(1, 1)}, 8, rng);
  CHECK_THROWS_AS(enkf_measurement_update(std::move(flat), scalar(0.0), m, rng),
                  SingularInnovationError);

  ModelDescriptor wide = bilinear_model();
  ParticleSet mismatched = enkf_init({Vector::Ones(3), Matrix::Identity(3, 3)}, 8, rng);
  CHECK_THROWS_AS(enkf_measurement_update(std::move(mismatched), scalar(0.0), wide, rng),
                  DimensionError);
}
