#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdse/four_tank.hpp"
#include "oracles.hpp"

using namespace cdse;

namespace {

Vector interior_state(RngStream& rng) {
  Vector x(6);
  for (int i = 0; i < 4; ++i) x(i) = 50.0 + 4950.0 * rng.uniform01();
  x(4) = 50.0 + 250.0 * rng.uniform01();
  x(5) = 50.0 + 250.0 * rng.uniform01();
  return x;
}

Vector pumps(double f1, double f2) {
  Vector u(2);
  u << f1, f2;
  return u;
}

}  // namespace

TEST_CASE("an empty quiescent plant has exactly zero drift") {
  FourTankParams p;
  p.nominal_flow3 = ExogenousSignal::constant(Vector::Zero(1));
  p.nominal_flow4 = ExogenousSignal::constant(Vector::Zero(1));
  const Vector dx = four_tank_drift(0.0, Vector::Zero(6), pumps(0.0, 0.0), p);
  CHECK(dx.norm() == 0.0);
}

TEST_CASE("an empty tank integrates its inflows only") {
  FourTankParams p;
  Vector x = Vector::Zero(6);
  x(4) = 90.0;
  x(5) = 40.0;
  const Vector dx = four_tank_drift(0.0, x, pumps(100.0, 200.0), p);
  CHECK(dx(0) == doctest::Approx(p.density * p.gamma1 * 100.0).epsilon(1e-14));
  CHECK(dx(1) == doctest::Approx(p.density * p.gamma2 * 200.0).epsilon(1e-14));
  CHECK(dx(2) == doctest::Approx(p.density * ((1.0 - p.gamma2) * 200.0 + 90.0)).epsilon(1e-14));
  CHECK(dx(3) == doctest::Approx(p.density * ((1.0 - p.gamma1) * 100.0 + 40.0)).epsilon(1e-14));
}

TEST_CASE("negative masses are clamped to the empty outlet flow") {
  FourTankParams p;
  Vector x = Vector::Zero(6);
  x(0) = -25.0;
  const Vector dx = four_tank_drift(0.0, x, pumps(120.0, 0.0), p);
  CHECK(std::isfinite(dx(0)));
  CHECK(dx(0) == doctest::Approx(p.density * p.gamma1 * 120.0).epsilon(1e-14));
}

TEST_CASE("disturbance flows relax toward their nominal values") {
  FourTankParams p;
  Vector x = Vector::Zero(6);
  x(4) = 150.0;
  x(5) = 100.0;
  const Vector dx = four_tank_drift(0.0, x, pumps(0.0, 0.0), p);
  CHECK(dx(4) == 0.0);
  CHECK(dx(5) == doctest::Approx(p.lambda2 * 50.0).epsilon(1e-14));
}

TEST_CASE("diffusion has the disturbance rows and nothing else") {
  FourTankParams p;
  p.sigma1 = 3.0;
  p.sigma2 = 7.0;
  const Matrix sig = four_tank_diffusion(p);
  REQUIRE(sig.rows() == 6);
  REQUIRE(sig.cols() == 2);
  CHECK(sig(4, 0) == 3.0);
  CHECK(sig(5, 1) == 7.0);
  Matrix zeroed = sig;
  zeroed(4, 0) = 0.0;
  zeroed(5, 1) = 0.0;
  CHECK(zeroed.norm() == 0.0);
}

TEST_CASE("measurements are the levels") {
  FourTankParams p;
  CHECK(four_tank_measurement(Vector::Zero(6), p).norm() == 0.0);
  Vector x = Vector::Zero(6);
  for (int i = 0; i < 4; ++i) x(i) = p.density * p.tank_area[static_cast<std::size_t>(i)];
  const Vector y = four_tank_measurement(x, p);
  for (int i = 0; i < 4; ++i) CHECK(y(i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("measurement jacobian matches finite differences") {
  FourTankParams p;
  RngStream rng(4);
  const Vector x = interior_state(rng);
  const Matrix c = four_tank_measurement_jacobian(p);
  const Matrix fd = jacobian_fd([&](const Vector& v) { return four_tank_measurement(v, p); }, x);
  CHECK((c - fd).norm() <= 1e-9 * (1.0 + c.norm()));
}

TEST_CASE("drift jacobian matches finite differences on interior states") {
  FourTankParams p;
  RngStream rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector x = interior_state(rng);
    const Vector u = pumps(400.0 * rng.uniform01(), 400.0 * rng.uniform01());
    const Matrix a = four_tank_drift_jacobian(0.0, x, p);
    const Matrix fd =
        jacobian_fd([&](const Vector& v) { return four_tank_drift(0.0, v, u, p); }, x);
    CHECK((a - fd).norm() <= 1e-5 * (1.0 + a.norm()));
  }
}

TEST_CASE("without inflows the total stored mass can only drain") {
  FourTankParams p;
  RngStream rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x = interior_state(rng);
    x(4) = 0.0;
    x(5) = 0.0;
    const Vector dx = four_tank_drift(0.0, x, pumps(0.0, 0.0), p);
    CHECK(dx.head(4).sum() <= 0.0);
  }
}

TEST_CASE("the steady state is a fixed point of the drift") {
  FourTankParams p;
  p.nominal_flow3 = ExogenousSignal::constant(Vector::Constant(1, 160.0));
  p.nominal_flow4 = ExogenousSignal::constant(Vector::Constant(1, 140.0));
  const Vector x = four_tank_steady_state(p, 250.0, 325.0, 160.0, 140.0);
  CHECK(x.minCoeff() > 0.0);
  const Vector dx = four_tank_drift(0.0, x, pumps(250.0, 325.0), p);
  CHECK(dx.norm() <= 1e-9);
}

TEST_CASE("the model descriptor wires the plant functions together") {
  FourTankParams p;
  const Matrix r = 0.25 * Matrix::Identity(4, 4);
  const ModelDescriptor m = make_four_tank_model(p, r);
  CHECK(m.n_x == 6);
  CHECK(m.n_u == 2);
  CHECK(m.n_y == 4);
  CHECK(m.n_w == 2);
  RngStream rng(8);
  const Vector x = interior_state(rng);
  const Vector u = pumps(300.0, 300.0);
  CHECK((m.drift(1.5, x, u, Vector(), m.theta) - four_tank_drift(1.5, x, u, p)).norm() == 0.0);
  CHECK((m.diffusion(0.0, x, u, Vector(), m.theta) - four_tank_diffusion(p)).norm() == 0.0);
  CHECK((m.measurement(0.0, x, m.theta) - four_tank_measurement(x, p)).norm() == 0.0);
  CHECK((m.drift_jacobian_at(2.0, x, u, Vector()) - four_tank_drift_jacobian(2.0, x, p)).norm() ==
        0.0);
  CHECK((m.measurement_jacobian_at(0.0, x) - four_tank_measurement_jacobian(p)).norm() == 0.0);
  CHECK_THROWS_AS(make_four_tank_model(p, Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("staircase nominal flows steer the disturbance drift") {
  FourTankParams p;
  p.nominal_flow3 = ExogenousSignal::piecewise({0.0, 100.0}, {Vector::Constant(1, 100.0),
                                                              Vector::Constant(1, 300.0)});
  Vector x = Vector::Zero(6);
  x(4) = 100.0;
  CHECK(four_tank_drift(50.0, x, pumps(0.0, 0.0), p)(4) == 0.0);
  CHECK(four_tank_drift(100.0, x, pumps(0.0, 0.0), p)(4) ==
        doctest::Approx(p.lambda1 * 200.0).epsilon(1e-14));
}

TEST_CASE("disturbance paths reach the stationary variance of the mean reverting flow") {
  const double lambda = 0.1;
  const double sigma = 5.0;
  const double target = sigma * sigma / (2.0 * lambda);
  const double t_end = 50.0;
  const int n_steps = 1250;
  const int n_paths = 10000;
  RngStream parent(33);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n_paths; ++i) {
    RngStream stream = parent.substream(static_cast<std::uint64_t>(i));
    NoiseSource noise = NoiseSource::random(stream);
    const Vector x = integrate_sde_em(
        [lambda](double, const Vector& v) { return Vector(-lambda * (v.array() - 150.0)); },
        [sigma](double, const Vector&) { return Matrix::Constant(1, 1, sigma); },
        Vector::Constant(1, 150.0), 0.0, t_end, n_steps, noise);
    sum += x(0) - 150.0;
    sum_sq += (x(0) - 150.0) * (x(0) - 150.0);
  }
  const double mean = sum / n_paths;
  const double var = (sum_sq - n_paths * mean * mean) / (n_paths - 1);
  const double stderr_var = target * std::sqrt(2.0 / (n_paths - 1));
  CHECK(std::abs(mean) <= 5.0 * std::sqrt(target / n_paths));
  CHECK(std::abs(var - target) <= 5.0 * stderr_var);
}
