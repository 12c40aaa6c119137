#include "cdse/four_tank.hpp"

#include <cmath>
#include <string>

#include "cdse/errors.hpp"

namespace cdse {

namespace {

void check_state(const Vector& state) {
  if (state.size() != 6)
    throw DimensionError("four_tank: state has size " + std::to_string(state.size()) +
                         ", expected 6");
}

std::array<double, 4> outlet_flows(const Vector& state, const FourTankParams& p) {
  std::array<double, 4> q{};
  for (int i = 0; i < 4; ++i) {
    const double level = std::max(state(i) / (p.density * p.tank_area[static_cast<std::size_t>(i)]), 0.0);
    q[static_cast<std::size_t>(i)] =
        p.outlet_area[static_cast<std::size_t>(i)] * std::sqrt(2.0 * p.gravity * level);
  }
  return q;
}

}  // namespace

Vector four_tank_drift(double t, const Vector& state, const Vector& u, const FourTankParams& p) {
  check_state(state);
  if (u.size() != 2)
    throw DimensionError("four_tank_drift: input has size " + std::to_string(u.size()) +
                         ", expected 2");
  const auto q = outlet_flows(state, p);
  const double flow3 = state(4);
  const double flow4 = state(5);
  Vector dx(6);
  dx(0) = p.density * (p.gamma1 * u(0) + q[2] - q[0]);
  dx(1) = p.density * (p.gamma2 * u(1) + q[3] - q[1]);
  dx(2) = p.density * ((1.0 - p.gamma2) * u(1) + flow3 - q[2]);
  dx(3) = p.density * ((1.0 - p.gamma1) * u(0) + flow4 - q[3]);
  dx(4) = p.lambda1 * (p.nominal_flow3.at(t)(0) - flow3);
  dx(5) = p.lambda2 * (p.nominal_flow4.at(t)(0) - flow4);
  return dx;
}

Matrix four_tank_diffusion(const FourTankParams& p) {
  Matrix sig = Matrix::Zero(6, 2);
  sig(4, 0) = p.sigma1;
  sig(5, 1) = p.sigma2;
  return sig;
}

Vector four_tank_measurement(const Vector& state, const FourTankParams& p) {
  check_state(state);
  Vector y(4);
  for (int i = 0; i < 4; ++i)
    y(i) = state(i) / (p.density * p.tank_area[static_cast<std::size_t>(i)]);
  return y;
}

Matrix four_tank_drift_jacobian(double /*t*/, const Vector& state, const FourTankParams& p) {
  check_state(state);
  // dq_i/dm_i = (a_i / 2) sqrt(2 g / (rho A_i m_i)) above the empty clamp,
  // zero at or below it.
  std::array<double, 4> dq{};
  for (int i = 0; i < 4; ++i) {
    const auto s = static_cast<std::size_t>(i);
    if (state(i) > 0.0)
      dq[s] = 0.5 * p.outlet_area[s] *
              std::sqrt(2.0 * p.gravity / (p.density * p.tank_area[s] * state(i)));
  }
  Matrix a = Matrix::Zero(6, 6);
  a(0, 0) = -p.density * dq[0];
  a(0, 2) = p.density * dq[2];
  a(1, 1) = -p.density * dq[1];
  a(1, 3) = p.density * dq[3];
  a(2, 2) = -p.density * dq[2];
  a(2, 4) = p.density;
  a(3, 3) = -p.density * dq[3];
  a(3, 5) = p.density;
  a(4, 4) = -p.lambda1;
  a(5, 5) = -p.lambda2;
  return a;
}

Matrix four_tank_measurement_jacobian(const FourTankParams& p) {
  Matrix c = Matrix::Zero(4, 6);
  for (int i = 0; i < 4; ++i) c(i, i) = 1.0 / (p.density * p.tank_area[static_cast<std::size_t>(i)]);
  return c;
}

Vector four_tank_steady_state(const FourTankParams& p, double pump1, double pump2, double flow3,
                              double flow4) {
  const double q3 = (1.0 - p.gamma2) * pump2 + flow3;
  const double q4 = (1.0 - p.gamma1) * pump1 + flow4;
  const double q1 = p.gamma1 * pump1 + q3;
  const double q2 = p.gamma2 * pump2 + q4;
  const std::array<double, 4> q{q1, q2, q3, q4};
  Vector x(6);
  for (int i = 0; i < 4; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const double level = (q[s] / p.outlet_area[s]) * (q[s] / p.outlet_area[s]) / (2.0 * p.gravity);
    x(i) = p.density * p.tank_area[s] * level;
  }
  x(4) = flow3;
  x(5) = flow4;
  return x;
}

ModelDescriptor make_four_tank_model(const FourTankParams& p, const Matrix& measurement_noise) {
  if (measurement_noise.rows() != 4 || measurement_noise.cols() != 4)
    throw DimensionError("make_four_tank_model: measurement noise must be 4x4");
  ModelDescriptor m;
  m.n_x = 6;
  m.n_u = 2;
  m.n_d = 0;
  m.n_y = 4;
  m.n_w = 2;
  m.measurement_noise = measurement_noise;
  m.drift = [p](double t, const Vector& x, const Vector& u, const Vector&, const Vector&) {
    return four_tank_drift(t, x, u, p);
  };
  m.diffusion = [sig = four_tank_diffusion(p)](double, const Vector&, const Vector&, const Vector&,
                                               const Vector&) { return sig; };
  m.measurement = [p](double, const Vector& x, const Vector&) {
    return four_tank_measurement(x, p);
  };
  m.drift_jacobian = [p](double t, const Vector& x, const Vector&, const Vector&, const Vector&) {
    return four_tank_drift_jacobian(t, x, p);
  };
  m.measurement_jacobian = [c = four_tank_measurement_jacobian(p)](double, const Vector&,
                                                                   const Vector&) { return c; };
  return m;
}

}  // namespace cdse
