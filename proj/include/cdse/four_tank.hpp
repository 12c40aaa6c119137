#pragma once

#include <array>

#include "cdse/model.hpp"

namespace cdse {

// Modified four-tank system. State x = (m1, m2, m3, m4, F3, F4): the four
// liquid masses [g] plus two stochastic inflows [cm^3/s] that follow
// mean-reverting dynamics
//   dF_j = lambda_j (Fbar_j(t) - F_j) dt + sigma_j dw_j.
// Pump flows u = (F1, F2) split between the tanks via the valve fractions
// gamma1, gamma2; each tank drains through an outlet hole at
// q_i = a_i sqrt(2 g h_i) with level h_i = m_i / (rho A_i), clamped at empty.
// Measurements are the four levels.
struct FourTankParams {
  std::array<double, 4> tank_area{380.1327, 380.1327, 380.1327, 380.1327};    // A_i [cm^2]
  std::array<double, 4> outlet_area{1.2272, 1.2272, 1.6, 1.6};                // a_i [cm^2]
  double gamma1 = 0.6;
  double gamma2 = 0.7;
  double gravity = 981.0;  // [cm/s^2]
  double density = 1.0;    // [g/cm^3]
  double lambda1 = 0.1;    // [1/s]
  double lambda2 = 0.1;
  double sigma1 = 5.0;     // [cm^3/s/sqrt(s)]
  double sigma2 = 5.0;
  ExogenousSignal nominal_flow3 = ExogenousSignal::constant(Vector::Constant(1, 150.0));
  ExogenousSignal nominal_flow4 = ExogenousSignal::constant(Vector::Constant(1, 150.0));
};

Vector four_tank_drift(double t, const Vector& state, const Vector& u, const FourTankParams& p);

// Constant 6x2: zeros except diag(sigma1, sigma2) in the disturbance rows.
Matrix four_tank_diffusion(const FourTankParams& p);

// The four levels h_i = m_i / (rho A_i).
Vector four_tank_measurement(const Vector& state, const FourTankParams& p);

Matrix four_tank_drift_jacobian(double t, const Vector& state, const FourTankParams& p);
Matrix four_tank_measurement_jacobian(const FourTankParams& p);

// Steady state (masses and disturbance flows) for constant pump and
// disturbance flows.
Vector four_tank_steady_state(const FourTankParams& p, double pump1, double pump2, double flow3,
                              double flow4);

ModelDescriptor make_four_tank_model(const FourTankParams& p, const Matrix& measurement_noise);

}  // namespace cdse
