#pragma once

#include <functional>
#include <vector>

#include "cdse/errors.hpp"
#include "cdse/rng.hpp"
#include "cdse/types.hpp"

namespace cdse {

using OdeRhs = std::function<Vector(double t, const Vector& x)>;
using DriftFn = std::function<Vector(double t, const Vector& x)>;
using DiffusionFn = std::function<Matrix(double t, const Vector& x)>;

struct Moments {
  Vector mean;
  Matrix cov;
};

// (P + P^T) / 2.
Matrix symmetrize(const Matrix& p);

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& p);

// Lower-triangular L with L L^T = P + jitter * I.
//
// P must be symmetric within a 1e-9 relative tolerance. Exactly singular PSD
// input is accepted (the corresponding columns of L are zero); an indefinite
// input raises FactorizationError carrying the offending pivot row.
Matrix cholesky_lower(const Matrix& p, double jitter = 0.0);

// cholesky_lower with the retry policy used throughout the filters: attempt
// jitter 0, then 1e-12 * trace(P) / n escalated by factors of 10 up to three
// times before giving up.
Matrix cholesky_lower_auto(const Matrix& p);

// Solves X A = B for X, where A = L L^T and chol_lower is L. Used for Kalman
// gains K = B R_e^{-1}.
Matrix solve_right_spd(const Matrix& chol_lower, const Matrix& b);

// Classical fixed-step fourth-order Runge-Kutta over [t0, t1].
Vector integrate_ode(const OdeRhs& rhs, const Vector& x0, double t0, double t1, int n_steps);

// Fixed-step Euler-Maruyama over [t0, t1]; drift and diffusion are evaluated
// at the left endpoint of each step.
Vector integrate_sde_em(const DriftFn& drift, const DiffusionFn& diffusion, const Vector& x0,
                        double t0, double t1, int n_steps, NoiseSource& noise);

// One draw from N(mean, cov); cov may be singular PSD.
Vector sample_mvn(const Vector& mean, const Matrix& cov, RngStream& rng);

// Sample mean and covariance (denominator N - 1), accumulated in a fixed
// serial order so results do not depend on thread count.
Moments ensemble_moments(const std::vector<Vector>& particles);

}  // namespace cdse
