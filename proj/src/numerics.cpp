#include "cdse/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cdse {

Matrix symmetrize(const Matrix& p) { return 0.5 * (p + p.transpose()); }

double min_eigenvalue(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix cholesky_lower(const Matrix& p, double jitter) {
  if (p.rows() != p.cols())
    throw DimensionError("cholesky_lower: matrix is " + std::to_string(p.rows()) + "x" +
                         std::to_string(p.cols()));
  if (jitter < 0.0) throw std::invalid_argument("cholesky_lower: negative jitter");
  const Eigen::Index n = p.rows();
  if (n == 0) return Matrix(0, 0);

  const double scale = p.cwiseAbs().maxCoeff();
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw FactorizationError("cholesky_lower: matrix is not symmetric", -1);

  const double pivot_tol = 1e-12 * scale;
  const double column_tol = 1e-9 * scale;
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = p(j, j) + jitter;
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d > pivot_tol) {
      l(j, j) = std::sqrt(d);
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double s = p(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        l(i, j) = s / l(j, j);
      }
    } else if (d >= -pivot_tol) {
      // Semidefinite pivot: the rest of the column must vanish too, otherwise
      // the matrix is indefinite.
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double s = p(i, j);
        for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        if (std::abs(s) > column_tol)
          throw FactorizationError(
              "cholesky_lower: indefinite matrix (zero pivot with nonzero column) at row " +
                  std::to_string(j),
              static_cast<int>(j));
      }
    } else {
      throw FactorizationError("cholesky_lower: negative pivot at row " + std::to_string(j),
                               static_cast<int>(j));
    }
  }
  return l;
}

Matrix cholesky_lower_auto(const Matrix& p) {
  try {
    return cholesky_lower(p, 0.0);
  } catch (const FactorizationError& e) {
    if (e.pivot < 0) throw;  // asymmetry is not fixable by jitter
  }
  const double base = 1e-12 * p.diagonal().sum() / static_cast<double>(std::max<Eigen::Index>(1, p.rows()));
  if (!(base > 0.0))
    throw FactorizationError("cholesky_lower_auto: factorization failed and trace-based jitter is not positive", -1);
  double jitter = base;
  for (int attempt = 0; attempt < 4; ++attempt, jitter *= 10.0) {
    try {
      return cholesky_lower(p, jitter);
    } catch (const FactorizationError&) {
      if (attempt == 3) throw;
    }
  }
  throw FactorizationError("cholesky_lower_auto: unreachable", -1);
}

Matrix solve_right_spd(const Matrix& chol_lower, const Matrix& b) {
  Matrix xt = chol_lower.triangularView<Eigen::Lower>().solve(b.transpose());
  xt = chol_lower.transpose().triangularView<Eigen::Upper>().solve(xt);
  return xt.transpose();
}

Vector integrate_ode(const OdeRhs& rhs, const Vector& x0, double t0, double t1, int n_steps) {
  if (n_steps < 1) throw std::invalid_argument("integrate_ode: n_steps must be >= 1");
  if (!(t1 > t0)) throw std::invalid_argument("integrate_ode: need t1 > t0");
  const double h = (t1 - t0) / n_steps;
  Vector x = x0;
  for (int j = 0; j < n_steps; ++j) {
    const double t = t0 + j * h;
    const Vector k1 = rhs(t, x);
    const Vector k2 = rhs(t + 0.5 * h, x + (0.5 * h) * k1);
    const Vector k3 = rhs(t + 0.5 * h, x + (0.5 * h) * k2);
    const Vector k4 = rhs(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw IntegrationError("integrate_ode: non-finite state", j);
  }
  return x;
}

Vector integrate_sde_em(const DriftFn& drift, const DiffusionFn& diffusion, const Vector& x0,
                        double t0, double t1, int n_steps, NoiseSource& noise) {
  if (n_steps < 1) throw std::invalid_argument("integrate_sde_em: n_steps must be >= 1");
  if (!(t1 > t0)) throw std::invalid_argument("integrate_sde_em: need t1 > t0");
  const double h = (t1 - t0) / n_steps;
  Vector x = x0;
  for (int j = 0; j < n_steps; ++j) {
    const double t = t0 + j * h;
    const Vector f = drift(t, x);
    const Matrix sig = diffusion(t, x);
    if (sig.rows() != x.size())
      throw DimensionError("integrate_sde_em: diffusion has " + std::to_string(sig.rows()) +
                           " rows for a state of size " + std::to_string(x.size()));
    x += h * f + sig * noise.step_increment(sig.cols(), h, t1 - t0);
    if (!x.allFinite()) throw IntegrationError("integrate_sde_em: non-finite state", j);
  }
  return x;
}

Vector sample_mvn(const Vector& mean, const Matrix& cov, RngStream& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw DimensionError("sample_mvn: covariance does not match mean size " +
                         std::to_string(mean.size()));
  const Matrix l = cholesky_lower_auto(cov);
  return mean + l * rng.normal_vector(mean.size());
}

Moments ensemble_moments(const std::vector<Vector>& particles) {
  if (particles.size() < 2) throw DimensionError("ensemble_moments: need at least two particles");
  const Eigen::Index n = particles.front().size();
  const double np = static_cast<double>(particles.size());
  Vector mean = Vector::Zero(n);
  for (const Vector& x : particles) {
    if (x.size() != n) throw DimensionError("ensemble_moments: mixed particle dimensions");
    mean += x;
  }
  mean /= np;
  Matrix cov = Matrix::Zero(n, n);
  for (const Vector& x : particles) {
    const Vector dev = x - mean;
    cov.noalias() += dev * dev.transpose();
  }
  cov /= np - 1.0;
  return {std::move(mean), std::move(cov)};
}

}  // namespace cdse
