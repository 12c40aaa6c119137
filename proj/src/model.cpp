#include "cdse/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "cdse/errors.hpp"

namespace cdse {

Matrix jacobian_fd(const std::function<Vector(const Vector&)>& func, const Vector& x,
                   double rel_step) {
  if (!(rel_step > 0.0)) throw std::invalid_argument("jacobian_fd: rel_step must be positive");
  const Vector f0 = func(x);
  if (!f0.allFinite()) throw EvaluationError("jacobian_fd: non-finite function value at x");
  Matrix jac(f0.size(), x.size());
  Vector xp = x;
  Vector xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double delta = rel_step * std::max(std::abs(x(j)), 1.0);
    xp(j) = x(j) + delta;
    xm(j) = x(j) - delta;
    const Vector fp = func(xp);
    const Vector fm = func(xm);
    if (!fp.allFinite() || !fm.allFinite())
      throw EvaluationError("jacobian_fd: non-finite function value near component " +
                            std::to_string(j));
    jac.col(j) = (fp - fm) / (2.0 * delta);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

ExogenousSignal ExogenousSignal::constant(Vector value) {
  ExogenousSignal s;
  s.times_ = {0.0};
  s.values_.push_back(std::move(value));
  return s;
}

ExogenousSignal ExogenousSignal::piecewise(std::vector<double> times, std::vector<Vector> values) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("ExogenousSignal: need matching, non-empty times and values");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("ExogenousSignal: switch times must be strictly increasing");
  const Eigen::Index dim = values.front().size();
  for (const Vector& v : values)
    if (v.size() != dim) throw std::invalid_argument("ExogenousSignal: mixed value dimensions");
  ExogenousSignal s;
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

Vector ExogenousSignal::at(double t) const {
  if (values_.empty()) return Vector(0);
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

Matrix ModelDescriptor::drift_jacobian_at(double t, const Vector& x, const Vector& u,
                                          const Vector& d) const {
  if (drift_jacobian) return drift_jacobian(t, x, u, d, theta);
  return jacobian_fd([&](const Vector& xi) { return drift(t, xi, u, d, theta); }, x);
}

Matrix ModelDescriptor::measurement_jacobian_at(double t, const Vector& x) const {
  if (measurement_jacobian) return measurement_jacobian(t, x, theta);
  return jacobian_fd([&](const Vector& xi) { return measurement(t, xi, theta); }, x);
}

}  // namespace cdse
