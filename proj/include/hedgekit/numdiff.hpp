#pragma once

#include <cmath>
#include <functional>

#include "hedgekit/common.hpp"

namespace hedgekit::numdiff {

/// Per-coordinate central-difference step: 1e-5 · (1 + |xᵢ|).
inline double default_step(double coordinate) {
  return 1e-5 * (1.0 + std::abs(coordinate));
}

/// Central-difference gradient of a scalar function. An optional step
/// override replaces the per-coordinate default (useful when a caller wants
/// one step size tied to ‖x‖ for the whole probe).
inline Vector central_gradient(const std::function<double(const Vector&)>& f,
                               const Vector& x,
                               std::function<double(double)> step = default_step) {
  Vector grad(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = step(x[i]);
    probe[i] = x[i] + h;
    const double above = f(probe);
    probe[i] = x[i] - h;
    const double below = f(probe);
    probe[i] = x[i];
    grad[i] = (above - below) / (2.0 * h);
  }
  return grad;
}

/// Central-difference Jacobian of a vector-valued function, one column per
/// input coordinate.
inline Matrix central_jacobian(const std::function<Vector(const Vector&)>& f,
                               const Vector& x,
                               std::function<double(double)> step = default_step) {
  Vector probe = x;
  Matrix jac;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = step(x[i]);
    probe[i] = x[i] + h;
    const Vector above = f(probe);
    probe[i] = x[i] - h;
    const Vector below = f(probe);
    probe[i] = x[i];
    if (i == 0) jac.resize(above.size(), x.size());
    jac.col(i) = (above - below) / (2.0 * h);
  }
  return jac;
}

}  // namespace hedgekit::numdiff
