#pragma once

#include <cstdint>
#include <functional>

#include "hedgekit/common.hpp"

namespace hedgekit::deltavar {

/// A differentiable vector-valued map with an optional analytic Jacobian.
/// When no analytic Jacobian is supplied, central finite differences are
/// used (step 1e-5·(1+|xᵢ|) per coordinate).
struct SmoothMap {
  std::function<Vector(const Vector&)> evaluate;
  std::function<Matrix(const Vector&)> jacobian;  // optional; null → differences

  /// Jacobian at x: analytic when available, finite differences otherwise.
  Matrix jacobian_at(const Vector& x) const;

  static SmoothMap linear(Matrix weights);
  static SmoothMap from_function(std::function<Vector(const Vector&)> f);
};

/// True when the supplied analytic Jacobian agrees with central finite
/// differences at x to the given relative tolerance (always true for
/// difference-backed maps).
bool jacobian_consistent(const SmoothMap& map, const Vector& x,
                         double relative_tolerance = 1e-5);

/// First-order (delta-method) covariance of f(X) for X ~ (mean, cov):
///   J(mean) · cov · J(mean)ᵀ
Matrix delta_variance(const SmoothMap& map, const Vector& mean, const Matrix& cov);

/// Monte Carlo estimate of cov(f(X)) for X ~ N(mean, cov), using a seeded
/// generator so results are reproducible. The covariance may be rank
/// deficient; it is factorized with a pivoted LDLᵀ.
Matrix mc_variance_oracle(const SmoothMap& map, const Vector& mean, const Matrix& cov,
                          std::size_t samples, std::uint64_t seed);

}  // namespace hedgekit::deltavar
