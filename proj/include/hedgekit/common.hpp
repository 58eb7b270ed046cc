#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hedgekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class for all library errors. Subtypes distinguish bad inputs
/// (rejected before any computation) from solver-side failures.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs whose shapes do not line up (vector lengths, matrix blocks).
class DimensionMismatch : public Error {
public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// A matrix that must be symmetric is not, beyond tolerance.
class NonSymmetric : public Error {
public:
  explicit NonSymmetric(const std::string& what) : Error(what) {}
};

/// A covariance matrix that must be symmetric is not, beyond tolerance.
class NonSymmetricCov : public NonSymmetric {
public:
  explicit NonSymmetricCov(const std::string& what) : NonSymmetric(what) {}
};

/// A matrix that must be positive (semi)definite has a negative eigenvalue
/// beyond tolerance, or a rank-deficient factor structure was detected.
class NotPositiveDefinite : public Error {
public:
  explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

/// The smoothing weight sits outside the interval on which the augmented
/// quadratic form stays positive definite.
class Lambda0OutOfRange : public Error {
public:
  explicit Lambda0OutOfRange(const std::string& what) : Error(what) {}
};

/// The closed-form diagonal path was invoked on a model with off-diagonal
/// structure (requires exactly zero off-diagonal entries).
class NotDiagonal : public Error {
public:
  explicit NotDiagonal(const std::string& what) : Error(what) {}
};

/// Portfolio weights requested while the net notional is zero.
class ZeroNetNotional : public Error {
public:
  explicit ZeroNetNotional(const std::string& what) : Error(what) {}
};

/// Hedge-universe restriction requested while no product is hedgeable.
class EmptyHedgeUniverse : public Error {
public:
  explicit EmptyHedgeUniverse(const std::string& what) : Error(what) {}
};

/// The diagonal closed form requires strictly positive diagonal entries in
/// both the covariance and the sensitivity matrix.
class NonPositiveDiagonal : public Error {
public:
  explicit NonPositiveDiagonal(const std::string& what) : Error(what) {}
};

/// The sampling oracle could not factor the covariance into A·Aᵀ (a negative
/// eigenvalue beyond the positive-semidefinite tolerance).
class CovFactorizationFailure : public Error {
public:
  explicit CovFactorizationFailure(const std::string& what) : Error(what) {}
};

/// Base class for failures raised while solving, as opposed to input
/// validation; maps to a distinct process exit code in the CLI.
class SolverError : public Error {
public:
  explicit SolverError(const std::string& what) : Error(what) {}
};

/// Primal infeasibility established by a separating (Farkas) certificate.
class InfeasibleError : public SolverError {
public:
  InfeasibleError(const std::string& what, Vector certificate_z, Vector certificate_y)
      : SolverError(what),
        certificate_z(std::move(certificate_z)),
        certificate_y(std::move(certificate_y)) {}

  /// Multipliers (z, y) with Gᵀz + Aᵀy ≈ 0, z ≥ 0, hᵀz + bᵀy < 0.
  Vector certificate_z;
  Vector certificate_y;
};

/// Objective unbounded below along a feasible ray.
class UnboundedError : public SolverError {
public:
  UnboundedError(const std::string& what, Vector direction)
      : SolverError(what), direction(std::move(direction)) {}

  /// Ray d with Pd ≈ 0, qᵀd < 0, Gd ≤ 0, Ad = 0.
  Vector direction;
};

/// Solver stopped without an optimal status (iteration cap or numerical
/// breakdown after regularization escalation).
class SolverFailure : public SolverError {
public:
  explicit SolverFailure(const std::string& what) : SolverError(what) {}
};

}  // namespace hedgekit
