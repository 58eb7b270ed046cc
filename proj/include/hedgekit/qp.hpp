#pragma once

#include <optional>

#include "hedgekit/common.hpp"

namespace hedgekit::qp {

/// Convex quadratic program in the canonical form
///
///   minimize   (1/2)xᵀPx + qᵀx
///   subject to Gx ⪯ h,  Ax = b
///
/// P must be positive semidefinite; it is symmetrized on construction.
/// Constraint blocks are optional: pass only (P, q) for an unconstrained
/// problem, add (G, h) for inequalities and (A, b) for equalities. A block
/// with zero rows (and matching column count) is treated as absent, so an
/// equality-only problem can be built as (P, q, 0×n, empty, A, b).
struct QpProblem {
  Matrix P;
  Vector q;
  std::optional<Matrix> G;
  std::optional<Vector> h;
  std::optional<Matrix> A;
  std::optional<Vector> b;

  QpProblem(Matrix P, Vector q);
  QpProblem(Matrix P, Vector q, Matrix G, Vector h);
  QpProblem(Matrix P, Vector q, Matrix G, Vector h, Matrix A, Vector b);

  Index num_vars() const { return q.size(); }
  Index num_ineq() const { return G ? G->rows() : 0; }
  Index num_eq() const { return A ? A->rows() : 0; }

  double objective(const Vector& x) const;
};

enum class SolveStatus { Optimal, MaxIterations, NumericalFailure };

/// Primal/dual solution. z are the inequality multipliers (z ⪰ 0), y the
/// equality multipliers; both are empty when the corresponding block is
/// absent. Residuals are infinity norms, gap is the duality gap sᵀz.
struct QpSolution {
  Vector x;
  Vector z;
  Vector y;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
};

struct SolverOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
};

/// Primal-dual interior-point solve (Mehrotra predictor-corrector). The
/// Newton systems are condensed onto the (x, y) block and factorized with a
/// symmetric-indefinite decomposition; singular systems are retried with a
/// diagonal regularization that escalates from 1e-10 to 1e-6.
///
/// Throws InfeasibleError with a Farkas certificate when the constraints are
/// inconsistent, UnboundedError with a descent ray when the objective is
/// unbounded below. Returns status MaxIterations / NumericalFailure (with the
/// best iterate found) instead of throwing when the solve merely stalls.
QpSolution solve_qp(const QpProblem& problem, const SolverOptions& options = {});

/// Karush-Kuhn-Tucker residuals of a candidate solution, for independent
/// verification of solver output.
struct KktResiduals {
  double stationarity = 0.0;     // ‖Px + q + Gᵀz + Aᵀy‖∞
  double primal = 0.0;           // max(violation of Gx ⪯ h, ‖Ax − b‖∞)
  double complementarity = 0.0;  // maxᵢ |zᵢ · (h − Gx)ᵢ|
  bool dual_feasible = true;     // z ⪰ 0
};

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution);

}  // namespace hedgekit::qp
