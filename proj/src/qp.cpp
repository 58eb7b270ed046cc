#include "hedgekit/qp.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace hedgekit::qp {

namespace {

constexpr double kRegularizationStart = 1e-10;
constexpr double kRegularizationMax = 1e-6;

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) throw Error(std::string(name) + " contains a non-finite entry");
}

void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite()) throw Error(std::string(name) + " contains a non-finite entry");
}

double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// Bunch-Kaufman factorization of a symmetric indefinite matrix, with one
/// round of iterative refinement on solve. Keeps the unfactored matrix so
/// refinement can measure true residuals.
class SymmetricIndefiniteSolver {
public:
  bool factorize(const Matrix& matrix) {
    original_ = matrix;
    factors_ = matrix;
    const auto n = static_cast<lapack_int>(matrix.rows());
    ipiv_.resize(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n,
                                           factors_.data(), n, ipiv_.data());
    factorized_ = (info == 0);
    return factorized_;
  }

  /// Solves original * x = rhs. Returns the relative residual after
  /// refinement so callers can decide whether to escalate regularization.
  double solve(const Vector& rhs, Vector& x) const {
    x = rhs;
    const auto n = static_cast<lapack_int>(original_.rows());
    LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, factors_.data(), n,
                   ipiv_.data(), x.data(), n);
    double rel = residual(rhs, x);
    for (int round = 0; round < 2 && rel > 1e-14; ++round) {
      Vector correction = rhs - original_ * x;
      LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, factors_.data(), n,
                     ipiv_.data(), correction.data(), n);
      const Vector candidate = x + correction;
      const double candidate_rel = residual(rhs, candidate);
      if (candidate_rel >= rel) break;
      x = candidate;
      rel = candidate_rel;
    }
    return rel;
  }

  bool factorized() const { return factorized_; }

private:
  double residual(const Vector& rhs, const Vector& x) const {
    return inf_norm(rhs - original_ * x) / (1.0 + inf_norm(rhs));
  }

  Matrix original_;
  Matrix factors_;
  std::vector<lapack_int> ipiv_;
  bool factorized_ = false;
};

/// Factorizes the condensed KKT matrix
///   [ P + GᵀDG + εI   Aᵀ ]
///   [ A              −εI ]
/// escalating ε when the factorization fails or solves come back inaccurate.
class KktSystem {
public:
  KktSystem(const QpProblem& problem, const Vector& d)
      : k_(problem.num_vars()), e_(problem.num_eq()) {
    base_ = Matrix::Zero(k_ + e_, k_ + e_);
    base_.topLeftCorner(k_, k_) = problem.P;
    if (problem.G) {
      base_.topLeftCorner(k_, k_) +=
          problem.G->transpose() * d.asDiagonal() * (*problem.G);
    }
    if (problem.A) {
      base_.bottomLeftCorner(e_, k_) = *problem.A;
      base_.topRightCorner(k_, e_) = problem.A->transpose();
    }
  }

  /// Attempts ε = 0 first, then the escalation ladder. Returns false when no
  /// regularization level produces a usable factorization.
  bool factorize() {
    if (try_factorize(0.0)) return true;
    for (double eps = kRegularizationStart; eps <= kRegularizationMax; eps *= 2.0) {
      if (try_factorize(eps)) return true;
    }
    return false;
  }

  /// Solves against the most recent successful factorization; escalates ε
  /// further if the refined residual is still poor.
  bool solve(const Vector& rhs, Vector& out) {
    double rel = solver_.solve(rhs, out);
    double eps = std::max(eps_, kRegularizationStart);
    while (rel > 1e-8 && eps <= kRegularizationMax) {
      if (!try_factorize(eps)) return false;
      rel = solver_.solve(rhs, out);
      eps *= 2.0;
    }
    return rel <= 1e-6;
  }

private:
  bool try_factorize(double eps) {
    Matrix regularized = base_;
    regularized.topLeftCorner(k_, k_).diagonal().array() += eps;
    regularized.bottomRightCorner(e_, e_).diagonal().array() -= eps;
    eps_ = eps;
    return solver_.factorize(regularized);
  }

  Index k_;
  Index e_;
  Matrix base_;
  SymmetricIndefiniteSolver solver_;
  double eps_ = 0.0;
};

double step_to_boundary(const Vector& v, const Vector& dv) {
  double step = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

struct Directions {
  Vector dx, ds, dz, dy;
};

/// One Newton solve of the predictor-corrector system for a given
/// complementarity target r_c (the equation Z·ds + S·dz = −r_c).
bool newton_direction(KktSystem& kkt, const QpProblem& problem,
                      const Vector& r_d, const Vector& r_p, const Vector& r_g,
                      const Vector& r_c, const Vector& s, const Vector& z,
                      Directions& dir) {
  const Index k = problem.num_vars();
  const Index e = problem.num_eq();
  const Matrix& g = *problem.G;

  const Vector d = z.cwiseQuotient(s);
  const Vector sinv_rc = r_c.cwiseQuotient(s);

  Vector rhs(k + e);
  rhs.head(k) = -r_d - g.transpose() * (d.cwiseProduct(r_g) - sinv_rc);
  if (e > 0) rhs.tail(e) = -r_p;

  Vector sol;
  if (!kkt.solve(rhs, sol)) return false;

  dir.dx = sol.head(k);
  dir.dy = e > 0 ? Vector(sol.tail(e)) : Vector();
  const Vector g_dx = g * dir.dx;
  dir.dz = d.cwiseProduct(g_dx + r_g) - sinv_rc;
  dir.ds = -r_g - g_dx;
  return true;
}

/// Farkas-style certificate check. Normalizes the current duals and tests
///   ‖Gᵀz + Aᵀy‖ ≈ 0,  hᵀz + bᵀy < 0,  z ⪰ 0
/// which proves no x satisfies Gx ⪯ h, Ax = b.
void maybe_throw_infeasible(const QpProblem& problem, const Vector& z,
                            const Vector& y, double tolerance) {
  const double scale = z.lpNorm<1>() + (y.size() ? y.lpNorm<1>() : 0.0);
  if (scale <= 0.0) return;
  const Vector zeta = z / scale;
  const Vector eta = y.size() ? Vector(y / scale) : Vector();

  Vector combo = problem.G->transpose() * zeta;
  if (problem.A) combo += problem.A->transpose() * eta;

  double operator_scale = problem.G->cwiseAbs().maxCoeff();
  if (problem.A) operator_scale = std::max(operator_scale, problem.A->cwiseAbs().maxCoeff());
  operator_scale = std::max(operator_scale, 1.0);

  double offset = problem.h->dot(zeta);
  if (problem.b) offset += problem.b->dot(eta);
  double offset_scale = std::max(1.0, inf_norm(*problem.h));
  if (problem.b) offset_scale = std::max(offset_scale, inf_norm(*problem.b));

  if (inf_norm(combo) <= tolerance * operator_scale &&
      offset < -tolerance * offset_scale && zeta.minCoeff() >= -tolerance) {
    throw InfeasibleError("constraints are infeasible (separating certificate found)",
                          zeta, eta);
  }
}

/// Certificate that the objective is unbounded below: a ray d with
/// Pd ≈ 0, qᵀd < 0, Gd ⪯ 0, Ad = 0.
void maybe_throw_unbounded(const QpProblem& problem, const Vector& x,
                           double tolerance) {
  const double scale = inf_norm(x);
  if (scale <= 0.0) return;
  const Vector d = x / scale;

  const double p_scale = std::max(1.0, problem.P.cwiseAbs().maxCoeff());
  if (inf_norm(problem.P * d) > tolerance * p_scale) return;
  if (problem.q.dot(d) >= -tolerance * std::max(1.0, inf_norm(problem.q))) return;
  if (problem.G && ((*problem.G) * d).maxCoeff() >
                       tolerance * std::max(1.0, problem.G->cwiseAbs().maxCoeff())) {
    return;
  }
  if (problem.A && inf_norm((*problem.A) * d) >
                       tolerance * std::max(1.0, problem.A->cwiseAbs().maxCoeff())) {
    return;
  }
  throw UnboundedError("objective is unbounded below along a feasible ray", d);
}

/// Unconstrained minimum via eigendecomposition: pseudo-inverse solve with an
/// explicit unboundedness test on the null space of P.
QpSolution solve_unconstrained(const QpProblem& problem) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(problem.P);
  const Vector& values = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();
  const double max_abs = values.cwiseAbs().maxCoeff();
  const double null_threshold = 1e-12 * std::max(max_abs, 1e-300);
  const double q_scale = 1.0 + inf_norm(problem.q);

  Vector x = Vector::Zero(problem.num_vars());
  for (Index i = 0; i < values.size(); ++i) {
    const double projection = vectors.col(i).dot(problem.q);
    if (values[i] <= null_threshold) {
      if (std::abs(projection) > 1e-10 * q_scale) {
        Vector ray = -vectors.col(i) * (projection > 0 ? 1.0 : -1.0);
        throw UnboundedError("objective is unbounded below along a feasible ray", ray);
      }
    } else {
      x -= (projection / values[i]) * vectors.col(i);
    }
  }

  QpSolution solution;
  solution.x = std::move(x);
  solution.status = SolveStatus::Optimal;
  solution.dual_residual = inf_norm(problem.P * solution.x + problem.q);
  solution.objective = problem.objective(solution.x);
  return solution;
}

/// Equality-constrained minimum via one KKT solve, with certificate-based
/// classification when the stationarity or feasibility residual will not
/// close.
QpSolution solve_equality_constrained(const QpProblem& problem) {
  const Index k = problem.num_vars();
  const Index e = problem.num_eq();
  const Matrix& a = *problem.A;
  const Vector& b = *problem.b;

  KktSystem kkt(problem, Vector());
  QpSolution solution;
  Vector sol;
  bool solved = kkt.factorize();
  if (solved) {
    Vector rhs(k + e);
    rhs.head(k) = -problem.q;
    rhs.tail(e) = b;
    solved = kkt.solve(rhs, sol);
  }
  if (!solved) {
    solution.status = SolveStatus::NumericalFailure;
    solution.x = Vector::Zero(k);
    solution.y = Vector::Zero(e);
    return solution;
  }

  solution.x = sol.head(k);
  solution.y = sol.tail(e);
  solution.primal_residual = inf_norm(a * solution.x - b);
  solution.dual_residual =
      inf_norm(problem.P * solution.x + problem.q + a.transpose() * solution.y);
  solution.objective = problem.objective(solution.x);

  const double b_scale = 1.0 + inf_norm(b);
  if (solution.primal_residual > 1e-8 * b_scale) {
    // Ax = b has no solution; build the certificate from null(Aᵀ).
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU);
    const Index rank_limit = std::min(e, k);
    Vector certificate = Vector::Zero(e);
    for (Index i = 0; i < e; ++i) {
      const double sigma = i < rank_limit ? svd.singularValues()[i] : 0.0;
      if (sigma <= 1e-10 * std::max(svd.singularValues()[0], 1e-300)) {
        certificate += svd.matrixU().col(i).dot(b) * svd.matrixU().col(i);
      }
    }
    if (certificate.norm() > 1e-10 * (1.0 + b.norm())) {
      // Flip so the certificate offset bᵀy is negative.
      certificate = -certificate / certificate.norm();
      throw InfeasibleError("equality constraints are inconsistent", Vector(), certificate);
    }
    solution.status = SolveStatus::NumericalFailure;
    return solution;
  }

  const double q_scale = 1.0 + inf_norm(problem.q);
  if (solution.dual_residual > 1e-8 * q_scale) {
    // Stationarity cannot close: look for a descent ray inside null(A).
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullV);
    std::vector<Index> null_cols;
    for (Index i = 0; i < k; ++i) {
      const double sigma = i < svd.singularValues().size() ? svd.singularValues()[i] : 0.0;
      if (sigma <= 1e-10 * std::max(svd.singularValues()[0], 1e-300)) {
        null_cols.push_back(i);
      }
    }
    if (!null_cols.empty()) {
      Matrix basis(k, static_cast<Index>(null_cols.size()));
      for (Index j = 0; j < basis.cols(); ++j) {
        basis.col(j) = svd.matrixV().col(null_cols[static_cast<std::size_t>(j)]);
      }
      const Matrix reduced = basis.transpose() * problem.P * basis;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
      const double max_abs = eig.eigenvalues().cwiseAbs().maxCoeff();
      for (Index i = 0; i < eig.eigenvalues().size(); ++i) {
        if (eig.eigenvalues()[i] <= 1e-10 * std::max(max_abs, 1e-300)) {
          Vector ray = basis * eig.eigenvectors().col(i);
          const double slope = problem.q.dot(ray);
          if (std::abs(slope) > 1e-10 * q_scale) {
            if (slope > 0) ray = -ray;
            throw UnboundedError("objective is unbounded below along a feasible ray", ray);
          }
        }
      }
    }
    solution.status = SolveStatus::NumericalFailure;
    return solution;
  }

  solution.status = SolveStatus::Optimal;
  return solution;
}

/// Mehrotra predictor-corrector interior-point iteration for problems with
/// inequality (and optionally equality) constraints.
QpSolution solve_interior_point(const QpProblem& problem, const SolverOptions& options) {
  const Index k = problem.num_vars();
  const Index p = problem.num_ineq();
  const Index e = problem.num_eq();
  const Matrix& g = *problem.G;
  const Vector& h = *problem.h;

  const double q_scale = 1.0 + inf_norm(problem.q);
  const double h_scale = 1.0 + inf_norm(h);
  const double b_scale = 1.0 + (problem.b ? inf_norm(*problem.b) : 0.0);
  // Per-component complementarity is certified against the size of the
  // problem data, not the (possibly much larger) objective value.
  const double input_scale =
      1.0 + std::max({problem.P.cwiseAbs().maxCoeff(), inf_norm(problem.q),
                      g.cwiseAbs().maxCoeff(), inf_norm(h),
                      problem.A ? problem.A->cwiseAbs().maxCoeff() : 0.0,
                      problem.b ? inf_norm(*problem.b) : 0.0});

  // Starting point: damped least-squares solve that treats the inequalities
  // as targets, then shift slacks to be comfortably positive.
  Vector x = Vector::Zero(k);
  Vector y = Vector::Zero(e);
  {
    KktSystem init(problem, Vector::Ones(p));
    Vector rhs(k + e);
    rhs.head(k) = -problem.q + g.transpose() * h;
    if (e > 0) rhs.tail(e) = *problem.b;
    Vector sol;
    if (init.factorize() && init.solve(rhs, sol)) {
      x = sol.head(k);
      if (e > 0) y = sol.tail(e);
    }
  }
  Vector s = h - g * x;
  const double shift = std::max(0.0, 1.0 - s.minCoeff());
  s.array() += shift;
  Vector z = Vector::Ones(p);

  QpSolution best;
  best.x = x;
  best.z = z;
  best.y = y;
  best.status = SolveStatus::MaxIterations;
  double best_merit = std::numeric_limits<double>::infinity();

  int iter = 0;
  for (; iter <= options.max_iterations; ++iter) {
    const Vector r_d = problem.P * x + problem.q + g.transpose() * z +
                       (e > 0 ? Vector(problem.A->transpose() * y) : Vector::Zero(k));
    const Vector r_g = g * x + s - h;
    const Vector r_p = e > 0 ? Vector((*problem.A) * x - *problem.b) : Vector();
    const double gap = s.dot(z);
    const double objective = problem.objective(x);

    const double dual_residual = inf_norm(r_d);
    const double ineq_residual = inf_norm(r_g);
    const double eq_residual = inf_norm(r_p);
    const double primal_residual = std::max(ineq_residual, eq_residual);

    const double merit = gap / (1.0 + std::abs(objective)) +
                         dual_residual / q_scale + ineq_residual / h_scale +
                         eq_residual / b_scale;
    if (merit < best_merit) {
      best_merit = merit;
      best.x = x;
      best.z = z;
      best.y = y;
      best.iterations = iter;
      best.gap = gap;
      best.primal_residual = primal_residual;
      best.dual_residual = dual_residual;
      best.objective = objective;
    }

    const double comp_residual = s.cwiseProduct(z).maxCoeff();
    if (gap <= options.tolerance * (1.0 + std::abs(objective)) &&
        comp_residual <= options.tolerance * input_scale &&
        dual_residual <= options.tolerance * q_scale &&
        ineq_residual <= options.tolerance * h_scale &&
        eq_residual <= options.tolerance * b_scale) {
      best.status = SolveStatus::Optimal;
      best.x = x;
      best.z = z;
      best.y = y;
      best.iterations = iter;
      best.gap = gap;
      best.primal_residual = primal_residual;
      best.dual_residual = dual_residual;
      best.objective = objective;
      return best;
    }

    // Divergence-triggered certificate checks.
    if (z.lpNorm<1>() + (e > 0 ? y.lpNorm<1>() : 0.0) > 1e5) {
      maybe_throw_infeasible(problem, z, y, 1e-8);
    }
    if (inf_norm(x) > 1e6 * (1.0 + h_scale)) {
      maybe_throw_unbounded(problem, x, 1e-8);
    }

    if (iter == options.max_iterations) break;

    const Vector d = z.cwiseQuotient(s);
    KktSystem kkt(problem, d);
    if (!kkt.factorize()) {
      best.status = SolveStatus::NumericalFailure;
      return best;
    }

    // Predictor: pure Newton step on the KKT conditions (r_c = s∘z).
    Directions affine;
    if (!newton_direction(kkt, problem, r_d, r_p, r_g, s.cwiseProduct(z), s, z, affine)) {
      best.status = SolveStatus::NumericalFailure;
      return best;
    }

    const double alpha_affine =
        std::min({1.0, step_to_boundary(s, affine.ds), step_to_boundary(z, affine.dz)});
    const double mu = gap / static_cast<double>(p);
    const double mu_affine = (s + alpha_affine * affine.ds)
                                 .dot(z + alpha_affine * affine.dz) /
                             static_cast<double>(p);
    double sigma = std::pow(mu_affine / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector: recenter toward σμ and cancel the second-order term.
    const Vector r_c = s.cwiseProduct(z) + affine.ds.cwiseProduct(affine.dz) -
                       Vector::Constant(p, sigma * mu);
    Directions step;
    if (!newton_direction(kkt, problem, r_d, r_p, r_g, r_c, s, z, step)) {
      best.status = SolveStatus::NumericalFailure;
      return best;
    }

    const double alpha =
        std::min({1.0, 0.99 * step_to_boundary(s, step.ds),
                  0.99 * step_to_boundary(z, step.dz)});
    x += alpha * step.dx;
    s += alpha * step.ds;
    z += alpha * step.dz;
    if (e > 0) y += alpha * step.dy;
  }

  // Iteration cap reached: one last chance to classify the problem before
  // reporting the best iterate.
  maybe_throw_infeasible(problem, z, y, 1e-6);
  maybe_throw_unbounded(problem, x, 1e-6);
  best.status = SolveStatus::MaxIterations;
  best.iterations = iter;
  return best;
}

}  // namespace

QpProblem::QpProblem(Matrix p_in, Vector q_in)
    : P(std::move(p_in)), q(std::move(q_in)) {
  const Index k = q.size();
  if (k == 0) throw Error("problem must have at least one variable");
  if (P.rows() != k || P.cols() != k) {
    std::ostringstream msg;
    msg << "P is " << P.rows() << "x" << P.cols() << " but q has length " << k;
    throw DimensionMismatch(msg.str());
  }
  require_finite(P, "P");
  require_finite(q, "q");

  P = ((P + P.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(P, Eigen::EigenvaluesOnly);
  const double max_abs = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-10 * max_abs) {
    throw NotPositiveDefinite("P has a negative eigenvalue; the problem is not convex");
  }
}

QpProblem::QpProblem(Matrix p_in, Vector q_in, Matrix g_in, Vector h_in)
    : QpProblem(std::move(p_in), std::move(q_in)) {
  if (g_in.cols() != num_vars()) {
    throw DimensionMismatch("G column count does not match the variable count");
  }
  if (h_in.size() != g_in.rows()) {
    throw DimensionMismatch("h length does not match the G row count");
  }
  if (g_in.rows() > 0) {
    require_finite(g_in, "G");
    require_finite(h_in, "h");
    G = std::move(g_in);
    h = std::move(h_in);
  }
}

QpProblem::QpProblem(Matrix p_in, Vector q_in, Matrix g_in, Vector h_in,
                     Matrix a_in, Vector b_in)
    : QpProblem(std::move(p_in), std::move(q_in), std::move(g_in), std::move(h_in)) {
  if (a_in.cols() != num_vars()) {
    throw DimensionMismatch("A column count does not match the variable count");
  }
  if (b_in.size() != a_in.rows()) {
    throw DimensionMismatch("b length does not match the A row count");
  }
  if (a_in.rows() > 0) {
    require_finite(a_in, "A");
    require_finite(b_in, "b");
    A = std::move(a_in);
    b = std::move(b_in);
  }
}

double QpProblem::objective(const Vector& x) const {
  return 0.5 * x.dot(P * x) + q.dot(x);
}

QpSolution solve_qp(const QpProblem& problem, const SolverOptions& options) {
  if (options.tolerance <= 0.0) throw Error("solver tolerance must be positive");
  if (options.max_iterations < 1) throw Error("iteration cap must be at least 1");

  if (problem.num_ineq() == 0 && problem.num_eq() == 0) {
    return solve_unconstrained(problem);
  }
  if (problem.num_ineq() == 0) {
    return solve_equality_constrained(problem);
  }
  return solve_interior_point(problem, options);
}

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& solution) {
  if (solution.x.size() != problem.num_vars()) {
    throw DimensionMismatch("solution x length does not match the problem");
  }
  if (solution.z.size() != problem.num_ineq()) {
    throw DimensionMismatch("solution z length does not match the inequality count");
  }
  if (solution.y.size() != problem.num_eq()) {
    throw DimensionMismatch("solution y length does not match the equality count");
  }

  KktResiduals residuals;
  Vector stationarity = problem.P * solution.x + problem.q;
  if (problem.G) stationarity += problem.G->transpose() * solution.z;
  if (problem.A) stationarity += problem.A->transpose() * solution.y;
  residuals.stationarity = inf_norm(stationarity);

  double primal = 0.0;
  if (problem.G) {
    const Vector slack = *problem.h - (*problem.G) * solution.x;
    primal = std::max(primal, std::max(0.0, -slack.minCoeff()));
    residuals.complementarity = slack.cwiseProduct(solution.z).cwiseAbs().maxCoeff();
    residuals.dual_feasible = solution.z.minCoeff() >= 0.0;
  }
  if (problem.A) {
    primal = std::max(primal, inf_norm((*problem.A) * solution.x - *problem.b));
  }
  residuals.primal = primal;
  return residuals;
}

}  // namespace hedgekit::qp
