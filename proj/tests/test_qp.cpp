#include "hedgekit/qp.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace hedgekit::qp {
namespace {

Matrix scalar_matrix(double v) {
  Matrix m(1, 1);
  m << v;
  return m;
}

Vector scalar_vector(double v) {
  Vector x(1);
  x << v;
  return x;
}

TEST(QpProblem, SymmetrizesP) {
  Matrix p(2, 2);
  p << 2.0, 1.0 + 1e-14, 1.0, 2.0;
  const QpProblem problem(p, Vector::Zero(2));
  EXPECT_DOUBLE_EQ(problem.P(0, 1), problem.P(1, 0));
}

TEST(QpProblem, RejectsIndefiniteP) {
  EXPECT_THROW(QpProblem(scalar_matrix(-1.0), scalar_vector(0.0)),
               NotPositiveDefinite);
  Matrix saddle(2, 2);
  saddle << 0.0, 1.0, 1.0, 0.0;  // eigenvalues ±1
  EXPECT_THROW(QpProblem(saddle, Vector::Zero(2)), NotPositiveDefinite);
}

TEST(QpProblem, RejectsMismatchedBlocks) {
  EXPECT_THROW(QpProblem(Matrix::Identity(2, 2), Vector::Zero(3)),
               DimensionMismatch);
  EXPECT_THROW(QpProblem(Matrix::Identity(2, 2), Vector::Zero(2),
                         Matrix::Identity(2, 2), Vector::Zero(3)),
               DimensionMismatch);
  EXPECT_THROW(QpProblem(Matrix::Identity(2, 2), Vector::Zero(2),
                         Matrix::Identity(2, 2), Vector::Zero(2),
                         Matrix::Ones(1, 3), Vector::Zero(1)),
               DimensionMismatch);
}

TEST(SolveUnconstrained, IdentityCase) {
  const QpProblem problem(Matrix::Identity(2, 2), Vector::Zero(2));
  const QpSolution solution = solve_qp(problem);
  EXPECT_EQ(solution.status, SolveStatus::Optimal);
  EXPECT_NEAR(solution.x.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(SolveUnconstrained, MatchesLinearSolve) {
  testing::Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const Index k = 1 + static_cast<Index>(rng() % 12);
    const Matrix p = testing::random_spd(rng, k);
    const Vector q = testing::random_vector(rng, k, 3.0);
    const QpSolution solution = solve_qp(QpProblem(p, q));
    ASSERT_EQ(solution.status, SolveStatus::Optimal);
    const Vector direct = p.llt().solve(-q);
    const double scale = 1.0 + direct.cwiseAbs().maxCoeff();
    EXPECT_LE((solution.x - direct).cwiseAbs().maxCoeff(), 1e-8 * scale);
  }
}

TEST(SolveUnconstrained, UnboundedDirectionReported) {
  // P = 0 with a nonzero linear term: objective q·x is unbounded below.
  try {
    solve_qp(QpProblem(scalar_matrix(0.0), scalar_vector(1.0)));
    FAIL() << "expected UnboundedError";
  } catch (const UnboundedError& e) {
    ASSERT_EQ(e.direction.size(), 1);
    EXPECT_LT(e.direction[0], 0.0);  // qᵀd < 0
  }
}

TEST(SolveInequality, ActiveBoundByHand) {
  // min x² − 2x s.t. x ≤ 0: unconstrained optimum at 1, constraint active.
  const QpProblem problem(scalar_matrix(2.0), scalar_vector(-2.0),
                          scalar_matrix(1.0), scalar_vector(0.0));
  const QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  EXPECT_NEAR(solution.x[0], 0.0, 1e-7);
  EXPECT_NEAR(solution.z[0], 2.0, 1e-6);  // stationarity: 2x − 2 + z = 0
}

TEST(SolveInequality, LowerBoundByHand) {
  // min x² s.t. x ≥ 1 (written −x ≤ −1).
  const QpProblem problem(scalar_matrix(2.0), scalar_vector(0.0),
                          scalar_matrix(-1.0), scalar_vector(-1.0));
  const QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  EXPECT_NEAR(solution.x[0], 1.0, 1e-7);
}

TEST(SolveInequality, InactiveConstraintIgnored) {
  // min (x−2)² s.t. x ≤ 3: optimum interior at 2 with zero multiplier.
  const QpProblem problem(scalar_matrix(2.0), scalar_vector(-4.0),
                          scalar_matrix(1.0), scalar_vector(3.0));
  const QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  EXPECT_NEAR(solution.x[0], 2.0, 1e-7);
  EXPECT_NEAR(solution.z[0], 0.0, 1e-7);
}

TEST(SolveEquality, ProjectsOntoConstraint) {
  // min ½‖x‖² s.t. 1ᵀx = 2 → x = (2/3, 2/3, 2/3), y = −2/3.
  const QpProblem problem(Matrix::Identity(3, 3), Vector::Zero(3),
                          Matrix::Zero(0, 3), Vector::Zero(0),
                          Matrix::Ones(1, 3), scalar_vector(2.0));
  const QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(solution.x[i], 2.0 / 3.0, 1e-9);
  ASSERT_EQ(solution.y.size(), 1);
  EXPECT_NEAR(solution.y[0], -2.0 / 3.0, 1e-9);
}

TEST(SolveEquality, MixedWithInequalities) {
  // min ½‖x‖² s.t. x₁ + x₂ = 2, −x₁ ≤ 0. Optimum (1, 1) stays interior.
  Matrix g(1, 2);
  g << -1.0, 0.0;
  const QpProblem problem(Matrix::Identity(2, 2), Vector::Zero(2), g,
                          scalar_vector(0.0), Matrix::Ones(1, 2), scalar_vector(2.0));
  const QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  EXPECT_NEAR(solution.x[0], 1.0, 1e-7);
  EXPECT_NEAR(solution.x[1], 1.0, 1e-7);
}

TEST(Infeasibility, ContradictoryBoundsCertified) {
  // x ≤ −1 and x ≥ 1 cannot hold together.
  Matrix g(2, 1);
  g << 1.0, -1.0;
  Vector h(2);
  h << -1.0, -1.0;
  try {
    solve_qp(QpProblem(scalar_matrix(2.0), scalar_vector(0.0), g, h));
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    // Farkas certificate: z ⪰ 0, Gᵀz ≈ 0, hᵀz < 0.
    ASSERT_EQ(e.certificate_z.size(), 2);
    EXPECT_GE(e.certificate_z.minCoeff(), 0.0);
    const double combo = std::abs(g.transpose().row(0).dot(e.certificate_z));
    EXPECT_LE(combo, 1e-6 * e.certificate_z.lpNorm<1>());
    EXPECT_LT(h.dot(e.certificate_z), 0.0);
  }
}

TEST(Infeasibility, ContradictoryEqualitiesCertified) {
  // x = 0 and x = 1 cannot hold together.
  Matrix a(2, 1);
  a << 1.0, 1.0;
  Vector b(2);
  b << 0.0, 1.0;
  EXPECT_THROW(solve_qp(QpProblem(scalar_matrix(2.0), scalar_vector(0.0),
                                  Matrix::Zero(0, 1), Vector::Zero(0), a, b)),
               InfeasibleError);
}

TEST(Unboundedness, DescentRayCertified) {
  // min −x s.t. x ≥ 0: descent direction d = +1 stays feasible forever.
  try {
    solve_qp(QpProblem(scalar_matrix(0.0), scalar_vector(-1.0),
                       scalar_matrix(-1.0), scalar_vector(0.0)));
    FAIL() << "expected UnboundedError";
  } catch (const UnboundedError& e) {
    ASSERT_EQ(e.direction.size(), 1);
    EXPECT_GT(e.direction[0], 0.0);   // qᵀd < 0 with q = −1
  }
}

TEST(Termination, IterationCapReturnsBestIterate) {
  testing::Rng rng(321);
  const testing::RandomQp rq = testing::make_random_qp(rng, 8, 16, false);
  SolverOptions options;
  options.max_iterations = 1;
  const QpSolution solution = solve_qp(rq.problem, options);
  EXPECT_EQ(solution.status, SolveStatus::MaxIterations);
  EXPECT_EQ(solution.x.size(), 8);
}

TEST(Termination, InvalidToleranceRejected) {
  EXPECT_THROW(
      solve_qp(QpProblem(scalar_matrix(1.0), scalar_vector(0.0)), {-1.0, 10}),
      Error);
}

TEST(RandomSuite, OptimalAndBeatsFeasiblePoints) {
  testing::Rng rng(2024);
  int with_eq = 0;
  for (int instance = 0; instance < 200; ++instance) {
    const Index k = 1 + static_cast<Index>(rng() % 30);
    const Index p = 1 + static_cast<Index>(rng() % 60);
    const bool equalities = instance % 4 == 0 && k >= 2;
    const testing::RandomQp rq = testing::make_random_qp(rng, k, p, equalities);
    with_eq += rq.problem.num_eq() > 0 ? 1 : 0;

    const QpSolution solution = solve_qp(rq.problem);
    ASSERT_EQ(solution.status, SolveStatus::Optimal)
        << "instance " << instance << " (k=" << k << ", p=" << p << ")";

    // Independent oracle: the reported optimum must not lose to any sampled
    // feasible point.
    const double objective = rq.problem.objective(solution.x);
    for (int sample = 0; sample < 1000; ++sample) {
      const Vector candidate = testing::random_feasible_point(rng, rq);
      ASSERT_GE(rq.problem.objective(candidate), objective - 1e-6)
          << "instance " << instance << " sample " << sample;
    }

    // Feasibility of the reported optimum itself.
    const Vector slack = *rq.problem.h - (*rq.problem.G) * solution.x;
    EXPECT_GE(slack.minCoeff(), -1e-9 * (1.0 + rq.problem.h->cwiseAbs().maxCoeff()));
  }
  EXPECT_GT(with_eq, 0);
}

TEST(RandomSuite, KktResidualsWithinContract) {
  testing::Rng rng(7);
  for (int instance = 0; instance < 60; ++instance) {
    const Index k = 1 + static_cast<Index>(rng() % 20);
    const Index p = 1 + static_cast<Index>(rng() % 40);
    const testing::RandomQp rq = testing::make_random_qp(rng, k, p, instance % 5 == 0);
    const QpSolution solution = solve_qp(rq.problem);
    ASSERT_EQ(solution.status, SolveStatus::Optimal);
    const KktResiduals res = kkt_residuals(rq.problem, solution);
    const double budget = 1e-8 * (1.0 + testing::input_scale(rq.problem));
    EXPECT_LE(res.stationarity, budget) << "instance " << instance;
    EXPECT_LE(res.primal, budget) << "instance " << instance;
    EXPECT_LE(res.complementarity, budget) << "instance " << instance;
    EXPECT_TRUE(res.dual_feasible);
  }
}

TEST(RandomSuite, ScalingInvarianceOfArgmin) {
  // Multiplying all problem data by alpha leaves the feasible set and the
  // argmin unchanged, and the relative termination rule keeps the computed
  // solution stable. Only at-or-above unit scale: the residual budget
  // 1e-8*(1 + input norms) has an absolute floor, so data scaled far below
  // unit size is solved to a proportionally looser absolute accuracy. Each
  // solve stops once its residuals are inside the budget, which maps through
  // the KKT system to an argmin uncertainty of order budget / curvature —
  // about 1e-6 here — so the agreement bound is 1e-5, not solver epsilon.
  for (double alpha : {1.0, 10.0, 1e3}) {
    testing::Rng fresh(99);  // same instance for every alpha
    const testing::RandomQp rq = testing::make_random_qp(fresh, 10, 20, false);
    const QpProblem scaled(alpha * rq.problem.P, alpha * rq.problem.q,
                           alpha * *rq.problem.G, alpha * *rq.problem.h);
    const QpSolution base = solve_qp(rq.problem);
    const QpSolution scaled_solution = solve_qp(scaled);
    ASSERT_EQ(base.status, SolveStatus::Optimal);
    ASSERT_EQ(scaled_solution.status, SolveStatus::Optimal);
    const double scale = 1.0 + base.x.cwiseAbs().maxCoeff();
    EXPECT_LE((base.x - scaled_solution.x).cwiseAbs().maxCoeff(), 1e-5 * scale)
        << "alpha=" << alpha;
  }
}

TEST(KktResiduals, CleanAtOptimum) {
  const QpProblem problem(Matrix::Identity(2, 2), Vector::Zero(2));
  const QpSolution solution = solve_qp(problem);
  const KktResiduals res = kkt_residuals(problem, solution);
  EXPECT_LE(res.stationarity, 1e-10);
  EXPECT_LE(res.primal, 1e-10);
  EXPECT_LE(res.complementarity, 1e-10);
  EXPECT_TRUE(res.dual_feasible);
}

TEST(KktResiduals, PerturbationShowsUpInStationarity) {
  // With P = I the stationarity residual is exactly the displacement.
  const QpProblem problem(Matrix::Identity(2, 2), -Vector::Ones(2));
  QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  solution.x[0] += 0.1;
  const KktResiduals res = kkt_residuals(problem, solution);
  EXPECT_NEAR(res.stationarity, 0.1, 1e-7);
}

TEST(KktResiduals, NegativeMultiplierFlagged) {
  const QpProblem problem(scalar_matrix(2.0), scalar_vector(-2.0),
                          scalar_matrix(1.0), scalar_vector(0.0));
  QpSolution solution = solve_qp(problem);
  ASSERT_EQ(solution.status, SolveStatus::Optimal);
  solution.z[0] = -1.0;
  const KktResiduals res = kkt_residuals(problem, solution);
  EXPECT_FALSE(res.dual_feasible);  // still evaluates, but flags z < 0
}

TEST(KktResiduals, DimensionMismatchRejected) {
  const QpProblem problem(scalar_matrix(2.0), scalar_vector(0.0));
  QpSolution solution;
  solution.x = Vector::Zero(2);
  EXPECT_THROW(kkt_residuals(problem, solution), DimensionMismatch);
}

TEST(Objective, EvaluatesQuadraticForm) {
  Matrix p(2, 2);
  p << 2.0, 0.0, 0.0, 4.0;
  Vector q(2);
  q << 1.0, -1.0;
  const QpProblem problem(p, q);
  Vector x(2);
  x << 1.0, 2.0;
  // ½(2 + 16) + (1 − 2) = 9 − 1
  EXPECT_DOUBLE_EQ(problem.objective(x), 8.0);
}

}  // namespace
}  // namespace hedgekit::qp
