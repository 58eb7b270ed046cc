#include "hedgekit/hedge.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>
#include <utility>

namespace hedgekit::hedge {

namespace {

/// Margin (relative to λ'_min) used for the strict-interior test on λ₀.
constexpr double kInteriorMargin = 1e-9;

Matrix gram(const RiskModel& model) {
  Matrix m = model.sensitivity().transpose() * model.covariance() * model.sensitivity();
  return ((m + m.transpose()) / 2.0).eval();
}

Vector cross_term(const RiskModel& model) {
  // HᵀCr: gradient (halved) of the hedged variance at x = 0.
  return model.sensitivity().transpose() * (model.covariance() * model.exposure());
}

Vector checked_costs(Vector costs, Index n, const char* name) {
  if (costs.size() == 0) return Vector::Zero(n);
  if (costs.size() != n) {
    std::ostringstream msg;
    msg << name << " has length " << costs.size() << " but the model covers "
        << n << " products";
    throw DimensionMismatch(msg.str());
  }
  if (!costs.allFinite() || costs.minCoeff() < 0.0) {
    throw Error(std::string(name) + " must be nonnegative and finite");
  }
  return costs;
}

void check_lambda_c(double lambda_c) {
  if (!std::isfinite(lambda_c) || lambda_c < 0.0) {
    throw Error("cost weight lambda_c must be nonnegative and finite");
  }
}

double resolve_lambda0(const CostSpec& costs, const spectral::Interval& admissible,
                       double lambda_prime_min) {
  const double lambda0 = costs.lambda_0.value_or(admissible.midpoint());
  if (!std::isfinite(lambda0) ||
      !admissible.contains(lambda0, kInteriorMargin * lambda_prime_min)) {
    std::ostringstream msg;
    msg << "lambda_0 = " << lambda0 << " is outside the admissible interval ("
        << admissible.lo << ", " << admissible.hi << ")";
    throw Lambda0OutOfRange(msg.str());
  }
  return lambda0;
}

void fill_solver_diagnostics(SolverDiagnostics& diag, const qp::QpSolution& sol) {
  diag.method = "interior-point";
  diag.status = "optimal";
  diag.iterations = sol.iterations;
  diag.gap = sol.gap;
  diag.primal_residual = sol.primal_residual;
  diag.dual_residual = sol.dual_residual;
}

void require_optimal(const qp::QpSolution& sol) {
  if (sol.status == qp::SolveStatus::Optimal) return;
  const char* reason = sol.status == qp::SolveStatus::MaxIterations
                           ? "iteration cap reached before convergence"
                           : "numerical failure in the KKT factorization";
  throw SolverFailure(std::string("hedge optimization did not converge: ") + reason);
}

bool cost_free(const CostSpec& costs) {
  const auto zero = [](const Vector& v) {
    return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0;
  };
  return costs.lambda_c == 0.0 ||
         (zero(costs.symmetric_costs) && zero(costs.buy_costs) && zero(costs.sell_costs));
}

HedgeResult zero_trade_result(const RiskModel& model, const char* method) {
  HedgeResult result;
  result.trades = Vector::Zero(model.num_products());
  result.variance_before = model.variance();
  result.variance_after = result.variance_before;
  result.cost_paid = 0.0;
  result.diagnostics.method = method;
  result.diagnostics.status = "optimal";
  result.diagnostics.notes.push_back("zero exposure and zero costs: no trade needed");
  return result;
}

}  // namespace

CostSpec CostSpec::symmetric(Vector costs, double lambda_c,
                             std::optional<double> lambda_0) {
  CostSpec spec;
  spec.symmetric_costs = std::move(costs);
  spec.lambda_c = lambda_c;
  spec.lambda_0 = lambda_0;
  return spec;
}

CostSpec CostSpec::asymmetric(Vector buy, Vector sell, double lambda_c,
                              std::optional<double> lambda_0) {
  CostSpec spec;
  spec.buy_costs = std::move(buy);
  spec.sell_costs = std::move(sell);
  spec.lambda_c = lambda_c;
  spec.lambda_0 = lambda_0;
  return spec;
}

spectral::Interval admissible_lambda0_symmetric(const RiskModel& model,
                                                const AssemblyOptions& options) {
  const double lambda_prime_min =
      spectral::min_eigenvalue_hch(model.sensitivity(), model.covariance());
  // The objective-derived quadratic block 2M − 2λ₀I stays positive definite
  // only up to λ'_min; the literal layout's 2M − λ₀I reaches 2λ'_min.
  return {0.0, options.literal_quadratic ? 2.0 * lambda_prime_min : lambda_prime_min};
}

spectral::Interval admissible_lambda0_asymmetric(const RiskModel& model) {
  return spectral::lambda0_range_asymmetric(model.sensitivity(), model.covariance());
}

HedgeResult solve_unconstrained(const RiskModel& model) {
  const Matrix m = gram(model);
  // Reject rank-deficient HᵀCH before attempting the closed form.
  spectral::min_eigenvalue_hch(model.sensitivity(), model.covariance());

  HedgeResult result;
  result.variance_before = model.variance();
  result.trades = Vector(Eigen::LLT<Matrix>(m).solve(-cross_term(model)));
  result.variance_after = model.variance_after(result.trades);
  result.cost_paid = 0.0;
  result.diagnostics.method = "closed-form";
  result.diagnostics.status = "optimal";
  result.diagnostics.dual_residual =
      (m * result.trades + cross_term(model)).cwiseAbs().maxCoeff();
  return result;
}

AugmentedAssembly assemble_symmetric(const RiskModel& model, const CostSpec& costs,
                                     const AssemblyOptions& options) {
  const Index n = model.num_products();
  const Vector c = checked_costs(costs.symmetric_costs, n, "symmetric costs");
  check_lambda_c(costs.lambda_c);

  const double lambda_prime_min =
      spectral::min_eigenvalue_hch(model.sensitivity(), model.covariance());
  const spectral::Interval admissible = admissible_lambda0_symmetric(model, options);
  const double lambda0 = resolve_lambda0(costs, admissible, lambda_prime_min);

  const Matrix m = gram(model);
  const Matrix identity = Matrix::Identity(n, n);

  AugmentedAssembly assembly;
  assembly.split = AugmentedSplit::AbsValue;
  assembly.lambda_0 = lambda0;

  assembly.P = Matrix::Zero(2 * n, 2 * n);
  const double ridge = options.literal_quadratic ? lambda0 : 2.0 * lambda0;
  assembly.P.topLeftCorner(n, n) = 2.0 * m - ridge * identity;
  assembly.P.bottomRightCorner(n, n) = 2.0 * lambda0 * identity;

  assembly.q = Vector::Zero(2 * n);
  assembly.q.head(n) = 2.0 * cross_term(model);
  if (options.literal_linear) {
    assembly.q.head(n) += lambda0 * c;
  } else {
    assembly.q.tail(n) = costs.lambda_c * c;
  }

  assembly.G = Matrix::Zero(2 * n, 2 * n);
  assembly.G.topLeftCorner(n, n) = identity;
  assembly.G.topRightCorner(n, n) = -identity;
  assembly.G.bottomLeftCorner(n, n) = -identity;
  assembly.G.bottomRightCorner(n, n) = -identity;
  assembly.h = Vector::Zero(2 * n);
  return assembly;
}

HedgeResult solve_symmetric(const RiskModel& model, const CostSpec& costs,
                            const AssemblyOptions& options) {
  if (model.exposure().isZero(0.0) && cost_free(costs)) {
    // Validate lambda_0 anyway so out-of-range inputs never silently pass.
    assemble_symmetric(model, costs, options);
    return zero_trade_result(model, "closed-form");
  }

  const AugmentedAssembly assembly = assemble_symmetric(model, costs, options);
  const qp::QpProblem problem(assembly.P, assembly.q, assembly.G, assembly.h);
  const qp::QpSolution solution = qp::solve_qp(problem);
  require_optimal(solution);

  const Index n = model.num_products();
  const Vector trades = solution.x.head(n);
  const Vector magnitude = solution.x.tail(n);

  HedgeResult result;
  result.trades = trades;
  result.variance_before = model.variance();
  result.variance_after = model.variance_after(trades);
  const Vector c = checked_costs(costs.symmetric_costs, n, "symmetric costs");
  result.cost_paid = costs.lambda_c * c.dot(magnitude);
  fill_solver_diagnostics(result.diagnostics, solution);

  const double slack =
      (magnitude - trades.cwiseAbs()).minCoeff() /
      (1.0 + trades.cwiseAbs().maxCoeff());
  if (slack < -1e-8) {
    result.diagnostics.notes.push_back(
        "auxiliary magnitudes fell below |x| beyond tolerance; solution may be inaccurate");
  }
  return result;
}

AugmentedAssembly assemble_asymmetric(const RiskModel& model, const CostSpec& costs,
                                      const AssemblyOptions& /*options*/) {
  const Index n = model.num_products();
  const Vector buy = checked_costs(costs.buy_costs, n, "buy costs");
  const Vector sell = checked_costs(costs.sell_costs, n, "sell costs");
  check_lambda_c(costs.lambda_c);

  const double lambda_prime_min =
      spectral::min_eigenvalue_hch(model.sensitivity(), model.covariance());
  const spectral::Interval admissible = admissible_lambda0_asymmetric(model);
  const double lambda0 = resolve_lambda0(costs, admissible, lambda_prime_min);

  const Matrix m = gram(model);
  const Matrix identity = Matrix::Identity(n, n);
  const Matrix coupling = -2.0 * m + 2.0 * lambda0 * identity;
  const Vector cross = cross_term(model);

  AugmentedAssembly assembly;
  assembly.split = AugmentedSplit::BuySell;
  assembly.lambda_0 = lambda0;

  assembly.P = Matrix::Zero(2 * n, 2 * n);
  assembly.P.topLeftCorner(n, n) = 2.0 * m;
  assembly.P.bottomRightCorner(n, n) = 2.0 * m;
  assembly.P.topRightCorner(n, n) = coupling;
  assembly.P.bottomLeftCorner(n, n) = coupling;

  assembly.q = Vector::Zero(2 * n);
  assembly.q.head(n) = 2.0 * cross + costs.lambda_c * buy;
  assembly.q.tail(n) = -2.0 * cross + costs.lambda_c * sell;

  assembly.G = -Matrix::Identity(2 * n, 2 * n);
  assembly.h = Vector::Zero(2 * n);
  return assembly;
}

HedgeResult solve_asymmetric(const RiskModel& model, const CostSpec& costs,
                             const AssemblyOptions& options) {
  if (model.exposure().isZero(0.0) && cost_free(costs)) {
    assemble_asymmetric(model, costs, options);
    return zero_trade_result(model, "closed-form");
  }

  const AugmentedAssembly assembly = assemble_asymmetric(model, costs, options);
  const qp::QpProblem problem(assembly.P, assembly.q, assembly.G, assembly.h);
  const qp::QpSolution solution = qp::solve_qp(problem);
  require_optimal(solution);

  const Index n = model.num_products();
  const Vector buys = solution.x.head(n);
  const Vector sells = solution.x.tail(n);
  const Vector trades = buys - sells;

  HedgeResult result;
  result.trades = trades;
  result.variance_before = model.variance();
  result.variance_after = model.variance_after(trades);

  // Charge costs on the net trade per side; simultaneous buy/sell overlap is
  // an artifact the smoothing term suppresses.
  const Vector buy = checked_costs(costs.buy_costs, n, "buy costs");
  const Vector sell = checked_costs(costs.sell_costs, n, "sell costs");
  double cost = 0.0;
  for (Index i = 0; i < n; ++i) {
    cost += trades[i] > 0.0 ? buy[i] * trades[i] : sell[i] * (-trades[i]);
  }
  result.cost_paid = costs.lambda_c * cost;
  fill_solver_diagnostics(result.diagnostics, solution);

  const double churn = buys.cwiseProduct(sells).maxCoeff();
  const double churn_scale = 1.0 + trades.cwiseAbs().maxCoeff() * trades.cwiseAbs().maxCoeff();
  if (churn > 1e-6 * churn_scale) {
    result.diagnostics.notes.push_back(
        "buy and sell legs overlap beyond tolerance; consider a larger lambda_0");
  }
  return result;
}

HedgeResult solve_diagonal(const RiskModel& model, const Vector& buy_costs,
                           const Vector& sell_costs, double lambda_c) {
  const Index n = model.num_products();
  if (model.num_factors() != n) {
    throw DimensionMismatch(
        "diagonal closed form needs one factor per product (square model)");
  }
  const Matrix& h = model.sensitivity();
  const Matrix& c_mat = model.covariance();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      // The fast path exists only for exactly diagonal structure.
      if (h(i, j) != 0.0 || c_mat(i, j) != 0.0) {
        throw NotDiagonal("sensitivity and covariance must be exactly diagonal");
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (h(i, i) <= 0.0) {
      throw NonPositiveDiagonal("diagonal sensitivities must be positive");
    }
    if (c_mat(i, i) <= 0.0) {
      throw NonPositiveDiagonal("diagonal variances must be positive");
    }
  }
  const Vector buy = checked_costs(buy_costs, n, "buy costs");
  const Vector sell = checked_costs(sell_costs, n, "sell costs");
  check_lambda_c(lambda_c);

  HedgeResult result;
  result.trades = Vector::Zero(n);
  result.diagnostics.method = "diagonal-closed-form";
  result.diagnostics.status = "optimal";

  double cost = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double r_i = model.exposure()[i];
    const double h_i = h(i, i);
    const double c_i = c_mat(i, i);
    // Buy cost applies when the hedge will buy: exposure and sensitivity of
    // opposite sign. Zero exposure takes the sell branch.
    const bool opposite_signs = r_i * h_i < 0.0;
    const double unit_cost = opposite_signs ? buy[i] : sell[i];
    result.trades[i] = -(2.0 * c_i * r_i * h_i + lambda_c * unit_cost) /
                       (2.0 * c_i * h_i * h_i);
    cost += unit_cost * std::abs(result.trades[i]);
    if (r_i == 0.0 && lambda_c * unit_cost > 0.0) {
      std::ostringstream note;
      note << "product " << i << " has zero exposure but a nonzero cost term; "
           << "the closed form trades on costs alone";
      result.diagnostics.notes.push_back(note.str());
    }
  }
  result.cost_paid = lambda_c * cost;
  result.variance_before = model.variance();
  result.variance_after = model.variance_after(result.trades);
  return result;
}

}  // namespace hedgekit::hedge
