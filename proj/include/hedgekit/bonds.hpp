#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hedgekit/common.hpp"
#include "hedgekit/core.hpp"

namespace hedgekit::bonds {

struct Cashflow {
  double amount = 0.0;      // currency per unit of face value
  double time_years = 0.0;  // strictly positive
};

/// A fixed-cashflow bond with an idiosyncratic spread over the fitted curve.
struct Bond {
  std::string id;
  std::vector<Cashflow> cashflows;  // strictly increasing payment times
  double idiosyncratic_spread = 0.0;

  void validate() const;
};

/// Parametric zero-coupon yield curve y(τ) = Σₖ βₖ·fₖ(τ) over a fixed basis.
class YieldCurveModel {
public:
  YieldCurveModel(std::vector<std::function<double(double)>> basis, Vector betas);

  /// Three-factor level/slope/curvature basis with decay scale theta:
  ///   f₁(τ) = 1,
  ///   f₂(τ) = (1 − e^(−τ/θ)) / (τ/θ),
  ///   f₃(τ) = f₂(τ) − e^(−τ/θ).
  static YieldCurveModel nelson_siegel(Vector betas, double theta = 2.0);

  Index num_factors() const { return betas_.size(); }
  const Vector& betas() const { return betas_; }
  double basis_value(Index k, double tau) const;
  double yield(double tau) const;

private:
  std::vector<std::function<double(double)>> basis_;
  Vector betas_;
};

/// Discounted value of the bond's cashflows under continuous compounding:
///   P = Σⱼ cⱼ · exp(−(y(τⱼ) + λ)·τⱼ)
double price_bond(const Bond& bond, const YieldCurveModel& curve);

/// Analytic Jacobian of bond prices with respect to the factor vector
/// (β₁..β_d, λ₁..λ_n): a (d + n) × n matrix whose column i holds
///   ∂Pᵢ/∂βₖ = −Σⱼ τⱼ·cⱼ·e^(−(y(τⱼ)+λᵢ)τⱼ)·fₖ(τⱼ)   (curve rows)
///   ∂Pᵢ/∂λᵢ = −Σⱼ τⱼ·cⱼ·e^(−(y(τⱼ)+λᵢ)τⱼ)           (own spread row)
/// with exact zeros on every other spread row.
Matrix bond_jacobian(const std::vector<Bond>& bonds, const YieldCurveModel& curve);

/// Risk model over the curve and spread factors: H = bond_jacobian, exposure
/// r = H·N. Factor names are beta1..beta_d then lambda:<bond id>.
RiskModel build_bond_risk_model(const std::vector<Bond>& bonds,
                                const YieldCurveModel& curve,
                                const Matrix& factor_cov, const Vector& notionals);

/// Finds the idiosyncratic spread that reprices the bond to market_price by
/// bisection on [-1, 1] (price tolerance 1e-10). Throws Error when the
/// market price is outside the bracket's price range.
double calibrate_idiosyncratic_spread(const Bond& bond, const YieldCurveModel& curve,
                                      double market_price);

}  // namespace hedgekit::bonds
