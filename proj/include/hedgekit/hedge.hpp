#pragma once

#include <optional>

#include "hedgekit/common.hpp"
#include "hedgekit/core.hpp"
#include "hedgekit/qp.hpp"
#include "hedgekit/spectral.hpp"

namespace hedgekit::hedge {

/// Transaction-cost inputs for the cost-aware hedges. Costs are per unit of
/// notional traded and must be nonnegative; lambda_c scales the whole cost
/// term against variance; lambda_0 is the smoothing weight of the augmented
/// formulation (defaults to the midpoint of the formulation's admissible
/// interval when unset).
struct CostSpec {
  Vector symmetric_costs;  // c, one entry per product (absolute-value split)
  Vector buy_costs;        // c⁺ (buy/sell split)
  Vector sell_costs;       // c⁻ (buy/sell split)
  double lambda_c = 0.0;
  std::optional<double> lambda_0;

  static CostSpec symmetric(Vector costs, double lambda_c,
                            std::optional<double> lambda_0 = std::nullopt);
  static CostSpec asymmetric(Vector buy, Vector sell, double lambda_c,
                             std::optional<double> lambda_0 = std::nullopt);
};

/// Assembly variants. The defaults expand the augmented objective
///   (r + Hx)ᵀC(r + Hx) + λ₀(vᵀv − xᵀx) + λ_c·(cost term)
/// exactly. The literal flags reproduce the layout printed in the original
/// derivation instead: literal_quadratic keeps the x-block ridge at −λ₀I
/// (instead of −2λ₀I) and literal_linear places the cost coefficients on the
/// x block scaled by λ₀ (instead of on the v block scaled by λ_c).
struct AssemblyOptions {
  bool literal_quadratic = false;  // CLI: --literal-p
  bool literal_linear = false;     // CLI: --literal-q
};

enum class AugmentedSplit { AbsValue, BuySell };

/// Augmented QP blocks for one of the cost-aware formulations, in the
/// canonical form min ½uᵀPu + qᵀu s.t. Gu ⪯ h over u = (x, v) or (x⁺, x⁻).
struct AugmentedAssembly {
  Matrix P;
  Vector q;
  Matrix G;
  Vector h;
  AugmentedSplit split = AugmentedSplit::AbsValue;
  double lambda_0 = 0.0;
};

/// Admissible smoothing-weight interval for the split actually solved:
/// (0, λ'_min) for the objective-derived absolute-value assembly
/// ((0, 2λ'_min) under literal_quadratic), (0, 2λ'_min) for the buy/sell
/// assembly. λ'_min is the smallest eigenvalue of HᵀCH.
spectral::Interval admissible_lambda0_symmetric(const RiskModel& model,
                                                const AssemblyOptions& options = {});
spectral::Interval admissible_lambda0_asymmetric(const RiskModel& model);

/// Minimum-variance hedge with no cost term, by the closed form
///   x = −(HᵀCH)⁻¹HᵀCr.
HedgeResult solve_unconstrained(const RiskModel& model);

/// Builds the absolute-value split QP over (x, v):
///   P = [[2HᵀCH − 2λ₀I, 0], [0, 2λ₀I]],  q = (2HᵀCr; λ_c·c),
///   G = [[I, −I], [−I, −I]],  h = 0      (v ⪰ |x| encoded as ±x − v ⪯ 0)
/// Throws Lambda0OutOfRange when λ₀ is not strictly inside the admissible
/// interval (relative margin 1e-9).
AugmentedAssembly assemble_symmetric(const RiskModel& model, const CostSpec& costs,
                                     const AssemblyOptions& options = {});

/// Solves the absolute-value split and reports trades x (the v block is
/// validated against |x| and then dropped).
HedgeResult solve_symmetric(const RiskModel& model, const CostSpec& costs,
                            const AssemblyOptions& options = {});

/// Builds the buy/sell split QP over (x⁺, x⁻) with M = HᵀCH:
///   P = [[2M, −2M + 2λ₀I], [−2M + 2λ₀I, 2M]],
///   q = (2HᵀCr + λ_c·c⁺; −2HᵀCr + λ_c·c⁻),  G = −I,  h = 0.
AugmentedAssembly assemble_asymmetric(const RiskModel& model, const CostSpec& costs,
                                      const AssemblyOptions& options = {});

/// Solves the buy/sell split and reports net trades x = x⁺ − x⁻.
HedgeResult solve_asymmetric(const RiskModel& model, const CostSpec& costs,
                             const AssemblyOptions& options = {});

/// Closed-form per-product hedge for models whose C and H are both diagonal
/// (every product loads exactly one factor):
///   xᵢ = −(2Cᵢrᵢhᵢ + λ_c·cᵢ) / (2Cᵢhᵢ²)
/// where cᵢ is the buy cost when rᵢ and hᵢ have opposite signs and the sell
/// cost otherwise. Requires exactly zero off-diagonal entries, positive
/// diagonals, and a square model.
HedgeResult solve_diagonal(const RiskModel& model, const Vector& buy_costs,
                           const Vector& sell_costs, double lambda_c);

}  // namespace hedgekit::hedge
