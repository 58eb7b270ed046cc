#pragma once

#include <string>
#include <vector>

#include "hedgekit/common.hpp"
#include "hedgekit/core.hpp"

namespace hedgekit::cds {

enum class ProtectionSide { Buy, Sell };

/// A credit-index position quoted by its spread sensitivity: cdv01 is the
/// currency value change per one basis point of spread widening per unit of
/// notional, stored positive; the protection side signs the effective
/// notional when the risk model is built (bought protection gains as
/// spreads widen, sold protection loses).
struct CdsIndexProduct {
  std::string id;
  std::string currency;  // "EUR" or "USD"
  double cdv01 = 0.0;
  ProtectionSide side = ProtectionSide::Buy;

  /// Validates cdv01 (> 0, finite), the currency, and that the index family
  /// implied by the id prefix matches the currency: "itraxx..." quotes in
  /// EUR, "cdx..." in USD (case-insensitive).
  void validate() const;

  /// Unit dimension of the spread sensitivity: currency⁰ · bp⁻¹ per unit of
  /// (currency-denominated) notional.
  UnitDim exposure_unit() const { return {0, -1}; }
};

/// True when every off-diagonal entry is exactly zero (the closed-form hedge
/// path requires exact diagonal structure, not just small correlations).
bool is_diagonal(const Matrix& m);

/// One spread factor per index: H is diagonal with +cdv01 on the diagonal,
/// and the protection side signs the effective notional (sold protection
/// enters as a negative bought-protection position), so exposure is
/// r = H·N_signed. Factor names are spread:<id>. The covariance is the
/// spread covariance in bp².
RiskModel build_cds_risk_model(const std::vector<CdsIndexProduct>& indices,
                               const Matrix& spread_cov, const Vector& notionals);

}  // namespace hedgekit::cds
