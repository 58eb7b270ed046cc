#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hedgekit/common.hpp"

namespace hedgekit {

enum class AssetClass { Equity, CdsIndex, Bond };

/// How position size is quoted for an asset class.
enum class NotionalUnit {
  Shares,             // integer-like count of shares
  CurrencyAmount,     // notional quoted directly in currency
  CurrencyFaceValue,  // count of standardized face-value units
};

/// How the per-unit price is quoted.
enum class PriceUnit {
  Currency,          // currency per unit of notional
  PerUnitNotional,   // dimensionless multiplier on the notional
};

/// Symbolic unit dimension: exponents over the base dimensions used by the
/// toolkit. currency^1 is "money"; basis_points^-1 marks a per-bp sensitivity.
struct UnitDim {
  int currency = 0;
  int basis_points = 0;

  friend UnitDim operator*(UnitDim a, UnitDim b) {
    return {a.currency + b.currency, a.basis_points + b.basis_points};
  }
  friend bool operator==(UnitDim a, UnitDim b) = default;
};

/// Per-asset-class quoting convention. The notional unit and price unit must
/// multiply out to a currency amount so that position values across asset
/// classes are commensurable.
struct AssetClassConvention {
  AssetClass asset_class = AssetClass::Equity;
  NotionalUnit notional_unit = NotionalUnit::Shares;
  PriceUnit price_unit = PriceUnit::Currency;
  std::string currency;  // ISO code, e.g. "EUR"

  static AssetClassConvention equity(std::string currency);
  static AssetClassConvention cds_index(std::string currency);
  static AssetClassConvention bond(std::string currency);

  /// Dimension of the notional number itself. Share counts and face-unit
  /// counts are dimensionless; CDS notionals are currency amounts.
  UnitDim notional_dim() const;

  /// Dimension of the quoted price. Dimensionless for per-unit multipliers
  /// (CDS), currency otherwise.
  UnitDim price_dim() const;

  /// notional_dim() * price_dim(); must equal currency^1.
  UnitDim value_dim() const;

  /// Throws Error if the (asset_class, notional_unit, price_unit) combination
  /// is not one of the supported conventions or the value dimension does not
  /// reduce to a currency amount.
  void validate() const;
};

struct Product {
  std::string id;
  AssetClassConvention convention;
  bool hedgeable = true;
};

/// Positions: products with signed notionals and per-unit prices.
class Portfolio {
public:
  Portfolio(std::vector<Product> products, Vector notionals, Vector prices);

  Index size() const { return notionals_.size(); }
  const std::vector<Product>& products() const { return products_; }
  const Vector& notionals() const { return notionals_; }
  const Vector& prices() const { return prices_; }

  /// Total value NᵀP in currency.
  double value() const;

  /// Net notional 1ᵀN (used as the weight denominator).
  double total_net_notional() const;

  /// N / (1ᵀN); throws ZeroNetNotional when the denominator vanishes.
  Vector weights() const;

private:
  std::vector<Product> products_;
  Vector notionals_;
  Vector prices_;
};

double portfolio_value(const Portfolio& p);
Vector portfolio_weights(const Portfolio& p);

/// Factor exposure r = H·N for sensitivity matrix H (factors × products).
Vector compute_exposure(const Matrix& sensitivity, const Vector& notionals);

/// Factor risk view of a book: factor names, current exposure r, product
/// sensitivities H (m×n), and factor covariance C (m×m, PSD, symmetrized on
/// construction).
class RiskModel {
public:
  RiskModel(std::vector<std::string> factor_names, Vector exposure,
            Matrix sensitivity, Matrix covariance);

  /// Builds the model with r derived from positions: r = H·N.
  static RiskModel from_portfolio(std::vector<std::string> factor_names,
                                  Matrix sensitivity, Matrix covariance,
                                  const Portfolio& portfolio);

  Index num_factors() const { return exposure_.size(); }
  Index num_products() const { return sensitivity_.cols(); }
  const std::vector<std::string>& factor_names() const { return factor_names_; }
  const Vector& exposure() const { return exposure_; }
  const Matrix& sensitivity() const { return sensitivity_; }
  const Matrix& covariance() const { return covariance_; }

  /// Portfolio variance rᵀCr.
  double variance() const;

  /// Variance after adding trades x: (r + Hx)ᵀC(r + Hx).
  double variance_after(const Vector& trades) const;

private:
  std::vector<std::string> factor_names_;
  Vector exposure_;
  Matrix sensitivity_;
  Matrix covariance_;
};

/// A risk model restricted to the hedgeable products of a portfolio, plus the
/// bookkeeping needed to map trades back to full-portfolio coordinates.
struct RestrictedRiskModel {
  RiskModel model;
  std::vector<Index> index_map;  // restricted column -> original column
  Index full_size = 0;

  /// Scatters restricted-universe trades into a full-length vector (zeros for
  /// products outside the hedge universe).
  Vector expand(const Vector& trades) const;
};

/// Drops the H columns of non-hedgeable products. Exposure r is preserved:
/// it describes the book, not the hedge instruments. Throws Error when no
/// product is hedgeable or when model and portfolio disagree on size.
RestrictedRiskModel restrict_to_hedge_universe(const RiskModel& model,
                                               const Portfolio& portfolio);

/// Diagnostics attached to every hedge computation.
struct SolverDiagnostics {
  std::string method;  // "closed-form", "interior-point", "diagonal-closed-form"
  std::string status = "optimal";
  int iterations = 0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<std::string> notes;
};

/// Result of a hedge optimization: recommended trades and the variance /
/// cost accounting around them.
struct HedgeResult {
  Vector trades;
  double variance_before = 0.0;
  double variance_after = 0.0;
  double cost_paid = 0.0;
  SolverDiagnostics diagnostics;
};

}  // namespace hedgekit
