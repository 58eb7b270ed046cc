#include "hedgekit/core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <set>
#include <sstream>

namespace hedgekit {

namespace {

void require_finite(const Vector& v, const std::string& name) {
  if (!v.allFinite()) {
    throw Error(name + " contains a non-finite entry");
  }
}

void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) {
    throw Error(name + " contains a non-finite entry");
  }
}

}  // namespace

AssetClassConvention AssetClassConvention::equity(std::string currency) {
  return {AssetClass::Equity, NotionalUnit::Shares, PriceUnit::Currency,
          std::move(currency)};
}

AssetClassConvention AssetClassConvention::cds_index(std::string currency) {
  return {AssetClass::CdsIndex, NotionalUnit::CurrencyAmount,
          PriceUnit::PerUnitNotional, std::move(currency)};
}

AssetClassConvention AssetClassConvention::bond(std::string currency) {
  return {AssetClass::Bond, NotionalUnit::CurrencyFaceValue,
          PriceUnit::Currency, std::move(currency)};
}

UnitDim AssetClassConvention::notional_dim() const {
  switch (notional_unit) {
    case NotionalUnit::Shares: return {0, 0};
    case NotionalUnit::CurrencyAmount: return {1, 0};
    case NotionalUnit::CurrencyFaceValue: return {0, 0};
  }
  throw Error("unknown notional unit");
}

UnitDim AssetClassConvention::price_dim() const {
  switch (price_unit) {
    case PriceUnit::Currency: return {1, 0};
    case PriceUnit::PerUnitNotional: return {0, 0};
  }
  throw Error("unknown price unit");
}

UnitDim AssetClassConvention::value_dim() const {
  return notional_dim() * price_dim();
}

void AssetClassConvention::validate() const {
  const bool combination_ok =
      (asset_class == AssetClass::Equity &&
       notional_unit == NotionalUnit::Shares &&
       price_unit == PriceUnit::Currency) ||
      (asset_class == AssetClass::CdsIndex &&
       notional_unit == NotionalUnit::CurrencyAmount &&
       price_unit == PriceUnit::PerUnitNotional) ||
      (asset_class == AssetClass::Bond &&
       notional_unit == NotionalUnit::CurrencyFaceValue &&
       price_unit == PriceUnit::Currency);
  if (!combination_ok) {
    throw Error("unsupported (asset class, notional unit, price unit) combination");
  }
  if (currency.empty()) {
    throw Error("convention is missing a currency code");
  }
  if (!(value_dim() == UnitDim{1, 0})) {
    throw Error("notional and price units do not reduce to a currency value");
  }
}

Portfolio::Portfolio(std::vector<Product> products, Vector notionals, Vector prices)
    : products_(std::move(products)),
      notionals_(std::move(notionals)),
      prices_(std::move(prices)) {
  const auto n = static_cast<Index>(products_.size());
  if (n == 0) {
    throw Error("portfolio must contain at least one product");
  }
  if (notionals_.size() != n || prices_.size() != n) {
    std::ostringstream msg;
    msg << "portfolio arrays disagree: " << n << " products, "
        << notionals_.size() << " notionals, " << prices_.size() << " prices";
    throw DimensionMismatch(msg.str());
  }
  require_finite(notionals_, "notionals");
  require_finite(prices_, "prices");

  std::set<std::string> seen;
  for (const auto& product : products_) {
    if (product.id.empty()) {
      throw Error("product id must be non-empty");
    }
    if (!seen.insert(product.id).second) {
      throw Error("duplicate product id: " + product.id);
    }
    product.convention.validate();
  }
}

double Portfolio::value() const { return notionals_.dot(prices_); }

double Portfolio::total_net_notional() const { return notionals_.sum(); }

Vector Portfolio::weights() const {
  const double denom = total_net_notional();
  // Relative test: a net notional that is zero at the scale of the gross
  // book makes weights meaningless.
  const double gross = notionals_.cwiseAbs().sum();
  if (gross == 0.0 || std::abs(denom) < 1e-12 * gross) {
    throw ZeroNetNotional("net notional is zero; weights are undefined");
  }
  return notionals_ / denom;
}

double portfolio_value(const Portfolio& p) { return p.value(); }

Vector portfolio_weights(const Portfolio& p) { return p.weights(); }

Vector compute_exposure(const Matrix& sensitivity, const Vector& notionals) {
  if (sensitivity.cols() != notionals.size()) {
    std::ostringstream msg;
    msg << "sensitivity has " << sensitivity.cols() << " columns but "
        << notionals.size() << " notionals were given";
    throw DimensionMismatch(msg.str());
  }
  return sensitivity * notionals;
}

RiskModel::RiskModel(std::vector<std::string> factor_names, Vector exposure,
                     Matrix sensitivity, Matrix covariance)
    : factor_names_(std::move(factor_names)),
      exposure_(std::move(exposure)),
      sensitivity_(std::move(sensitivity)),
      covariance_(std::move(covariance)) {
  const Index m = exposure_.size();
  if (m == 0) {
    throw Error("risk model must have at least one factor");
  }
  if (static_cast<Index>(factor_names_.size()) != m) {
    throw DimensionMismatch("factor name count does not match exposure length");
  }
  if (sensitivity_.rows() != m) {
    std::ostringstream msg;
    msg << "sensitivity has " << sensitivity_.rows() << " rows but the model has "
        << m << " factors";
    throw DimensionMismatch(msg.str());
  }
  if (sensitivity_.cols() == 0) {
    throw Error("risk model must cover at least one product");
  }
  if (covariance_.rows() != m || covariance_.cols() != m) {
    std::ostringstream msg;
    msg << "covariance is " << covariance_.rows() << "x" << covariance_.cols()
        << " but the model has " << m << " factors";
    throw DimensionMismatch(msg.str());
  }
  require_finite(exposure_, "exposure");
  require_finite(sensitivity_, "sensitivity");
  require_finite(covariance_, "covariance");

  const double scale = covariance_.cwiseAbs().maxCoeff();
  const double asymmetry = (covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * (1.0 + scale)) {
    throw NonSymmetricCov("covariance is not symmetric");
  }
  covariance_ = ((covariance_ + covariance_.transpose()) / 2.0).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance_, Eigen::EigenvaluesOnly);
  const double max_abs = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-10 * max_abs) {
    throw NotPositiveDefinite("covariance has a negative eigenvalue");
  }
}

RiskModel RiskModel::from_portfolio(std::vector<std::string> factor_names,
                                    Matrix sensitivity, Matrix covariance,
                                    const Portfolio& portfolio) {
  Vector exposure = compute_exposure(sensitivity, portfolio.notionals());
  return RiskModel(std::move(factor_names), std::move(exposure),
                   std::move(sensitivity), std::move(covariance));
}

double RiskModel::variance() const {
  return exposure_.dot(covariance_ * exposure_);
}

double RiskModel::variance_after(const Vector& trades) const {
  if (trades.size() != num_products()) {
    throw DimensionMismatch("trade vector length does not match product count");
  }
  const Vector hedged = exposure_ + sensitivity_ * trades;
  return hedged.dot(covariance_ * hedged);
}

Vector RestrictedRiskModel::expand(const Vector& trades) const {
  if (trades.size() != static_cast<Index>(index_map.size())) {
    throw DimensionMismatch("restricted trade vector has unexpected length");
  }
  Vector full = Vector::Zero(full_size);
  for (Index i = 0; i < trades.size(); ++i) {
    full[index_map[static_cast<std::size_t>(i)]] = trades[i];
  }
  return full;
}

RestrictedRiskModel restrict_to_hedge_universe(const RiskModel& model,
                                               const Portfolio& portfolio) {
  if (model.num_products() != portfolio.size()) {
    throw DimensionMismatch("risk model and portfolio disagree on product count");
  }
  std::vector<Index> keep;
  for (Index i = 0; i < portfolio.size(); ++i) {
    if (portfolio.products()[static_cast<std::size_t>(i)].hedgeable) {
      keep.push_back(i);
    }
  }
  if (keep.empty()) {
    throw EmptyHedgeUniverse("no products are flagged hedgeable");
  }
  Matrix restricted(model.num_factors(), static_cast<Index>(keep.size()));
  for (Index j = 0; j < static_cast<Index>(keep.size()); ++j) {
    restricted.col(j) = model.sensitivity().col(keep[static_cast<std::size_t>(j)]);
  }
  RiskModel sub(model.factor_names(), model.exposure(), std::move(restricted),
                model.covariance());
  return RestrictedRiskModel{std::move(sub), std::move(keep), portfolio.size()};
}

}  // namespace hedgekit
