#include "hedgekit/bonds.hpp"

#include <cmath>
#include <sstream>

namespace hedgekit::bonds {

namespace {

// Spot checks for basis sanity: the maturities a desk curve must cover.
constexpr double kBasisProbes[] = {0.0,  0.01, 0.1,  0.5,  1.0,  2.0, 5.0,
                                   10.0, 20.0, 30.0, 50.0, 75.0, 100.0};

}  // namespace

void Bond::validate() const {
  if (id.empty()) throw Error("bond id must be non-empty");
  if (cashflows.empty()) throw Error("bond " + id + " has no cashflows");
  double previous = 0.0;
  for (const Cashflow& flow : cashflows) {
    if (!std::isfinite(flow.amount)) {
      throw Error("bond " + id + " has a non-finite cashflow amount");
    }
    if (!std::isfinite(flow.time_years) || flow.time_years <= 0.0) {
      throw Error("bond " + id + " has a cashflow at non-positive time");
    }
    if (flow.time_years <= previous) {
      throw Error("bond " + id + " cashflow times must be strictly increasing");
    }
    previous = flow.time_years;
  }
  if (!std::isfinite(idiosyncratic_spread)) {
    throw Error("bond " + id + " has a non-finite spread");
  }
}

YieldCurveModel::YieldCurveModel(std::vector<std::function<double(double)>> basis,
                                 Vector betas)
    : basis_(std::move(basis)), betas_(std::move(betas)) {
  if (basis_.empty()) throw Error("yield curve needs at least one basis function");
  if (static_cast<Index>(basis_.size()) != betas_.size()) {
    throw DimensionMismatch("basis function count does not match beta length");
  }
  if (!betas_.allFinite()) throw Error("curve betas contain a non-finite entry");
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    if (!basis_[k]) throw Error("basis function is empty");
    for (double tau : kBasisProbes) {
      if (!std::isfinite(basis_[k](tau))) {
        std::ostringstream msg;
        msg << "basis function " << k << " is non-finite at maturity " << tau;
        throw Error(msg.str());
      }
    }
  }
}

YieldCurveModel YieldCurveModel::nelson_siegel(Vector betas, double theta) {
  if (betas.size() != 3) {
    throw DimensionMismatch("the level/slope/curvature basis takes exactly 3 betas");
  }
  if (!std::isfinite(theta) || theta <= 0.0) {
    throw Error("curve decay scale theta must be positive");
  }
  // -expm1(-u)/u is the numerically stable form of (1 - e^(-u))/u; its
  // u -> 0 limit is 1.
  auto slope = [theta](double tau) {
    const double u = tau / theta;
    return u == 0.0 ? 1.0 : -std::expm1(-u) / u;
  };
  std::vector<std::function<double(double)>> basis;
  basis.emplace_back([](double) { return 1.0; });
  basis.emplace_back(slope);
  basis.emplace_back([slope, theta](double tau) {
    return slope(tau) - std::exp(-tau / theta);
  });
  return YieldCurveModel(std::move(basis), std::move(betas));
}

double YieldCurveModel::basis_value(Index k, double tau) const {
  if (k < 0 || k >= static_cast<Index>(basis_.size())) {
    throw DimensionMismatch("basis index out of range");
  }
  return basis_[static_cast<std::size_t>(k)](tau);
}

double YieldCurveModel::yield(double tau) const {
  double y = 0.0;
  for (Index k = 0; k < betas_.size(); ++k) {
    y += betas_[k] * basis_value(k, tau);
  }
  return y;
}

double price_bond(const Bond& bond, const YieldCurveModel& curve) {
  bond.validate();
  double price = 0.0;
  for (const Cashflow& flow : bond.cashflows) {
    const double rate = curve.yield(flow.time_years) + bond.idiosyncratic_spread;
    price += flow.amount * std::exp(-rate * flow.time_years);
  }
  return price;
}

Matrix bond_jacobian(const std::vector<Bond>& bonds, const YieldCurveModel& curve) {
  if (bonds.empty()) throw Error("at least one bond is required");
  const Index d = curve.num_factors();
  const auto n = static_cast<Index>(bonds.size());
  Matrix jac = Matrix::Zero(d + n, n);

  for (Index i = 0; i < n; ++i) {
    const Bond& bond = bonds[static_cast<std::size_t>(i)];
    bond.validate();
    for (const Cashflow& flow : bond.cashflows) {
      const double tau = flow.time_years;
      const double rate = curve.yield(tau) + bond.idiosyncratic_spread;
      const double discounted_time = tau * flow.amount * std::exp(-rate * tau);
      for (Index k = 0; k < d; ++k) {
        jac(k, i) -= discounted_time * curve.basis_value(k, tau);
      }
      // Only the bond's own spread moves its price; other spread rows stay
      // exactly zero.
      jac(d + i, i) -= discounted_time;
    }
  }
  return jac;
}

RiskModel build_bond_risk_model(const std::vector<Bond>& bonds,
                                const YieldCurveModel& curve,
                                const Matrix& factor_cov, const Vector& notionals) {
  if (notionals.size() != static_cast<Index>(bonds.size())) {
    throw DimensionMismatch("notional count does not match bond count");
  }
  Matrix sensitivity = bond_jacobian(bonds, curve);

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(sensitivity.rows()));
  for (Index k = 0; k < curve.num_factors(); ++k) {
    names.push_back("beta" + std::to_string(k + 1));
  }
  for (const Bond& bond : bonds) {
    names.push_back("lambda:" + bond.id);
  }

  Vector exposure = compute_exposure(sensitivity, notionals);
  return RiskModel(std::move(names), std::move(exposure), std::move(sensitivity),
                   factor_cov);
}

double calibrate_idiosyncratic_spread(const Bond& bond, const YieldCurveModel& curve,
                                      double market_price) {
  if (!std::isfinite(market_price) || market_price <= 0.0) {
    throw Error("market price must be positive");
  }
  Bond probe = bond;
  const auto mispricing = [&](double spread) {
    probe.idiosyncratic_spread = spread;
    return price_bond(probe, curve) - market_price;
  };

  double lo = -1.0;
  double hi = 1.0;
  double f_lo = mispricing(lo);
  double f_hi = mispricing(hi);
  if (f_lo * f_hi > 0.0) {
    throw Error("market price is outside the spread bracket [-1, 1]");
  }
  // Price is decreasing in the spread, so keep the sign convention explicit
  // rather than assuming which end is high.
  for (int iteration = 0; iteration < 200; ++iteration) {
    const double mid = (lo + hi) / 2.0;
    const double f_mid = mispricing(mid);
    if (std::abs(f_mid) <= 1e-10) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2.0;
}

}  // namespace hedgekit::bonds
