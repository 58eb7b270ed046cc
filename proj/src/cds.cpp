#include "hedgekit/cds.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace hedgekit::cds {

namespace {

std::string lowercase(const std::string& text) {
  std::string out = text;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

void CdsIndexProduct::validate() const {
  if (id.empty()) throw Error("index id must be non-empty");
  if (!std::isfinite(cdv01) || cdv01 <= 0.0) {
    throw Error("index " + id + " must have a positive, finite cdv01");
  }
  if (currency != "EUR" && currency != "USD") {
    throw Error("index " + id + " must quote in EUR or USD, got " + currency);
  }
  const std::string prefix = lowercase(id);
  if (prefix.rfind("itraxx", 0) == 0 && currency != "EUR") {
    throw Error("index " + id + " belongs to the EUR-quoted family");
  }
  if (prefix.rfind("cdx", 0) == 0 && currency != "USD") {
    throw Error("index " + id + " belongs to the USD-quoted family");
  }
}

bool is_diagonal(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) != 0.0) return false;
    }
  }
  return true;
}

RiskModel build_cds_risk_model(const std::vector<CdsIndexProduct>& indices,
                               const Matrix& spread_cov, const Vector& notionals) {
  if (indices.empty()) throw Error("at least one index is required");
  const auto n = static_cast<Index>(indices.size());
  if (notionals.size() != n) {
    throw DimensionMismatch("notional count does not match index count");
  }

  std::set<std::string> seen;
  std::vector<std::string> names;
  names.reserve(indices.size());
  Matrix sensitivity = Matrix::Zero(n, n);
  Vector effective = notionals;
  for (Index i = 0; i < n; ++i) {
    const CdsIndexProduct& index = indices[static_cast<std::size_t>(i)];
    index.validate();
    if (!seen.insert(index.id).second) {
      throw Error("duplicate index id: " + index.id);
    }
    // Sensitivities stay positive so the diagonal closed form applies; the
    // protection side signs the notional instead (sold protection is a
    // negative bought-protection position).
    sensitivity(i, i) = index.cdv01;
    if (index.side == ProtectionSide::Sell) effective[i] = -effective[i];
    names.push_back("spread:" + index.id);
  }

  Vector exposure = compute_exposure(sensitivity, effective);
  return RiskModel(std::move(names), std::move(exposure), std::move(sensitivity),
                   spread_cov);
}

}  // namespace hedgekit::cds
