#pragma once

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedgekit/bonds.hpp"
#include "hedgekit/cds.hpp"
#include "hedgekit/common.hpp"
#include "hedgekit/core.hpp"
#include "hedgekit/hedge.hpp"
#include "hedgekit/spectral.hpp"

namespace hedgekit::io {

using json = nlohmann::json;

/// Current version stamped into and required from every document.
inline constexpr int kSchemaVersion = 1;

/// Input validation failure tied to a specific document field. The field is
/// a dotted path like "products[2].currency".
class ValidationError : public Error {
public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

private:
  std::string field_;
};

/// Reads and parses a JSON document; wraps parse failures in ValidationError.
json load_json(const std::string& path);

/// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::string& path);

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

// --- document schemas ------------------------------------------------------

Portfolio parse_portfolio(const json& doc);
json portfolio_to_json(const Portfolio& portfolio);

/// Unit label reported for a product's trades: "shares", "currency", or
/// "face_units" depending on the notional convention.
std::string notional_unit_string(const AssetClassConvention& convention);

RiskModel parse_risk_model(const json& doc);
json risk_model_to_json(const RiskModel& model);

struct BondFile {
  std::vector<bonds::Bond> bonds;
  double curve_theta = 2.0;
  Vector curve_betas;

  bonds::YieldCurveModel curve() const {
    return bonds::YieldCurveModel::nelson_siegel(curve_betas, curve_theta);
  }
};
BondFile parse_bond_file(const json& doc);

struct CdsFile {
  std::vector<cds::CdsIndexProduct> indices;
  Matrix spread_cov;
};
CdsFile parse_cds_file(const json& doc);

struct CostsFile {
  std::optional<Vector> symmetric;
  std::optional<Vector> buy;
  std::optional<Vector> sell;
};
CostsFile parse_costs_file(const json& doc);

/// Parses a standalone covariance document: {"schema_version", "covariance"}.
Matrix parse_covariance_file(const json& doc);

/// Serializes a matrix as an array of row arrays.
json matrix_json(const Matrix& m);

/// Serializes a vector as a flat array.
json vector_json(const Vector& v);

// --- hedge report ----------------------------------------------------------

struct InputDigest {
  std::string path;
  std::string sha256;
};

struct TradeLine {
  std::string id;
  double notional_change = 0.0;
  std::string unit;  // "shares", "currency", "face_units"
};

/// The result document written by the hedge pipeline: inputs (with digests),
/// the mode and weights used, per-product trades, and the variance / cost /
/// solver accounting.
struct HedgeReport {
  std::map<std::string, InputDigest> inputs;  // keyed "portfolio", "risk_model", ...
  std::string mode;                           // "unconstrained", "symmetric", ...
  double lambda_c = 0.0;
  std::optional<double> lambda_0;
  std::optional<std::array<double, 2>> lambda0_admissible;
  bool hedge_universe_only = false;
  std::vector<TradeLine> trades;
  double variance_before = 0.0;
  double variance_after = 0.0;
  double cost_paid = 0.0;
  SolverDiagnostics solver;
};

json hedge_report_to_json(const HedgeReport& report);
HedgeReport hedge_report_from_json(const json& doc);

/// Serializes one spectral analysis (prediction vs direct eigenvalues).
json spectral_report_to_json(const spectral::SpectralReport& report);

/// Serializes assembled QP blocks (the --dump-qp payload).
json assembly_to_json(const hedge::AugmentedAssembly& assembly);

}  // namespace hedgekit::io
