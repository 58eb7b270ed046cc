#include "hedgekit/io.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace hedgekit::io {

namespace {

std::string join(const std::string& context, const std::string& field) {
  return context.empty() ? field : context + "." + field;
}

const json& require_field(const json& doc, const std::string& field,
                          const std::string& context) {
  if (!doc.is_object()) {
    throw ValidationError(context.empty() ? "(document)" : context,
                          "expected an object");
  }
  const auto it = doc.find(field);
  if (it == doc.end()) {
    throw ValidationError(join(context, field), "missing required field");
  }
  return *it;
}

double as_number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ValidationError(path, "expected a number");
  return value.get<double>();
}

std::string as_string(const json& value, const std::string& path) {
  if (!value.is_string()) throw ValidationError(path, "expected a string");
  return value.get<std::string>();
}

bool as_bool(const json& value, const std::string& path) {
  if (!value.is_boolean()) throw ValidationError(path, "expected a boolean");
  return value.get<bool>();
}

Vector as_vector(const json& value, const std::string& path) {
  if (!value.is_array()) throw ValidationError(path, "expected an array of numbers");
  Vector out(static_cast<Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    out[static_cast<Index>(i)] =
        as_number(value[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix as_matrix(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) {
    throw ValidationError(path, "expected a non-empty array of rows");
  }
  const std::size_t rows = value.size();
  std::size_t cols = 0;
  Matrix out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const Vector row = as_vector(value[i], row_path);
    if (i == 0) {
      cols = static_cast<std::size_t>(row.size());
      if (cols == 0) throw ValidationError(row_path, "rows must be non-empty");
      out.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw ValidationError(row_path, "rows must all have the same length");
    }
    out.row(static_cast<Index>(i)) = row;
  }
  return out;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    out.push_back(vector_to_json(m.row(i)));
  }
  return out;
}

void check_schema_version(const json& doc) {
  const json& version = require_field(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw ValidationError("schema_version",
                          "unsupported version (expected " +
                              std::to_string(kSchemaVersion) + ")");
  }
}

std::string asset_class_to_string(AssetClass asset_class) {
  switch (asset_class) {
    case AssetClass::Equity: return "equity";
    case AssetClass::CdsIndex: return "cds_index";
    case AssetClass::Bond: return "bond";
  }
  throw Error("unknown asset class");
}

AssetClassConvention convention_from_strings(const std::string& asset_class,
                                             const std::string& currency,
                                             const std::string& path) {
  if (asset_class == "equity") return AssetClassConvention::equity(currency);
  if (asset_class == "cds_index") return AssetClassConvention::cds_index(currency);
  if (asset_class == "bond") return AssetClassConvention::bond(currency);
  throw ValidationError(path, "expected one of: equity, cds_index, bond");
}

}  // namespace

std::string notional_unit_string(const AssetClassConvention& convention) {
  switch (convention.notional_unit) {
    case NotionalUnit::Shares: return "shares";
    case NotionalUnit::CurrencyAmount: return "currency";
    case NotionalUnit::CurrencyFaceValue: return "face_units";
  }
  throw Error("unknown notional unit");
}

json load_json(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw ValidationError(path, "cannot open file");
  }
  try {
    return json::parse(stream);
  } catch (const json::parse_error& error) {
    throw ValidationError(path, std::string("invalid JSON: ") + error.what());
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("digest computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw ValidationError(path, "cannot open file");
  }
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return sha256_hex(buffer.str());
}

Portfolio parse_portfolio(const json& doc) {
  check_schema_version(doc);
  const json& products_json = require_field(doc, "products", "");
  if (!products_json.is_array() || products_json.empty()) {
    throw ValidationError("products", "expected a non-empty array");
  }

  std::vector<Product> products;
  products.reserve(products_json.size());
  for (std::size_t i = 0; i < products_json.size(); ++i) {
    const std::string path = "products[" + std::to_string(i) + "]";
    const json& entry = products_json[i];
    Product product;
    product.id = as_string(require_field(entry, "id", path), path + ".id");
    const std::string asset_class =
        as_string(require_field(entry, "asset_class", path), path + ".asset_class");
    const std::string currency =
        as_string(require_field(entry, "currency", path), path + ".currency");
    product.convention =
        convention_from_strings(asset_class, currency, path + ".asset_class");
    if (entry.contains("hedgeable")) {
      product.hedgeable = as_bool(entry["hedgeable"], path + ".hedgeable");
    }
    products.push_back(std::move(product));
  }

  const Vector notionals = as_vector(require_field(doc, "notionals", ""), "notionals");
  const Vector prices = as_vector(require_field(doc, "prices", ""), "prices");
  return Portfolio(std::move(products), notionals, prices);
}

json portfolio_to_json(const Portfolio& portfolio) {
  json products = json::array();
  for (const Product& product : portfolio.products()) {
    products.push_back({
        {"id", product.id},
        {"asset_class", asset_class_to_string(product.convention.asset_class)},
        {"currency", product.convention.currency},
        {"hedgeable", product.hedgeable},
    });
  }
  return {
      {"schema_version", kSchemaVersion},
      {"products", std::move(products)},
      {"notionals", vector_to_json(portfolio.notionals())},
      {"prices", vector_to_json(portfolio.prices())},
  };
}

RiskModel parse_risk_model(const json& doc) {
  check_schema_version(doc);
  const json& factors_json = require_field(doc, "factors", "");
  if (!factors_json.is_array() || factors_json.empty()) {
    throw ValidationError("factors", "expected a non-empty array of names");
  }
  std::vector<std::string> factors;
  factors.reserve(factors_json.size());
  for (std::size_t i = 0; i < factors_json.size(); ++i) {
    factors.push_back(
        as_string(factors_json[i], "factors[" + std::to_string(i) + "]"));
  }
  const Vector exposure = as_vector(require_field(doc, "exposure", ""), "exposure");
  const Matrix sensitivity =
      as_matrix(require_field(doc, "sensitivity", ""), "sensitivity");
  const Matrix covariance =
      as_matrix(require_field(doc, "covariance", ""), "covariance");
  return RiskModel(std::move(factors), exposure, sensitivity, covariance);
}

json risk_model_to_json(const RiskModel& model) {
  return {
      {"schema_version", kSchemaVersion},
      {"factors", model.factor_names()},
      {"exposure", vector_to_json(model.exposure())},
      {"sensitivity", matrix_to_json(model.sensitivity())},
      {"covariance", matrix_to_json(model.covariance())},
  };
}

BondFile parse_bond_file(const json& doc) {
  check_schema_version(doc);
  const json& bonds_json = require_field(doc, "bonds", "");
  if (!bonds_json.is_array() || bonds_json.empty()) {
    throw ValidationError("bonds", "expected a non-empty array");
  }

  BondFile file;
  for (std::size_t i = 0; i < bonds_json.size(); ++i) {
    const std::string path = "bonds[" + std::to_string(i) + "]";
    const json& entry = bonds_json[i];
    bonds::Bond bond;
    bond.id = as_string(require_field(entry, "id", path), path + ".id");
    const json& flows = require_field(entry, "cashflows", path);
    if (!flows.is_array() || flows.empty()) {
      throw ValidationError(path + ".cashflows", "expected a non-empty array");
    }
    for (std::size_t j = 0; j < flows.size(); ++j) {
      const std::string flow_path =
          path + ".cashflows[" + std::to_string(j) + "]";
      const json& flow = flows[j];
      if (!flow.is_array() || flow.size() != 2) {
        throw ValidationError(flow_path, "expected an [amount, time_years] pair");
      }
      bond.cashflows.push_back({as_number(flow[0], flow_path + "[0]"),
                                as_number(flow[1], flow_path + "[1]")});
    }
    if (entry.contains("lambda")) {
      bond.idiosyncratic_spread = as_number(entry["lambda"], path + ".lambda");
    }
    bond.validate();
    file.bonds.push_back(std::move(bond));
  }

  const json& curve = require_field(doc, "curve", "");
  if (curve.contains("theta")) {
    file.curve_theta = as_number(curve["theta"], "curve.theta");
  }
  file.curve_betas = as_vector(require_field(curve, "betas", "curve"), "curve.betas");
  file.curve();  // validates theta and beta count
  return file;
}

CdsFile parse_cds_file(const json& doc) {
  check_schema_version(doc);
  const json& indices_json = require_field(doc, "indices", "");
  if (!indices_json.is_array() || indices_json.empty()) {
    throw ValidationError("indices", "expected a non-empty array");
  }

  CdsFile file;
  for (std::size_t i = 0; i < indices_json.size(); ++i) {
    const std::string path = "indices[" + std::to_string(i) + "]";
    const json& entry = indices_json[i];
    cds::CdsIndexProduct index;
    index.id = as_string(require_field(entry, "id", path), path + ".id");
    index.currency =
        as_string(require_field(entry, "currency", path), path + ".currency");
    index.cdv01 = as_number(require_field(entry, "cdv01", path), path + ".cdv01");
    const std::string side =
        as_string(require_field(entry, "side", path), path + ".side");
    if (side == "buy") {
      index.side = cds::ProtectionSide::Buy;
    } else if (side == "sell") {
      index.side = cds::ProtectionSide::Sell;
    } else {
      throw ValidationError(path + ".side", "expected \"buy\" or \"sell\"");
    }
    index.validate();
    file.indices.push_back(std::move(index));
  }
  file.spread_cov = as_matrix(require_field(doc, "spread_cov", ""), "spread_cov");
  return file;
}

CostsFile parse_costs_file(const json& doc) {
  check_schema_version(doc);
  CostsFile file;
  if (doc.contains("symmetric")) {
    file.symmetric = as_vector(doc["symmetric"], "symmetric");
  }
  if (doc.contains("buy")) file.buy = as_vector(doc["buy"], "buy");
  if (doc.contains("sell")) file.sell = as_vector(doc["sell"], "sell");
  return file;
}

Matrix parse_covariance_file(const json& doc) {
  check_schema_version(doc);
  return as_matrix(require_field(doc, "covariance", ""), "covariance");
}

json matrix_json(const Matrix& m) { return matrix_to_json(m); }

json vector_json(const Vector& v) { return vector_to_json(v); }

json hedge_report_to_json(const HedgeReport& report) {
  json inputs = json::object();
  for (const auto& [label, digest] : report.inputs) {
    inputs[label] = {{"path", digest.path}, {"sha256", digest.sha256}};
  }
  json trades = json::array();
  for (const TradeLine& line : report.trades) {
    trades.push_back({{"id", line.id},
                      {"notional_change", line.notional_change},
                      {"unit", line.unit}});
  }
  json solver = {
      {"method", report.solver.method},
      {"status", report.solver.status},
      {"iterations", report.solver.iterations},
      {"gap", report.solver.gap},
      {"primal_residual", report.solver.primal_residual},
      {"dual_residual", report.solver.dual_residual},
      {"notes", report.solver.notes},
  };
  json doc = {
      {"schema_version", kSchemaVersion},
      {"inputs", std::move(inputs)},
      {"mode", report.mode},
      {"lambda_c", report.lambda_c},
      {"lambda_0", report.lambda_0 ? json(*report.lambda_0) : json(nullptr)},
      {"hedge_universe_only", report.hedge_universe_only},
      {"trades", std::move(trades)},
      {"variance_before", report.variance_before},
      {"variance_after", report.variance_after},
      {"cost_paid", report.cost_paid},
      {"solver", std::move(solver)},
  };
  if (report.lambda0_admissible) {
    doc["lambda0_admissible"] =
        json::array({(*report.lambda0_admissible)[0], (*report.lambda0_admissible)[1]});
  } else {
    doc["lambda0_admissible"] = nullptr;
  }
  return doc;
}

HedgeReport hedge_report_from_json(const json& doc) {
  check_schema_version(doc);
  HedgeReport report;

  const json& inputs = require_field(doc, "inputs", "");
  if (!inputs.is_object()) throw ValidationError("inputs", "expected an object");
  for (const auto& [label, entry] : inputs.items()) {
    const std::string path = "inputs." + label;
    InputDigest digest;
    digest.path = as_string(require_field(entry, "path", path), path + ".path");
    digest.sha256 = as_string(require_field(entry, "sha256", path), path + ".sha256");
    report.inputs[label] = std::move(digest);
  }

  report.mode = as_string(require_field(doc, "mode", ""), "mode");
  report.lambda_c = as_number(require_field(doc, "lambda_c", ""), "lambda_c");
  const json& lambda0 = require_field(doc, "lambda_0", "");
  if (!lambda0.is_null()) report.lambda_0 = as_number(lambda0, "lambda_0");
  const json& admissible = require_field(doc, "lambda0_admissible", "");
  if (!admissible.is_null()) {
    if (!admissible.is_array() || admissible.size() != 2) {
      throw ValidationError("lambda0_admissible", "expected [lo, hi]");
    }
    report.lambda0_admissible = {as_number(admissible[0], "lambda0_admissible[0]"),
                                 as_number(admissible[1], "lambda0_admissible[1]")};
  }
  report.hedge_universe_only = as_bool(
      require_field(doc, "hedge_universe_only", ""), "hedge_universe_only");

  const json& trades = require_field(doc, "trades", "");
  if (!trades.is_array()) throw ValidationError("trades", "expected an array");
  for (std::size_t i = 0; i < trades.size(); ++i) {
    const std::string path = "trades[" + std::to_string(i) + "]";
    const json& entry = trades[i];
    TradeLine line;
    line.id = as_string(require_field(entry, "id", path), path + ".id");
    line.notional_change = as_number(require_field(entry, "notional_change", path),
                                     path + ".notional_change");
    line.unit = as_string(require_field(entry, "unit", path), path + ".unit");
    report.trades.push_back(std::move(line));
  }

  report.variance_before =
      as_number(require_field(doc, "variance_before", ""), "variance_before");
  report.variance_after =
      as_number(require_field(doc, "variance_after", ""), "variance_after");
  report.cost_paid = as_number(require_field(doc, "cost_paid", ""), "cost_paid");

  const json& solver = require_field(doc, "solver", "");
  report.solver.method = as_string(require_field(solver, "method", "solver"),
                                   "solver.method");
  report.solver.status = as_string(require_field(solver, "status", "solver"),
                                   "solver.status");
  const json& iterations = require_field(solver, "iterations", "solver");
  if (!iterations.is_number_integer()) {
    throw ValidationError("solver.iterations", "expected an integer");
  }
  report.solver.iterations = iterations.get<int>();
  report.solver.gap = as_number(require_field(solver, "gap", "solver"), "solver.gap");
  report.solver.primal_residual = as_number(
      require_field(solver, "primal_residual", "solver"), "solver.primal_residual");
  report.solver.dual_residual = as_number(
      require_field(solver, "dual_residual", "solver"), "solver.dual_residual");
  const json& notes = require_field(solver, "notes", "solver");
  if (!notes.is_array()) throw ValidationError("solver.notes", "expected an array");
  for (std::size_t i = 0; i < notes.size(); ++i) {
    report.solver.notes.push_back(
        as_string(notes[i], "solver.notes[" + std::to_string(i) + "]"));
  }
  return report;
}

json spectral_report_to_json(const spectral::SpectralReport& report) {
  json predicted = json::array();
  for (const auto& eig : report.eigenvalues_predicted) {
    predicted.push_back({{"value", eig.value}, {"branch", eig.branch}});
  }
  json doc = {
      {"predicted", std::move(predicted)},
      {"direct", report.eigenvalues_direct},
      {"min_eigenvalue", report.min_eigenvalue},
      {"is_positive_definite", report.is_positive_definite},
  };
  if (report.lambda0_admissible) {
    doc["lambda0_admissible"] =
        json::array({report.lambda0_admissible->lo, report.lambda0_admissible->hi});
  } else {
    doc["lambda0_admissible"] = nullptr;
  }
  return doc;
}

json assembly_to_json(const hedge::AugmentedAssembly& assembly) {
  return {
      {"split", assembly.split == hedge::AugmentedSplit::AbsValue ? "abs_value"
                                                                  : "buy_sell"},
      {"lambda_0", assembly.lambda_0},
      {"P", matrix_to_json(assembly.P)},
      {"q", vector_to_json(assembly.q)},
      {"G", matrix_to_json(assembly.G)},
      {"h", vector_to_json(assembly.h)},
  };
}

}  // namespace hedgekit::io
