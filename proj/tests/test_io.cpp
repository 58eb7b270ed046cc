#include "hedgekit/io.hpp"

#include <gtest/gtest.h>

#include <string>

#include "support.hpp"

namespace hedgekit::io {
namespace {

json minimal_portfolio_doc() {
  return json::parse(R"({
    "schema_version": 1,
    "products": [
      {"id": "stock-a", "asset_class": "equity", "currency": "EUR"},
      {"id": "itraxx-main", "asset_class": "cds_index", "currency": "EUR",
       "hedgeable": false}
    ],
    "notionals": [100.0, 2.0],
    "prices": [25.0, 0.98]
  })");
}

TEST(Digests, KnownSha256Vectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digests, FileDigestMatchesByteDigest) {
  testing::TempDir dir;
  const std::string path = dir.write("blob.bin", "abc");
  EXPECT_EQ(sha256_file(path), sha256_hex("abc"));
  EXPECT_THROW(sha256_file(dir.path("missing.bin")), ValidationError);
}

TEST(Loading, ParseFailureNamesTheFile) {
  testing::TempDir dir;
  const std::string path = dir.write("broken.json", "{\"unterminated\": ");
  try {
    load_json(path);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), path);
    EXPECT_NE(std::string(error.what()).find("invalid JSON"), std::string::npos);
  }
}

TEST(PortfolioDocs, RoundTripPreservesEverything) {
  const Portfolio portfolio = parse_portfolio(minimal_portfolio_doc());
  EXPECT_EQ(portfolio.size(), 2);
  EXPECT_EQ(portfolio.products()[0].id, "stock-a");
  EXPECT_TRUE(portfolio.products()[0].hedgeable);
  EXPECT_FALSE(portfolio.products()[1].hedgeable);
  EXPECT_DOUBLE_EQ(portfolio.value(), 100.0 * 25.0 + 2.0 * 0.98);

  const json serialized = portfolio_to_json(portfolio);
  const Portfolio reparsed = parse_portfolio(serialized);
  EXPECT_EQ(portfolio_to_json(reparsed), serialized);
}

TEST(PortfolioDocs, MissingFieldsNameTheirPath) {
  json doc = minimal_portfolio_doc();
  doc["products"][1].erase("currency");
  try {
    parse_portfolio(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "products[1].currency");
  }

  json bad_notional = minimal_portfolio_doc();
  bad_notional["notionals"][0] = "a lot";
  try {
    parse_portfolio(bad_notional);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "notionals[0]");
  }
}

TEST(PortfolioDocs, UnknownAssetClassRejected) {
  json doc = minimal_portfolio_doc();
  doc["products"][0]["asset_class"] = "crypto";
  try {
    parse_portfolio(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "products[0].asset_class");
  }
}

TEST(SchemaVersion, WrongOrMissingVersionRejected) {
  json doc = minimal_portfolio_doc();
  doc["schema_version"] = 2;
  EXPECT_THROW(parse_portfolio(doc), ValidationError);
  doc.erase("schema_version");
  try {
    parse_portfolio(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "schema_version");
  }
}

TEST(RiskModelDocs, RoundTrip) {
  const json doc = json::parse(R"({
    "schema_version": 1,
    "factors": ["rates", "credit"],
    "exposure": [1.5, -2.0],
    "sensitivity": [[1.0, 0.5], [0.0, 2.0]],
    "covariance": [[1.0, 0.2], [0.2, 2.0]]
  })");
  const RiskModel model = parse_risk_model(doc);
  EXPECT_EQ(model.factor_names()[1], "credit");
  EXPECT_DOUBLE_EQ(model.exposure()[1], -2.0);
  EXPECT_DOUBLE_EQ(model.sensitivity()(0, 1), 0.5);
  EXPECT_EQ(risk_model_to_json(parse_risk_model(risk_model_to_json(model))),
            risk_model_to_json(model));
}

TEST(RiskModelDocs, RaggedMatrixRejected) {
  json doc = json::parse(R"({
    "schema_version": 1,
    "factors": ["a"],
    "exposure": [1.0],
    "sensitivity": [[1.0, 2.0], [3.0]],
    "covariance": [[1.0]]
  })");
  try {
    parse_risk_model(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "sensitivity[1]");
  }
}

TEST(BondDocs, ParsesCashflowsCurveAndSpreads) {
  const json doc = json::parse(R"({
    "schema_version": 1,
    "bonds": [
      {"id": "short", "cashflows": [[100.0, 1.0]]},
      {"id": "long", "cashflows": [[5.0, 1.0], [105.0, 2.0]], "lambda": 0.01}
    ],
    "curve": {"betas": [0.02, -0.005, 0.001], "theta": 2.5}
  })");
  const BondFile file = parse_bond_file(doc);
  ASSERT_EQ(file.bonds.size(), 2u);
  EXPECT_DOUBLE_EQ(file.bonds[1].idiosyncratic_spread, 0.01);
  EXPECT_DOUBLE_EQ(file.curve_theta, 2.5);
  EXPECT_EQ(file.curve().num_factors(), 3);

  json bad = doc;
  bad["bonds"][0]["cashflows"][0] = json::array({100.0});
  try {
    parse_bond_file(bad);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "bonds[0].cashflows[0]");
  }
}

TEST(CdsDocs, SideIsRequired) {
  json doc = json::parse(R"({
    "schema_version": 1,
    "indices": [
      {"id": "itraxx-main", "currency": "EUR", "cdv01": 450.0, "side": "buy"},
      {"id": "cdx-ig", "currency": "USD", "cdv01": 480.0, "side": "sell"}
    ],
    "spread_cov": [[4.0, 0.0], [0.0, 9.0]]
  })");
  const CdsFile file = parse_cds_file(doc);
  ASSERT_EQ(file.indices.size(), 2u);
  EXPECT_EQ(file.indices[0].side, cds::ProtectionSide::Buy);
  EXPECT_EQ(file.indices[1].side, cds::ProtectionSide::Sell);
  EXPECT_DOUBLE_EQ(file.spread_cov(1, 1), 9.0);

  doc["indices"][0].erase("side");
  try {
    parse_cds_file(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "indices[0].side");
  }

  doc["indices"][0]["side"] = "hold";
  try {
    parse_cds_file(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "indices[0].side");
  }
}

TEST(CostsDocs, AllSectionsOptional) {
  const CostsFile empty = parse_costs_file(json::parse(R"({"schema_version": 1})"));
  EXPECT_FALSE(empty.symmetric.has_value());
  EXPECT_FALSE(empty.buy.has_value());

  const CostsFile full = parse_costs_file(json::parse(R"({
    "schema_version": 1,
    "symmetric": [0.1, 0.2],
    "buy": [0.3],
    "sell": [0.4]
  })"));
  ASSERT_TRUE(full.symmetric.has_value());
  EXPECT_DOUBLE_EQ((*full.symmetric)[1], 0.2);
  ASSERT_TRUE(full.buy.has_value());
  ASSERT_TRUE(full.sell.has_value());
}

TEST(CovarianceDocs, ParseAndReject) {
  const Matrix cov = parse_covariance_file(json::parse(R"({
    "schema_version": 1,
    "covariance": [[1.0, 0.1], [0.1, 1.0]]
  })"));
  EXPECT_DOUBLE_EQ(cov(0, 1), 0.1);
  EXPECT_THROW(parse_covariance_file(json::parse(R"({"schema_version": 1})")),
               ValidationError);
}

TEST(Reports, RoundTripIsExact) {
  HedgeReport report;
  report.inputs["portfolio"] = {"/tmp/p.json", sha256_hex("p")};
  report.inputs["risk_model"] = {"/tmp/m.json", sha256_hex("m")};
  report.mode = "symmetric";
  report.lambda_c = 0.25;
  report.lambda_0 = 0.125;
  report.lambda0_admissible = {{0.0, 0.5}};
  report.hedge_universe_only = true;
  report.trades.push_back({"stock-a", -1.25, "shares"});
  report.trades.push_back({"itraxx-main", 0.5, "currency"});
  report.variance_before = 3.5;
  report.variance_after = 0.125;
  report.cost_paid = 0.0625;
  report.solver.method = "interior-point";
  report.solver.status = "optimal";
  report.solver.iterations = 11;
  report.solver.gap = 1e-12;
  report.solver.primal_residual = 1e-13;
  report.solver.dual_residual = 1e-13;
  report.solver.notes.push_back("note one");

  const json doc = hedge_report_to_json(report);
  const HedgeReport parsed = hedge_report_from_json(doc);
  EXPECT_EQ(hedge_report_to_json(parsed), doc);
  EXPECT_EQ(parsed.trades[0].id, "stock-a");
  EXPECT_EQ(parsed.inputs.at("risk_model").sha256, sha256_hex("m"));
  ASSERT_TRUE(parsed.lambda0_admissible.has_value());
  EXPECT_DOUBLE_EQ((*parsed.lambda0_admissible)[1], 0.5);
}

TEST(Reports, NullWeightFieldsSurviveTheTrip) {
  HedgeReport report;
  report.mode = "unconstrained";
  report.solver.method = "closed-form";
  const json doc = hedge_report_to_json(report);
  EXPECT_TRUE(doc["lambda_0"].is_null());
  EXPECT_TRUE(doc["lambda0_admissible"].is_null());
  const HedgeReport parsed = hedge_report_from_json(doc);
  EXPECT_FALSE(parsed.lambda_0.has_value());
  EXPECT_FALSE(parsed.lambda0_admissible.has_value());
}

TEST(Reports, MalformedSolverBlockNamed) {
  HedgeReport report;
  report.mode = "unconstrained";
  report.solver.method = "closed-form";
  json doc = hedge_report_to_json(report);
  doc["solver"].erase("iterations");
  try {
    hedge_report_from_json(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& error) {
    EXPECT_EQ(error.field(), "solver.iterations");
  }
}

TEST(Serialization, NumbersSurviveJsonRoundTrip) {
  // nlohmann::json stores doubles natively and prints shortest-round-trip
  // representations; spot-check an awkward value.
  const double awkward = 0.1 + 0.2;  // 0.30000000000000004
  json doc = {{"x", awkward}};
  const std::string text = doc.dump();
  EXPECT_EQ(json::parse(text)["x"].get<double>(), awkward);
}

TEST(Serialization, MatrixAndVectorHelpers) {
  Matrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const json mj = matrix_json(m);
  EXPECT_EQ(mj[1][0].get<double>(), 3.0);
  Vector v(3);
  v << 1.0, -2.0, 3.5;
  const json vj = vector_json(v);
  EXPECT_EQ(vj[2].get<double>(), 3.5);
}

TEST(Serialization, AssemblyPayloadCarriesTheBlocks) {
  Vector r(1);
  r << 1.0;
  const RiskModel model({"f1"}, r, Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  const hedge::AugmentedAssembly assembly = hedge::assemble_symmetric(
      model, hedge::CostSpec::symmetric(Vector::Zero(1), 0.0, 0.5));
  const json doc = assembly_to_json(assembly);
  EXPECT_EQ(doc["split"], "abs_value");
  EXPECT_DOUBLE_EQ(doc["lambda_0"].get<double>(), 0.5);
  EXPECT_EQ(doc["P"].size(), 2u);
  EXPECT_EQ(doc["q"].size(), 2u);
}

}  // namespace
}  // namespace hedgekit::io
