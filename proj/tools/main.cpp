// hedgekit: factor-model hedge construction and risk reports over JSON files.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedgekit/bonds.hpp"
#include "hedgekit/cds.hpp"
#include "hedgekit/common.hpp"
#include "hedgekit/core.hpp"
#include "hedgekit/deltavar.hpp"
#include "hedgekit/hedge.hpp"
#include "hedgekit/io.hpp"
#include "hedgekit/spectral.hpp"

namespace {

using hedgekit::Error;
using hedgekit::HedgeResult;
using hedgekit::Matrix;
using hedgekit::Portfolio;
using hedgekit::RiskModel;
using hedgekit::SolverError;
using hedgekit::Vector;
namespace io = hedgekit::io;
namespace hedge = hedgekit::hedge;
namespace spectral = hedgekit::spectral;
namespace deltavar = hedgekit::deltavar;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

void write_output(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream stream(out_path, std::ios::binary);
  if (!stream) {
    throw io::ValidationError(out_path, "cannot open output file for writing");
  }
  stream << text;
}

/// Options shared by every command that can end in a hedge optimization.
struct HedgeOptions {
  std::string mode = "unconstrained";
  double lambda_c = 0.0;
  std::optional<double> lambda_0;
  std::string costs_path;
  bool universe_only = false;
  std::string dump_qp_path;
  bool literal_q = false;
  bool literal_p = false;
  std::string out_path;
};

void add_hedge_flags(CLI::App* cmd, HedgeOptions& options, bool with_universe_flag) {
  cmd->add_option("--mode", options.mode, "Hedge formulation")
      ->check(CLI::IsMember({"unconstrained", "symmetric", "asymmetric", "diagonal"}));
  cmd->add_option("--lambda-c", options.lambda_c,
                  "Weight of the transaction-cost term");
  cmd->add_option("--lambda-0", options.lambda_0,
                  "Smoothing weight (default: midpoint of the admissible interval)");
  cmd->add_option("--costs", options.costs_path,
                  "JSON file with cost vectors (symmetric / buy / sell)");
  cmd->add_option("--dump-qp", options.dump_qp_path,
                  "Write the assembled QP blocks to this path");
  cmd->add_flag("--literal-q", options.literal_q,
                "Assemble the linear term in the originally printed layout");
  cmd->add_flag("--literal-p", options.literal_p,
                "Assemble the quadratic block in the originally printed layout");
  if (with_universe_flag) {
    cmd->add_flag("--hedge-universe-only", options.universe_only,
                  "Hedge with hedgeable products only");
  }
  cmd->add_option("--out", options.out_path, "Write the report here instead of stdout");
}

hedge::CostSpec load_cost_spec(const HedgeOptions& options, hedgekit::Index n,
                               std::map<std::string, io::InputDigest>& digests) {
  hedge::CostSpec costs;
  costs.lambda_c = options.lambda_c;
  costs.lambda_0 = options.lambda_0;
  if (options.costs_path.empty()) return costs;

  if (options.mode == "unconstrained") {
    throw io::ValidationError("--costs", "unconstrained mode does not take costs");
  }
  const io::CostsFile file = io::parse_costs_file(io::load_json(options.costs_path));
  digests["costs"] = {options.costs_path, io::sha256_file(options.costs_path)};

  if (options.mode == "symmetric") {
    if (!file.symmetric) {
      throw io::ValidationError("symmetric", "costs file lacks the symmetric vector");
    }
    costs.symmetric_costs = *file.symmetric;
  } else {
    if (!file.buy || !file.sell) {
      throw io::ValidationError("buy",
                                "costs file needs both buy and sell vectors");
    }
    costs.buy_costs = *file.buy;
    costs.sell_costs = *file.sell;
  }
  if (costs.symmetric_costs.size() != 0 && costs.symmetric_costs.size() != n) {
    throw io::ValidationError("symmetric", "cost vector length does not match model");
  }
  return costs;
}

/// Runs the selected formulation and fills the hedge part of the report.
/// `ids_units` supplies the per-product labels for the trade lines.
io::HedgeReport run_hedge(const RiskModel& model,
                          const std::vector<std::pair<std::string, std::string>>& ids_units,
                          const HedgeOptions& options, const hedge::CostSpec& costs,
                          std::map<std::string, io::InputDigest> digests,
                          const Portfolio* portfolio) {
  const hedge::AssemblyOptions assembly_options{options.literal_p, options.literal_q};

  const RiskModel* solve_model = &model;
  std::optional<hedgekit::RestrictedRiskModel> restricted;
  if (options.universe_only) {
    if (portfolio == nullptr) {
      throw io::ValidationError("--hedge-universe-only",
                                "requires a portfolio with hedgeable flags");
    }
    restricted = hedgekit::restrict_to_hedge_universe(model, *portfolio);
    solve_model = &restricted->model;
  }

  if (!options.dump_qp_path.empty()) {
    if (options.mode != "symmetric" && options.mode != "asymmetric") {
      throw io::ValidationError("--dump-qp",
                                "only the symmetric and asymmetric modes assemble a QP");
    }
    const hedge::AugmentedAssembly assembly =
        options.mode == "symmetric"
            ? hedge::assemble_symmetric(*solve_model, costs, assembly_options)
            : hedge::assemble_asymmetric(*solve_model, costs, assembly_options);
    write_output(io::assembly_to_json(assembly), options.dump_qp_path);
  }

  io::HedgeReport report;
  report.inputs = std::move(digests);
  report.mode = options.mode;
  report.lambda_c = options.lambda_c;
  report.hedge_universe_only = options.universe_only;

  HedgeResult result;
  if (options.mode == "unconstrained") {
    result = hedge::solve_unconstrained(*solve_model);
  } else if (options.mode == "symmetric") {
    const hedge::AugmentedAssembly assembly =
        hedge::assemble_symmetric(*solve_model, costs, assembly_options);
    report.lambda_0 = assembly.lambda_0;
    const spectral::Interval interval =
        hedge::admissible_lambda0_symmetric(*solve_model, assembly_options);
    report.lambda0_admissible = {{interval.lo, interval.hi}};
    result = hedge::solve_symmetric(*solve_model, costs, assembly_options);
  } else if (options.mode == "asymmetric") {
    const hedge::AugmentedAssembly assembly =
        hedge::assemble_asymmetric(*solve_model, costs, assembly_options);
    report.lambda_0 = assembly.lambda_0;
    const spectral::Interval interval =
        hedge::admissible_lambda0_asymmetric(*solve_model);
    report.lambda0_admissible = {{interval.lo, interval.hi}};
    result = hedge::solve_asymmetric(*solve_model, costs, assembly_options);
  } else {  // diagonal
    result = hedge::solve_diagonal(*solve_model, costs.buy_costs, costs.sell_costs,
                                   costs.lambda_c);
  }

  const Vector trades =
      restricted ? restricted->expand(result.trades) : result.trades;
  if (trades.size() != static_cast<hedgekit::Index>(ids_units.size())) {
    throw Error("internal: trade vector does not match the product labels");
  }
  for (hedgekit::Index i = 0; i < trades.size(); ++i) {
    const auto& [id, unit] = ids_units[static_cast<std::size_t>(i)];
    report.trades.push_back({id, trades[i], unit});
  }
  report.variance_before = result.variance_before;
  report.variance_after = result.variance_after;
  report.cost_paid = result.cost_paid;
  report.solver = result.diagnostics;
  return report;
}

int cmd_hedge(const std::string& portfolio_path, const std::string& model_path,
              const HedgeOptions& options) {
  const Portfolio portfolio = io::parse_portfolio(io::load_json(portfolio_path));
  const RiskModel model = io::parse_risk_model(io::load_json(model_path));
  if (model.num_products() != portfolio.size()) {
    throw io::ValidationError("sensitivity",
                              "risk model and portfolio disagree on product count");
  }

  std::map<std::string, io::InputDigest> digests;
  digests["portfolio"] = {portfolio_path, io::sha256_file(portfolio_path)};
  digests["risk_model"] = {model_path, io::sha256_file(model_path)};
  const hedge::CostSpec costs = load_cost_spec(options, model.num_products(), digests);

  std::vector<std::pair<std::string, std::string>> ids_units;
  for (const auto& product : portfolio.products()) {
    ids_units.emplace_back(product.id, io::notional_unit_string(product.convention));
  }

  const io::HedgeReport report =
      run_hedge(model, ids_units, options, costs, std::move(digests), &portfolio);
  write_output(io::hedge_report_to_json(report), options.out_path);
  return kExitOk;
}

int cmd_check_pd(const std::string& model_path, std::optional<double> lambda0_opt,
                 const std::string& out_path) {
  const RiskModel model = io::parse_risk_model(io::load_json(model_path));

  bool rank_deficient = false;
  double lambda0 = 0.0;
  if (lambda0_opt) {
    lambda0 = *lambda0_opt;
  } else {
    try {
      lambda0 = spectral::lambda0_range_symmetric(model.sensitivity(),
                                                  model.covariance())
                    .midpoint();
    } catch (const hedgekit::NotPositiveDefinite&) {
      rank_deficient = true;
      lambda0 = 1.0;  // probe value; the report carries the verdict
    }
  }

  const spectral::SpectralReport abs_split =
      spectral::analyze_symmetric(model.sensitivity(), model.covariance(), lambda0);
  const spectral::SpectralReport buy_sell =
      spectral::analyze_asymmetric(model.sensitivity(), model.covariance(), lambda0);
  rank_deficient = rank_deficient || !abs_split.lambda0_admissible.has_value();

  json doc = {
      {"schema_version", io::kSchemaVersion},
      {"input", {{"path", model_path}, {"sha256", io::sha256_file(model_path)}}},
      {"lambda_0", lambda0},
      {"rank_deficient", rank_deficient},
      {"abs_value_split", io::spectral_report_to_json(abs_split)},
      {"buy_sell_split", io::spectral_report_to_json(buy_sell)},
  };
  write_output(doc, out_path);
  return kExitOk;
}

int cmd_bond_risk(const std::string& bond_path, const std::string& cov_path,
                  const std::vector<double>& notionals_in, const std::string& model_out,
                  bool then_hedge, const HedgeOptions& options) {
  const io::BondFile file = io::parse_bond_file(io::load_json(bond_path));
  const hedgekit::bonds::YieldCurveModel curve = file.curve();

  const Matrix cov = io::parse_covariance_file(io::load_json(cov_path));
  Vector notionals(static_cast<hedgekit::Index>(notionals_in.size()));
  for (std::size_t i = 0; i < notionals_in.size(); ++i) {
    notionals[static_cast<hedgekit::Index>(i)] = notionals_in[i];
  }
  const RiskModel probe =
      hedgekit::bonds::build_bond_risk_model(file.bonds, curve, cov, notionals);

  json prices = json::array();
  for (const auto& bond : file.bonds) {
    prices.push_back({{"id", bond.id},
                      {"price", hedgekit::bonds::price_bond(bond, curve)}});
  }

  json doc = {
      {"schema_version", io::kSchemaVersion},
      {"input", {{"path", bond_path}, {"sha256", io::sha256_file(bond_path)}}},
      {"prices", std::move(prices)},
      {"model", io::risk_model_to_json(probe)},
  };

  if (!model_out.empty()) {
    write_output(io::risk_model_to_json(probe), model_out);
  }

  if (then_hedge) {
    std::map<std::string, io::InputDigest> digests;
    digests["bonds"] = {bond_path, io::sha256_file(bond_path)};
    digests["covariance"] = {cov_path, io::sha256_file(cov_path)};
    const hedge::CostSpec costs =
        load_cost_spec(options, probe.num_products(), digests);
    std::vector<std::pair<std::string, std::string>> ids_units;
    for (const auto& bond : file.bonds) {
      ids_units.emplace_back(bond.id, "face_units");
    }
    doc["hedge"] = io::hedge_report_to_json(
        run_hedge(probe, ids_units, options, costs, std::move(digests), nullptr));
  }

  write_output(doc, options.out_path);
  return kExitOk;
}

int cmd_cds_risk(const std::string& cds_path, const std::vector<double>& notionals_in,
                 const std::string& model_out, bool then_hedge,
                 const HedgeOptions& options) {
  const io::CdsFile file = io::parse_cds_file(io::load_json(cds_path));
  Vector notionals(static_cast<hedgekit::Index>(notionals_in.size()));
  for (std::size_t i = 0; i < notionals_in.size(); ++i) {
    notionals[static_cast<hedgekit::Index>(i)] = notionals_in[i];
  }

  const RiskModel model =
      hedgekit::cds::build_cds_risk_model(file.indices, file.spread_cov, notionals);

  json doc = {
      {"schema_version", io::kSchemaVersion},
      {"input", {{"path", cds_path}, {"sha256", io::sha256_file(cds_path)}}},
      {"diagonal_covariance", hedgekit::cds::is_diagonal(file.spread_cov)},
      {"model", io::risk_model_to_json(model)},
  };

  if (!model_out.empty()) {
    write_output(io::risk_model_to_json(model), model_out);
  }

  if (then_hedge) {
    std::map<std::string, io::InputDigest> digests;
    digests["indices"] = {cds_path, io::sha256_file(cds_path)};
    const hedge::CostSpec costs =
        load_cost_spec(options, model.num_products(), digests);
    std::vector<std::pair<std::string, std::string>> ids_units;
    for (const auto& index : file.indices) {
      ids_units.emplace_back(index.id, "currency");
    }
    doc["hedge"] = io::hedge_report_to_json(
        run_hedge(model, ids_units, options, costs, std::move(digests), nullptr));
  }

  write_output(doc, options.out_path);
  return kExitOk;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag_seed) {
  if (flag_seed) return *flag_seed;
  if (const char* env = std::getenv("HEDGEKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw io::ValidationError("HEDGEKIT_SEED", "must be an unsigned integer");
    }
  }
  return 12345;
}

int cmd_variance_check(const std::string& which, double sigma, std::size_t samples,
                       std::optional<std::uint64_t> flag_seed,
                       const std::string& out_path) {
  const std::uint64_t seed = resolve_seed(flag_seed);
  json maps = json::object();

  const auto relative_gap = [](const Matrix& a, const Matrix& b) {
    const double scale =
        std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-12});
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };

  if (which == "linear" || which == "all") {
    Matrix weights(2, 2);
    weights << 1.0, 2.0, 0.5, -1.0;
    const deltavar::SmoothMap map = deltavar::SmoothMap::linear(weights);
    Vector mean(2);
    mean << 0.3, -0.2;
    Matrix cov(2, 2);
    cov << 0.04, 0.01, 0.01, 0.09;
    const Matrix delta = deltavar::delta_variance(map, mean, cov);
    const Matrix mc = deltavar::mc_variance_oracle(map, mean, cov, samples, seed);
    maps["linear"] = {{"delta", io::matrix_json(delta)},
                      {"monte_carlo", io::matrix_json(mc)},
                      {"max_relative_error", relative_gap(delta, mc)}};
  }

  if (which == "sin" || which == "all") {
    const deltavar::SmoothMap map = deltavar::SmoothMap::from_function(
        [](const Vector& x) { return Vector(x.array().sin()); });
    Vector mean(1);
    mean << 0.7;
    Matrix cov(1, 1);
    cov << sigma * sigma;
    const Matrix delta = deltavar::delta_variance(map, mean, cov);
    const Matrix mc = deltavar::mc_variance_oracle(map, mean, cov, samples, seed);
    maps["sin"] = {{"delta", io::matrix_json(delta)},
                   {"monte_carlo", io::matrix_json(mc)},
                   {"max_relative_error", relative_gap(delta, mc)}};
  }

  if (which == "square" || which == "all") {
    const deltavar::SmoothMap map = deltavar::SmoothMap::from_function(
        [](const Vector& x) { return Vector(x.array().square()); });
    Vector mean = Vector::Zero(1);
    Matrix cov = Matrix::Identity(1, 1);
    const Matrix delta = deltavar::delta_variance(map, mean, cov);
    const Matrix mc = deltavar::mc_variance_oracle(map, mean, cov, samples, seed);
    maps["square"] = {
        {"delta", io::matrix_json(delta)},
        {"monte_carlo", io::matrix_json(mc)},
        {"note", "first-order variance vanishes at a stationary mean; the "
                 "sampled variance stays finite"}};
  }

  json doc = {
      {"schema_version", io::kSchemaVersion},
      {"seed", seed},
      {"samples", samples},
      {"maps", std::move(maps)},
  };
  write_output(doc, out_path);
  return kExitOk;
}

json error_document(const std::string& type, const std::string& message,
                    const std::string& field = "") {
  json error = {{"type", type}, {"message", message}};
  if (!field.empty()) error["field"] = field;
  return {{"schema_version", io::kSchemaVersion}, {"error", std::move(error)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factor-model hedge construction and risk reports"};
  app.require_subcommand(1);

  // hedge
  HedgeOptions hedge_options;
  std::string portfolio_path;
  std::string model_path;
  CLI::App* hedge_cmd =
      app.add_subcommand("hedge", "Solve a hedge for a portfolio and risk model");
  hedge_cmd->add_option("portfolio", portfolio_path, "Portfolio JSON")->required();
  hedge_cmd->add_option("riskmodel", model_path, "Risk model JSON")->required();
  add_hedge_flags(hedge_cmd, hedge_options, true);

  // check-pd
  std::string check_model_path;
  std::optional<double> check_lambda0;
  std::string check_out;
  CLI::App* check_cmd = app.add_subcommand(
      "check-pd", "Spectral report for the augmented quadratic blocks");
  check_cmd->add_option("riskmodel", check_model_path, "Risk model JSON")->required();
  check_cmd->add_option("--lambda-0", check_lambda0,
                        "Smoothing weight to probe (default: interval midpoint)");
  check_cmd->add_option("--out", check_out, "Write the report here instead of stdout");

  // bond-risk
  HedgeOptions bond_hedge_options;
  std::string bond_path;
  std::string bond_cov_path;
  std::vector<double> bond_notionals;
  std::string bond_model_out;
  bool bond_then_hedge = false;
  CLI::App* bond_cmd = app.add_subcommand(
      "bond-risk", "Price bonds and build their curve/spread risk model");
  bond_cmd->add_option("bonds", bond_path, "Bond file JSON")->required();
  bond_cmd->add_option("--cov", bond_cov_path, "Factor covariance JSON")->required();
  bond_cmd->add_option("--notionals", bond_notionals, "Face-unit notionals")
      ->required()
      ->delimiter(',');
  bond_cmd->add_option("--model-out", bond_model_out,
                       "Also write the risk model JSON here");
  bond_cmd->add_flag("--then-hedge", bond_then_hedge,
                     "Run the hedge optimization on the built model");
  add_hedge_flags(bond_cmd, bond_hedge_options, false);

  // cds-risk
  HedgeOptions cds_hedge_options;
  std::string cds_path;
  std::vector<double> cds_notionals;
  std::string cds_model_out;
  bool cds_then_hedge = false;
  CLI::App* cds_cmd = app.add_subcommand(
      "cds-risk", "Build the spread risk model for credit indices");
  cds_cmd->add_option("indices", cds_path, "Index file JSON")->required();
  cds_cmd->add_option("--notionals", cds_notionals, "Notionals (currency units)")
      ->required()
      ->delimiter(',');
  cds_cmd->add_option("--model-out", cds_model_out,
                      "Also write the risk model JSON here");
  cds_cmd->add_flag("--then-hedge", cds_then_hedge,
                    "Run the hedge optimization on the built model");
  add_hedge_flags(cds_cmd, cds_hedge_options, false);

  // variance-check
  std::string variance_map = "all";
  double variance_sigma = 0.01;
  std::size_t variance_samples = 1000000;
  std::optional<std::uint64_t> variance_seed;
  std::string variance_out;
  CLI::App* variance_cmd = app.add_subcommand(
      "variance-check", "Compare first-order variance against Monte Carlo");
  variance_cmd->add_option("--map", variance_map, "Which fixture map to run")
      ->check(CLI::IsMember({"all", "linear", "sin", "square"}));
  variance_cmd->add_option("--sigma", variance_sigma, "Input noise scale for sin");
  variance_cmd->add_option("--samples", variance_samples, "Monte Carlo sample count");
  variance_cmd->add_option("--seed", variance_seed,
                           "Generator seed (HEDGEKIT_SEED overrides the default)");
  variance_cmd->add_option("--out", variance_out,
                           "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& parse_error) {
    std::cerr << parse_error.what() << "\n";
    std::cout << error_document("validation", parse_error.what()).dump(2) << "\n";
    return kExitValidation;
  }

  try {
    if (hedge_cmd->parsed()) {
      return cmd_hedge(portfolio_path, model_path, hedge_options);
    }
    if (check_cmd->parsed()) {
      return cmd_check_pd(check_model_path, check_lambda0, check_out);
    }
    if (bond_cmd->parsed()) {
      return cmd_bond_risk(bond_path, bond_cov_path, bond_notionals, bond_model_out,
                           bond_then_hedge, bond_hedge_options);
    }
    if (cds_cmd->parsed()) {
      return cmd_cds_risk(cds_path, cds_notionals, cds_model_out, cds_then_hedge,
                          cds_hedge_options);
    }
    if (variance_cmd->parsed()) {
      return cmd_variance_check(variance_map, variance_sigma, variance_samples,
                                variance_seed, variance_out);
    }
    std::cerr << "no subcommand selected\n";
    return kExitValidation;
  } catch (const io::ValidationError& error) {
    std::cerr << "validation error: " << error.what() << "\n";
    std::cout << error_document("validation", error.what(), error.field()).dump(2)
              << "\n";
    return kExitValidation;
  } catch (const SolverError& error) {
    std::cerr << "solver error: " << error.what() << "\n";
    std::cout << error_document("solver", error.what()).dump(2) << "\n";
    return kExitSolver;
  } catch (const Error& error) {
    std::cerr << "validation error: " << error.what() << "\n";
    std::cout << error_document("validation", error.what()).dump(2) << "\n";
    return kExitValidation;
  } catch (const std::exception& error) {
    std::cerr << "internal error: " << error.what() << "\n";
    std::cout << error_document("internal", error.what()).dump(2) << "\n";
    return kExitSolver;
  }
}
