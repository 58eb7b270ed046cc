#pragma once

// Shared helpers for the test suites: deterministic random instance
// generators, scalar optimization oracles used as independent references,
// and a process spawner for the command-line binary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hedgekit/core.hpp"
#include "hedgekit/qp.hpp"

namespace hedgekit::testing {

using Rng = std::mt19937_64;

inline Vector random_vector(Rng& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  return v;
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

/// Symmetric matrix with entries of order `scale`.
inline Matrix random_symmetric(Rng& rng, Index n, double scale = 1.0) {
  const Matrix m = random_matrix(rng, n, n, scale);
  return (m + m.transpose()) / 2.0;
}

/// Strictly positive definite matrix: AᵀA/n plus a ridge in [0.1, 1.1].
inline Matrix random_spd(Rng& rng, Index n) {
  const Matrix a = random_matrix(rng, n, n);
  std::uniform_real_distribution<double> ridge(0.1, 1.1);
  return a.transpose() * a / static_cast<double>(n) +
         ridge(rng) * Matrix::Identity(n, n);
}

/// m×n matrix with full column rank (resampled until the smallest singular
/// value clears a safety floor; overwhelmingly the first draw).
inline Matrix random_full_column_rank(Rng& rng, Index m, Index n) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix h = random_matrix(rng, m, n);
    Eigen::JacobiSVD<Matrix> svd(h);
    if (svd.singularValues().minCoeff() > 1e-3) return h;
  }
  throw std::runtime_error("could not draw a full-column-rank matrix");
}

/// Random risk model with C positive definite and H full column rank, so
/// that HᵀCH is positive definite and every hedge formulation is usable.
inline RiskModel random_risk_model(Rng& rng, Index m, Index n) {
  std::vector<std::string> names;
  for (Index i = 0; i < m; ++i) names.push_back("f" + std::to_string(i + 1));
  return RiskModel(std::move(names), random_vector(rng, m, 2.0),
                   random_full_column_rank(rng, m, n), random_spd(rng, m));
}

/// Golden-section search for the minimizer of a continuous unimodal (here:
/// convex) function on [lo, hi]. Used as an independent scalar oracle.
inline double golden_section_minimize(const std::function<double(double)>& f,
                                      double lo, double hi, double tol = 1e-12) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2.0;
}

/// Parabolic polish for a golden-section result. Golden section stalls once
/// the objective flattens into rounding noise (abscissa error ~ √ε·scale);
/// fitting the quadratic through (x − δ, x, x + δ) and jumping to its vertex
/// recovers the minimizer of a locally quadratic objective to near machine
/// precision from function values alone. The stencil must stay inside a
/// smooth region: pick delta smaller than the distance to any kink.
inline double refine_quadratic_min(const std::function<double(double)>& f,
                                   double x, double delta) {
  for (int pass = 0; pass < 3 && delta > 0.0; ++pass) {
    const double below = f(x - delta);
    const double at = f(x);
    const double above = f(x + delta);
    const double curvature = below - 2.0 * at + above;
    if (!(curvature > 0.0)) break;  // flat at rounding level: keep x
    const double step = 0.5 * delta * (below - above) / curvature;
    if (!std::isfinite(step) || std::abs(step) > delta) break;
    x += step;
    delta *= 0.25;
  }
  return x;
}

/// A random strictly convex QP together with a point that is strictly
/// feasible by construction.
struct RandomQp {
  qp::QpProblem problem;
  Vector feasible;
};

inline RandomQp make_random_qp(Rng& rng, Index k, Index p, bool with_equalities) {
  const Matrix a = random_matrix(rng, k, k);
  std::uniform_real_distribution<double> ridge(0.5, 2.0);
  const Matrix big_p = a.transpose() * a + ridge(rng) * Matrix::Identity(k, k);
  const Vector q = random_vector(rng, k, 5.0);

  const Vector interior = random_vector(rng, k);
  const Matrix g = random_matrix(rng, p, k);
  std::uniform_real_distribution<double> margin(0.1, 2.0);
  Vector h = g * interior;
  for (Index i = 0; i < p; ++i) h[i] += margin(rng);

  if (!with_equalities || k < 2) {
    return {qp::QpProblem(big_p, q, g, h), interior};
  }
  std::uniform_int_distribution<Index> eq_count(1, std::min<Index>(3, k - 1));
  const Index e = eq_count(rng);
  const Matrix eq = random_matrix(rng, e, k);
  const Vector b = eq * interior;
  return {qp::QpProblem(big_p, q, g, h, eq, b), interior};
}

/// A random feasible point of `rq`: a direction projected onto the equality
/// null space, stepped from the known interior point and truncated before
/// any inequality is crossed.
inline Vector random_feasible_point(Rng& rng, const RandomQp& rq) {
  const qp::QpProblem& prob = rq.problem;
  Vector d = random_vector(rng, prob.num_vars());
  if (prob.A) {
    const Matrix& a = *prob.A;
    // d -= Aᵀ(AAᵀ)⁻¹A d keeps A(x + td) = b.
    const Matrix gram = a * a.transpose();
    d -= a.transpose() * gram.ldlt().solve(a * d);
  }
  double t_max = 5.0;
  if (prob.G) {
    const Vector gd = (*prob.G) * d;
    const Vector slack = *prob.h - (*prob.G) * rq.feasible;
    for (Index i = 0; i < gd.size(); ++i) {
      if (gd[i] > 1e-12) t_max = std::min(t_max, slack[i] / gd[i]);
    }
  }
  std::uniform_real_distribution<double> step(0.0, 1.0);
  return rq.feasible + step(rng) * t_max * d;
}

inline double max_abs_or_zero(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Largest absolute entry over all problem data, the scale used by the
/// solution-quality contracts.
inline double input_scale(const qp::QpProblem& prob) {
  double scale = std::max(max_abs_or_zero(prob.P), max_abs_or_zero(prob.q));
  if (prob.G) scale = std::max({scale, max_abs_or_zero(*prob.G), max_abs_or_zero(*prob.h)});
  if (prob.A) scale = std::max({scale, max_abs_or_zero(*prob.A), max_abs_or_zero(*prob.b)});
  return scale;
}

// --- command-line process helpers -------------------------------------------

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

/// Runs the hedging binary with the given arguments and optional extra
/// environment variables; captures stdout and the exit code (stderr is
/// folded into stdout so error documents are visible to assertions).
inline CliResult run_process(const std::string& binary,
                             const std::vector<std::string>& args,
                             const std::map<std::string, std::string>& env = {}) {
  std::ostringstream cmd;
  cmd << "env";
  for (const auto& [key, value] : env) {
    cmd << " " << key << "=" << shell_quote(value);
  }
  cmd << " " << shell_quote(binary);
  for (const std::string& arg : args) cmd << " " << shell_quote(arg);
  cmd << " 2>&1";

  FILE* pipe = ::popen(cmd.str().c_str(), "r");
  CliResult result;
  if (pipe == nullptr) return result;
  std::array<char, 4096> buffer;
  while (std::size_t got = std::fread(buffer.data(), 1, buffer.size(), pipe)) {
    result.output.append(buffer.data(), got);
  }
  const int status = ::pclose(pipe);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

/// Scratch directory for fixture files, removed when the test ends.
class TempDir {
public:
  TempDir() {
    const auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    dir_ = base / ("hedgekit_test_" + std::to_string(rd()) + "_" +
                   std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string write(const std::string& name, const std::string& content) const {
    const auto path = dir_ / name;
    std::ofstream out(path);
    out << content;
    return path.string();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

private:
  std::filesystem::path dir_;
};

}  // namespace hedgekit::testing
