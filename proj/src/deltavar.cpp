#include "hedgekit/deltavar.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

#include "hedgekit/numdiff.hpp"

namespace hedgekit::deltavar {

namespace {

void check_inputs(const Vector& mean, const Matrix& cov) {
  if (cov.rows() != cov.cols()) {
    throw DimensionMismatch("covariance must be square");
  }
  if (cov.rows() != mean.size()) {
    throw DimensionMismatch("mean length does not match covariance size");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw Error("mean or covariance contains a non-finite entry");
  }
  const double scale = cov.cwiseAbs().maxCoeff();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
    throw NonSymmetricCov("covariance is not symmetric");
  }
}

/// Factor A with A·Aᵀ = cov, tolerant of rank deficiency (pivoted LDLᵀ with
/// tiny negative diagonal entries clamped to zero).
Matrix covariance_factor(const Matrix& cov) {
  const Matrix sym = (cov + cov.transpose()) / 2.0;
  Eigen::LDLT<Matrix> ldlt(sym);
  if (ldlt.info() != Eigen::Success) {
    throw CovFactorizationFailure("covariance could not be factorized");
  }
  Vector d = ldlt.vectorD();
  const double d_scale = d.cwiseAbs().maxCoeff();
  for (Index i = 0; i < d.size(); ++i) {
    if (d[i] < -1e-10 * (1.0 + d_scale)) {
      throw CovFactorizationFailure("covariance has a negative eigenvalue");
    }
    d[i] = std::max(d[i], 0.0);
  }
  Matrix factor = ldlt.matrixL();
  factor = ldlt.transpositionsP().transpose() * factor;
  return factor * d.cwiseSqrt().asDiagonal();
}

}  // namespace

Matrix SmoothMap::jacobian_at(const Vector& x) const {
  if (!evaluate) throw Error("map has no evaluate function");
  if (jacobian) return jacobian(x);
  return numdiff::central_jacobian(evaluate, x);
}

SmoothMap SmoothMap::linear(Matrix weights) {
  SmoothMap map;
  map.evaluate = [weights](const Vector& x) -> Vector {
    if (x.size() != weights.cols()) {
      throw DimensionMismatch("input length does not match the weight matrix");
    }
    return weights * x;
  };
  map.jacobian = [weights](const Vector&) { return weights; };
  return map;
}

SmoothMap SmoothMap::from_function(std::function<Vector(const Vector&)> f) {
  SmoothMap map;
  map.evaluate = std::move(f);
  return map;
}

bool jacobian_consistent(const SmoothMap& map, const Vector& x,
                         double relative_tolerance) {
  if (!map.evaluate) throw Error("map has no evaluate function");
  if (!map.jacobian) return true;
  const Matrix analytic = map.jacobian(x);
  const Matrix differenced = numdiff::central_jacobian(map.evaluate, x);
  if (analytic.rows() != differenced.rows() || analytic.cols() != differenced.cols()) {
    return false;
  }
  const double scale = 1.0 + differenced.cwiseAbs().maxCoeff();
  return (analytic - differenced).cwiseAbs().maxCoeff() <= relative_tolerance * scale;
}

Matrix delta_variance(const SmoothMap& map, const Vector& mean, const Matrix& cov) {
  check_inputs(mean, cov);
  const Matrix jac = map.jacobian_at(mean);
  if (jac.cols() != mean.size()) {
    throw DimensionMismatch("Jacobian column count does not match the mean length");
  }
  const Matrix propagated = jac * ((cov + cov.transpose()) / 2.0) * jac.transpose();
  return (propagated + propagated.transpose()) / 2.0;
}

Matrix mc_variance_oracle(const SmoothMap& map, const Vector& mean, const Matrix& cov,
                          std::size_t samples, std::uint64_t seed) {
  check_inputs(mean, cov);
  if (!map.evaluate) throw Error("map has no evaluate function");
  if (samples < 1000) throw Error("at least 1000 samples are required");

  const Matrix factor = covariance_factor(cov);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vector noise(mean.size());
  Vector sum;
  Matrix outer_sum;
  for (std::size_t k = 0; k < samples; ++k) {
    for (Index i = 0; i < noise.size(); ++i) noise[i] = gauss(rng);
    const Vector value = map.evaluate(mean + factor * noise);
    if (sum.size() == 0) {
      sum = Vector::Zero(value.size());
      outer_sum = Matrix::Zero(value.size(), value.size());
    }
    sum += value;
    outer_sum += value * value.transpose();
  }

  const double n = static_cast<double>(samples);
  const Vector sample_mean = sum / n;
  Matrix estimate =
      (outer_sum - n * sample_mean * sample_mean.transpose()) / (n - 1.0);
  return (estimate + estimate.transpose()) / 2.0;
}

}  // namespace hedgekit::deltavar
