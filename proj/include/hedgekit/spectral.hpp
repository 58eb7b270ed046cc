#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hedgekit/common.hpp"

namespace hedgekit::spectral {

/// Open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  /// Strict interior test with a safety margin: lo + margin < v < hi − margin.
  bool contains(double v, double margin = 0.0) const {
    return v > lo + margin && v < hi - margin;
  }
  double midpoint() const { return (lo + hi) / 2.0; }
};

/// Eigenvalues of diag(A, B) = eig(A) ∪ eig(B), returned sorted ascending.
/// Both blocks must be symmetric (validated to 1e-12 relative).
std::vector<double> eig_block_diag(const Matrix& a, const Matrix& b);

/// Eigenvalues of [[A, B], [B, A]] = eig(A + B) ∪ eig(A − B) for symmetric,
/// commuting-pattern blocks of equal size, returned sorted ascending.
std::vector<double> eig_sym_block(const Matrix& a, const Matrix& b);

/// Smallest eigenvalue of HᵀCH (its spectrum drives every admissibility
/// bound below). Throws NotPositiveDefinite when HᵀCH is singular at
/// tolerance 1e-12 relative to its largest eigenvalue.
double min_eigenvalue_hch(const Matrix& sensitivity, const Matrix& covariance);

/// Admissible smoothing-weight interval (0, 2λ'_min) for the absolute-value
/// split formulation, where λ'_min is the smallest eigenvalue of HᵀCH.
Interval lambda0_range_symmetric(const Matrix& sensitivity, const Matrix& covariance);

/// Admissible smoothing-weight interval (0, 2λ'_min) for the buy/sell split
/// formulation.
Interval lambda0_range_asymmetric(const Matrix& sensitivity, const Matrix& covariance);

/// Quadratic block of the absolute-value split augmented problem:
///   [[2HᵀCH − λ₀I, 0], [0, 2λ₀I]]  (2n × 2n)
Matrix build_p_symmetric(const Matrix& sensitivity, const Matrix& covariance,
                         double lambda0);

/// Quadratic block of the buy/sell split augmented problem:
///   [[2M, −2M + 2λ₀I], [−2M + 2λ₀I, 2M]] with M = HᵀCH  (2n × 2n)
Matrix build_p_asymmetric(const Matrix& sensitivity, const Matrix& covariance,
                          double lambda0);

/// An eigenvalue with the closed-form branch it came from.
struct TaggedEigenvalue {
  double value = 0.0;
  std::string branch;  // e.g. "2*lambda0" or "2*lambda_i - lambda0"
};

/// Closed-form spectrum of build_p_symmetric: {2λ'ᵢ − λ₀} ∪ {2λ₀ (×n)}.
std::vector<TaggedEigenvalue> predicted_eigs_symmetric(const Matrix& sensitivity,
                                                       const Matrix& covariance,
                                                       double lambda0);

/// Closed-form spectrum of build_p_asymmetric: {4λ'ᵢ − 2λ₀} ∪ {2λ₀ (×n)}.
std::vector<TaggedEigenvalue> predicted_eigs_asymmetric(const Matrix& sensitivity,
                                                        const Matrix& covariance,
                                                        double lambda0);

/// Side-by-side spectral check of an augmented quadratic block: closed-form
/// prediction, direct eigendecomposition, and the definiteness verdict.
struct SpectralReport {
  std::vector<TaggedEigenvalue> eigenvalues_predicted;
  std::vector<double> eigenvalues_direct;  // sorted ascending
  double min_eigenvalue = 0.0;
  bool is_positive_definite = false;
  /// Empty when HᵀCH is rank deficient (no admissible weight exists).
  std::optional<Interval> lambda0_admissible;
};

SpectralReport analyze_symmetric(const Matrix& sensitivity,
                                 const Matrix& covariance, double lambda0);

SpectralReport analyze_asymmetric(const Matrix& sensitivity,
                                  const Matrix& covariance, double lambda0);

}  // namespace hedgekit::spectral
