#include "hedgekit/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace hedgekit::spectral {

namespace {

void require_symmetric(const Matrix& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(name) + " must be square");
  }
  if (!m.allFinite()) {
    throw Error(std::string(name) + " contains a non-finite entry");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale)) {
    throw NonSymmetric(std::string(name) + " is not symmetric");
  }
}

Vector symmetric_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(((m + m.transpose()) / 2.0).eval(),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

Matrix gram_matrix(const Matrix& sensitivity, const Matrix& covariance) {
  if (sensitivity.rows() != covariance.rows()) {
    throw DimensionMismatch("sensitivity rows must match covariance size");
  }
  require_symmetric(covariance, "covariance");
  if (!sensitivity.allFinite()) {
    throw Error("sensitivity contains a non-finite entry");
  }
  const Matrix sym = (covariance + covariance.transpose()) / 2.0;
  Matrix gram = sensitivity.transpose() * sym * sensitivity;
  return ((gram + gram.transpose()) / 2.0).eval();
}

}  // namespace

std::vector<double> eig_block_diag(const Matrix& a, const Matrix& b) {
  require_symmetric(a, "first block");
  require_symmetric(b, "second block");
  const Vector ea = symmetric_eigenvalues(a);
  const Vector eb = symmetric_eigenvalues(b);
  std::vector<double> all(ea.data(), ea.data() + ea.size());
  all.insert(all.end(), eb.data(), eb.data() + eb.size());
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<double> eig_sym_block(const Matrix& a, const Matrix& b) {
  require_symmetric(a, "diagonal block");
  require_symmetric(b, "off-diagonal block");
  if (a.rows() != b.rows()) {
    throw DimensionMismatch("blocks of [[A,B],[B,A]] must have equal size");
  }
  const Vector sum = symmetric_eigenvalues(a + b);
  const Vector diff = symmetric_eigenvalues(a - b);
  std::vector<double> all(sum.data(), sum.data() + sum.size());
  all.insert(all.end(), diff.data(), diff.data() + diff.size());
  std::sort(all.begin(), all.end());
  return all;
}

double min_eigenvalue_hch(const Matrix& sensitivity, const Matrix& covariance) {
  const Vector eigs = symmetric_eigenvalues(gram_matrix(sensitivity, covariance));
  const double max_abs = eigs.cwiseAbs().maxCoeff();
  const double min_eig = eigs.minCoeff();
  if (min_eig <= 1e-12 * std::max(max_abs, 1e-300)) {
    throw NotPositiveDefinite(
        "HᵀCH is rank deficient: no smoothing weight keeps the augmented "
        "problem positive definite");
  }
  return min_eig;
}

Interval lambda0_range_symmetric(const Matrix& sensitivity, const Matrix& covariance) {
  return {0.0, 2.0 * min_eigenvalue_hch(sensitivity, covariance)};
}

Interval lambda0_range_asymmetric(const Matrix& sensitivity, const Matrix& covariance) {
  return {0.0, 2.0 * min_eigenvalue_hch(sensitivity, covariance)};
}

Matrix build_p_symmetric(const Matrix& sensitivity, const Matrix& covariance,
                         double lambda0) {
  const Matrix gram = gram_matrix(sensitivity, covariance);
  const Index n = gram.rows();
  Matrix p = Matrix::Zero(2 * n, 2 * n);
  p.topLeftCorner(n, n) = 2.0 * gram - lambda0 * Matrix::Identity(n, n);
  p.bottomRightCorner(n, n) = 2.0 * lambda0 * Matrix::Identity(n, n);
  return p;
}

Matrix build_p_asymmetric(const Matrix& sensitivity, const Matrix& covariance,
                          double lambda0) {
  const Matrix gram = gram_matrix(sensitivity, covariance);
  const Index n = gram.rows();
  const Matrix coupling = -2.0 * gram + 2.0 * lambda0 * Matrix::Identity(n, n);
  Matrix p(2 * n, 2 * n);
  p.topLeftCorner(n, n) = 2.0 * gram;
  p.bottomRightCorner(n, n) = 2.0 * gram;
  p.topRightCorner(n, n) = coupling;
  p.bottomLeftCorner(n, n) = coupling;
  return p;
}

std::vector<TaggedEigenvalue> predicted_eigs_symmetric(const Matrix& sensitivity,
                                                       const Matrix& covariance,
                                                       double lambda0) {
  const Vector gram_eigs = symmetric_eigenvalues(gram_matrix(sensitivity, covariance));
  std::vector<TaggedEigenvalue> out;
  out.reserve(static_cast<std::size_t>(2 * gram_eigs.size()));
  // diag(2M − λ₀I, 2λ₀I): block-diagonal spectra concatenate.
  for (Index i = 0; i < gram_eigs.size(); ++i) {
    out.push_back({2.0 * gram_eigs[i] - lambda0, "2*lambda_i - lambda0"});
  }
  for (Index i = 0; i < gram_eigs.size(); ++i) {
    out.push_back({2.0 * lambda0, "2*lambda0"});
  }
  std::sort(out.begin(), out.end(),
            [](const TaggedEigenvalue& a, const TaggedEigenvalue& b) {
              return a.value < b.value;
            });
  return out;
}

std::vector<TaggedEigenvalue> predicted_eigs_asymmetric(const Matrix& sensitivity,
                                                        const Matrix& covariance,
                                                        double lambda0) {
  const Vector gram_eigs = symmetric_eigenvalues(gram_matrix(sensitivity, covariance));
  std::vector<TaggedEigenvalue> out;
  out.reserve(static_cast<std::size_t>(2 * gram_eigs.size()));
  // [[A,B],[B,A]] splits into eig(A+B) ∪ eig(A−B):
  //   A + B = 2λ₀I,  A − B = 4M − 2λ₀I.
  for (Index i = 0; i < gram_eigs.size(); ++i) {
    out.push_back({4.0 * gram_eigs[i] - 2.0 * lambda0, "4*lambda_i - 2*lambda0"});
  }
  for (Index i = 0; i < gram_eigs.size(); ++i) {
    out.push_back({2.0 * lambda0, "2*lambda0"});
  }
  std::sort(out.begin(), out.end(),
            [](const TaggedEigenvalue& a, const TaggedEigenvalue& b) {
              return a.value < b.value;
            });
  return out;
}

namespace {

SpectralReport analyze(const Matrix& sensitivity, const Matrix& covariance,
                       double lambda0, bool symmetric_split) {
  SpectralReport report;
  report.eigenvalues_predicted =
      symmetric_split ? predicted_eigs_symmetric(sensitivity, covariance, lambda0)
                      : predicted_eigs_asymmetric(sensitivity, covariance, lambda0);

  const Matrix p = symmetric_split
                       ? build_p_symmetric(sensitivity, covariance, lambda0)
                       : build_p_asymmetric(sensitivity, covariance, lambda0);
  const Vector direct = symmetric_eigenvalues(p);
  report.eigenvalues_direct.assign(direct.data(), direct.data() + direct.size());

  report.min_eigenvalue = direct.minCoeff();
  const double spectral_norm = direct.cwiseAbs().maxCoeff();
  report.is_positive_definite =
      report.min_eigenvalue > 1e-10 * std::max(spectral_norm, 1e-300);

  try {
    report.lambda0_admissible =
        symmetric_split ? lambda0_range_symmetric(sensitivity, covariance)
                        : lambda0_range_asymmetric(sensitivity, covariance);
  } catch (const NotPositiveDefinite&) {
    report.lambda0_admissible = std::nullopt;  // rank-deficient H: no valid weight
  }
  return report;
}

}  // namespace

SpectralReport analyze_symmetric(const Matrix& sensitivity,
                                 const Matrix& covariance, double lambda0) {
  return analyze(sensitivity, covariance, lambda0, true);
}

SpectralReport analyze_asymmetric(const Matrix& sensitivity,
                                  const Matrix& covariance, double lambda0) {
  return analyze(sensitivity, covariance, lambda0, false);
}

}  // namespace hedgekit::spectral
