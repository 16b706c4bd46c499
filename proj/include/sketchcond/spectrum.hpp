#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sketchcond/data_matrix.hpp"

namespace sketchcond {

/// Eigenvalues of a symmetric PSD matrix, sorted descending.
///
/// Solvers emit tiny negative values for PSD inputs; anything within
/// 1e-10 * max|lambda| of zero is clamped to zero, larger negatives are rejected.
class SymmetricSpectrum {
 public:
  static constexpr double kNegativeClamp = 1e-10;

  static SymmetricSpectrum from_values(std::vector<double> values) {
    detail::require(!values.empty(), "spectrum needs at least one eigenvalue");
    double scale = 0.0;
    for (double v : values) {
      detail::require_domain(std::isfinite(v), "non-finite eigenvalue");
      scale = std::max(scale, std::abs(v));
    }
    for (double& v : values) {
      if (v < 0.0) {
        if (v < -kNegativeClamp * scale) throw DomainError("spectrum has a significantly negative eigenvalue");
        v = 0.0;
      }
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    return SymmetricSpectrum(std::move(values));
  }

  const std::vector<double>& eigenvalues() const { return values_; }
  Index size() const { return static_cast<Index>(values_.size()); }
  double largest() const { return values_.front(); }

  /// Number of eigenvalues above `tol * largest()`.
  Index rank(double tol = 1e-12) const {
    const double cut = tol * values_.front();
    return static_cast<Index>(std::count_if(values_.begin(), values_.end(), [&](double v) { return v > cut; }));
  }

 private:
  explicit SymmetricSpectrum(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

inline SymmetricSpectrum symmetric_spectrum(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  const Vector& ev = es.eigenvalues();
  return SymmetricSpectrum::from_values(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

/// Spectrum of the empirical covariance A^T A.
inline SymmetricSpectrum covariance_spectrum(const DataMatrix& a) { return symmetric_spectrum(a.gram()); }

/// d_lambda = sum_i lambda_i / (lambda_i + lambda).
inline double effective_dimension(const SymmetricSpectrum& spectrum, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("effective dimension needs lambda > 0");
  double sum = 0.0;
  for (double v : spectrum.eigenvalues()) sum += v / (v + lambda);
  return sum;
}

}  // namespace sketchcond
