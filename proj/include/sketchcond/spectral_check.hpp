#pragma once

#include <Eigen/Eigenvalues>

#include "sketchcond/data_matrix.hpp"
#include "sketchcond/sampling.hpp"

namespace sketchcond {

/// Extreme generalized eigenvalues of the pencil
/// ((SA)^T SA + lambda I, A^T A + lambda I).
struct SpectralRatio {
  double min = 0.0;
  double max = 0.0;
};

inline Matrix sketched_gram(const DataMatrix& a, const SamplingMatrix& s) {
  const Matrix w = a.weighted_rows(s.indices, s.weights);
  Matrix g = Matrix::Zero(a.cols(), a.cols());
  if (w.rows() > 0) {
    g.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
    g = g.selfadjointView<Eigen::Lower>();
  }
  return g;
}

inline SpectralRatio spectral_ratio(const DataMatrix& a, const SamplingMatrix& s, double lambda) {
  detail::require_lambda(lambda);
  detail::require(s.source_rows == a.rows(), "sampling matrix does not match the data row count");
  s.validate();
  Matrix sketched = sketched_gram(a, s);
  sketched.diagonal().array() += lambda;
  Matrix full = a.gram();
  full.diagonal().array() += lambda;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(sketched, full, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw NumericalError("generalized eigensolver failed");
  return {ges.eigenvalues().minCoeff(), ges.eigenvalues().maxCoeff()};
}

/// True iff ((1-eps)/(1+eps)) (A^T A + lambda I) <= (SA)^T SA + lambda I <= A^T A + lambda I
/// in the Loewner order, up to an absolute tolerance of 1e-9 on the pencil's
/// generalized eigenvalues.
inline bool check_spectral_approximation(const DataMatrix& a, const SamplingMatrix& s, double lambda, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("spectral approximation eps must lie in (0,1)");
  constexpr double tol = 1e-9;
  const SpectralRatio r = spectral_ratio(a, s, lambda);
  return r.min >= (1.0 - eps) / (1.0 + eps) - tol && r.max <= 1.0 + tol;
}

}  // namespace sketchcond
