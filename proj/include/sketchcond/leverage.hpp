#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "sketchcond/data_matrix.hpp"

namespace sketchcond {

enum class EstimateKind { Exact, Overestimate };

/// Per-row ridge leverage scores tau_{lambda,i} = a_i^T (A^T A + lambda I)^{-1} a_i,
/// or overestimates of them.
struct LeverageEstimates {
  double lambda = 0.0;
  std::vector<double> values;
  EstimateKind kind = EstimateKind::Overestimate;
  Index dim = 0;  ///< column count of the matrix the scores refer to

  Index size() const { return static_cast<Index>(values.size()); }
  double total() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

namespace detail {

inline void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("ridge parameter must be positive and finite");
}

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// a_i^T G^{-1} a_i for every row of A, with G = W^T W + lambda I factored in d x d.
inline Vector quadratic_forms_primal_dense(const DataMatrix& a, const Matrix& gram_plus_ridge) {
  Eigen::LLT<Matrix> llt(gram_plus_ridge);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of A^T S^T S A + lambda I failed");
  Matrix at = a.to_dense().transpose();
  llt.matrixL().solveInPlace(at);
  return at.colwise().squaredNorm().transpose();
}

inline Vector quadratic_forms_primal_sparse(const DataMatrix& a, const SparseColMatrix& gram_plus_ridge) {
  Eigen::SimplicialLLT<SparseColMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(gram_plus_ridge);
  if (llt.info() != Eigen::Success) throw NumericalError("sparse Cholesky of A^T S^T S A + lambda I failed");
  // Dense right-hand sides in row blocks bound the memory by d x block.
  constexpr Index kBlock = 256;
  const SparseRowMatrix& rows = a.sparse_values();
  Vector out(a.rows());
  for (Index start = 0; start < a.rows(); start += kBlock) {
    const Index len = std::min(kBlock, a.rows() - start);
    Matrix rhs = Matrix(rows.middleRows(start, len).transpose());
    llt.matrixL().solveInPlace(rhs);
    out.segment(start, len) = rhs.colwise().squaredNorm().transpose();
  }
  return out;
}

// Woodbury form: a^T (W^T W + lambda I)^{-1} a = (|a|^2 - (W a)^T (W W^T + lambda I)^{-1} (W a)) / lambda.
inline Vector quadratic_forms_dual(const DataMatrix& a, const Matrix& weighted, double lambda) {
  const Index s = weighted.rows();
  Matrix inner = weighted * weighted.transpose();
  inner.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of S A A^T S^T + lambda I failed");
  Matrix v(s, a.rows());
  if (a.is_sparse()) {
    v = weighted * a.sparse_values().transpose();
  } else {
    v.noalias() = weighted * a.dense_values().transpose();
  }
  llt.matrixL().solveInPlace(v);
  const Vector norms = a.row_squared_norms();
  Vector out = (norms - v.colwise().squaredNorm().transpose()) / lambda;
  return out.cwiseMax(0.0);
}

}  // namespace detail

/// How sketched_quadratic_forms factors the regularized Gram matrix.
enum class QuadraticFormRoute { Automatic, Primal, Dual };

/// q_i = a_i^T (A^T S^T S A + lambda I)^{-1} a_i for every row i of A, where the
/// sketch keeps rows `row_ids` with weights `weights`.
///
/// The primal route factors the d x d matrix; the dual route factors the
/// s x s matrix S A A^T S^T + lambda I and is used automatically when
/// fewer than d/2 rows are kept.
inline Vector sketched_quadratic_forms(const DataMatrix& a, std::span<const Index> row_ids,
                                       std::span<const double> weights, double lambda,
                                       QuadraticFormRoute route = QuadraticFormRoute::Automatic) {
  detail::require_lambda(lambda);
  const Index s = static_cast<Index>(row_ids.size());
  const Index d = a.cols();
  if (route == QuadraticFormRoute::Automatic) {
    route = (2 * s < d) ? QuadraticFormRoute::Dual : QuadraticFormRoute::Primal;
  }
  if (s == 0) return a.row_squared_norms() / lambda;
  if (route == QuadraticFormRoute::Dual) {
    return detail::quadratic_forms_dual(a, a.weighted_rows(row_ids, weights), lambda);
  }
  if (a.is_sparse()) {
    const SparseRowMatrix w = a.weighted_rows_sparse(row_ids, weights);
    SparseColMatrix g = SparseColMatrix(w.transpose() * w);
    SparseColMatrix ridge(d, d);
    ridge.setIdentity();
    g = g + lambda * ridge;
    return detail::quadratic_forms_primal_sparse(a, g);
  }
  const Matrix w = a.weighted_rows(row_ids, weights);
  Matrix g = Matrix::Zero(d, d);
  g.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
  g.diagonal().array() += lambda;
  return detail::quadratic_forms_primal_dense(a, g);
}

/// Exact ridge leverage scores via one Cholesky factorization of A^T A + lambda I.
inline LeverageEstimates ridge_leverage_scores_exact(const DataMatrix& a, double lambda) {
  detail::require(a.scaled(), "leverage scores expect the scaled data matrix");
  detail::require_lambda(lambda);
  Vector q;
  if (a.is_sparse()) {
    std::vector<Index> all(static_cast<std::size_t>(a.rows()));
    std::iota(all.begin(), all.end(), Index{0});
    std::vector<double> ones(all.size(), 1.0);
    q = sketched_quadratic_forms(a, all, ones, lambda, QuadraticFormRoute::Primal);
  } else {
    Matrix g = a.gram();
    g.diagonal().array() += lambda;
    q = detail::quadratic_forms_primal_dense(a, g);
  }
  LeverageEstimates out;
  out.lambda = lambda;
  out.kind = EstimateKind::Exact;
  out.dim = a.cols();
  out.values.resize(static_cast<std::size_t>(q.size()));
  for (Index i = 0; i < q.size(); ++i) out.values[static_cast<std::size_t>(i)] = detail::clamp_unit(q(i));
  return out;
}

}  // namespace sketchcond
