#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "sketchcond/error.hpp"

namespace sketchcond {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

enum class Scaling { Raw, Scaled };

/// Column count up to which triplet input is stored densely.
inline constexpr Index kDefaultDenseMaxCols = 512;

/// An n x d design, either the raw instances X or the scaled A = n^{-1/2} X.
///
/// Storage is dense (column-major) or compressed-row sparse. Instances are
/// immutable; every operation returns new values.
class DataMatrix {
 public:
  static DataMatrix dense(Matrix values, Scaling scaling = Scaling::Raw) {
    return DataMatrix(Storage(std::move(values)), scaling);
  }

  static DataMatrix sparse(SparseRowMatrix values, Scaling scaling = Scaling::Raw) {
    values.makeCompressed();
    return DataMatrix(Storage(std::move(values)), scaling);
  }

  /// Builds from (row, col, value) triplets; duplicates are summed. Stored
  /// densely when d <= dense_max_cols, compressed-row otherwise.
  static DataMatrix from_triplets(Index n, Index d, const std::vector<Eigen::Triplet<double>>& triplets,
                                  Scaling scaling = Scaling::Raw, Index dense_max_cols = kDefaultDenseMaxCols) {
    detail::require(n >= 1 && d >= 1, "empty input: data matrix needs n >= 1 and d >= 1");
    for (const auto& t : triplets) {
      if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= d) {
        throw PreconditionError("triplet index out of range");
      }
    }
    if (d <= dense_max_cols) {
      Matrix m = Matrix::Zero(n, d);
      for (const auto& t : triplets) m(t.row(), t.col()) += t.value();
      return dense(std::move(m), scaling);
    }
    SparseRowMatrix s(n, d);
    s.setFromTriplets(triplets.begin(), triplets.end());
    return sparse(std::move(s), scaling);
  }

  Index rows() const {
    return std::visit([](const auto& m) -> Index { return m.rows(); }, storage_);
  }
  Index cols() const {
    return std::visit([](const auto& m) -> Index { return m.cols(); }, storage_);
  }
  bool scaled() const { return scaling_ == Scaling::Scaled; }
  Scaling scaling() const { return scaling_; }
  bool is_sparse() const { return std::holds_alternative<SparseRowMatrix>(storage_); }

  /// Stored nonzeros: structural entries for sparse storage, nonzero values for dense.
  Index nnz() const { return nnz_; }

  const Matrix& dense_values() const { return std::get<Matrix>(storage_); }
  const SparseRowMatrix& sparse_values() const { return std::get<SparseRowMatrix>(storage_); }

  Matrix to_dense() const {
    if (is_sparse()) return Matrix(sparse_values());
    return dense_values();
  }

  /// A w
  Vector multiply(const Vector& w) const {
    detail::require(w.size() == cols(), "dimension mismatch in A*w");
    return std::visit([&](const auto& m) -> Vector { return m * w; }, storage_);
  }

  /// A^T v
  Vector multiply_transpose(const Vector& v) const {
    detail::require(v.size() == rows(), "dimension mismatch in A^T*v");
    return std::visit([&](const auto& m) -> Vector { return m.transpose() * v; }, storage_);
  }

  Vector row_squared_norms() const {
    if (is_sparse()) {
      const auto& s = sparse_values();
      Vector out(s.rows());
      for (Index i = 0; i < s.outerSize(); ++i) {
        double acc = 0.0;
        for (SparseRowMatrix::InnerIterator it(s, i); it; ++it) acc += it.value() * it.value();
        out(i) = acc;
      }
      return out;
    }
    return dense_values().rowwise().squaredNorm();
  }

  /// Dense copy of a single row.
  Vector row(Index i) const {
    if (is_sparse()) return Vector(sparse_values().row(i).transpose());
    return dense_values().row(i).transpose();
  }

  /// A^T A as a dense d x d matrix.
  Matrix gram() const {
    if (is_sparse()) {
      const auto& s = sparse_values();
      SparseColMatrix g = (s.transpose() * s).pruned();
      return Matrix(g);
    }
    const auto& a = dense_values();
    Matrix g = Matrix::Zero(a.cols(), a.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    return g.selfadjointView<Eigen::Lower>();
  }

  /// Dense s x d matrix whose k-th row is weights[k] * a_{rows[k]}.
  Matrix weighted_rows(std::span<const Index> row_ids, std::span<const double> weights) const {
    detail::require(row_ids.size() == weights.size(), "row/weight length mismatch");
    Matrix out = Matrix::Zero(static_cast<Index>(row_ids.size()), cols());
    for (std::size_t k = 0; k < row_ids.size(); ++k) {
      const Index i = row_ids[k];
      if (is_sparse()) {
        for (SparseRowMatrix::InnerIterator it(sparse_values(), i); it; ++it) {
          out(static_cast<Index>(k), it.col()) = weights[k] * it.value();
        }
      } else {
        out.row(static_cast<Index>(k)) = weights[k] * dense_values().row(i);
      }
    }
    return out;
  }

  /// Sparse s x d version of weighted_rows.
  SparseRowMatrix weighted_rows_sparse(std::span<const Index> row_ids, std::span<const double> weights) const {
    detail::require(row_ids.size() == weights.size(), "row/weight length mismatch");
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < row_ids.size(); ++k) {
      const Index i = row_ids[k];
      if (is_sparse()) {
        for (SparseRowMatrix::InnerIterator it(sparse_values(), i); it; ++it) {
          trip.emplace_back(static_cast<Index>(k), it.col(), weights[k] * it.value());
        }
      } else {
        for (Index j = 0; j < cols(); ++j) {
          const double v = dense_values()(i, j);
          if (v != 0.0) trip.emplace_back(static_cast<Index>(k), j, weights[k] * v);
        }
      }
    }
    SparseRowMatrix out(static_cast<Index>(row_ids.size()), cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
  }

  /// A with every row multiplied by `factor`; the scaling tag is set explicitly.
  DataMatrix rescaled(double factor, Scaling scaling) const {
    if (is_sparse()) return sparse(SparseRowMatrix(factor * sparse_values()), scaling);
    return dense(Matrix(factor * dense_values()), scaling);
  }

  /// [A | column] as a new matrix with the same scaling tag and storage kind.
  DataMatrix append_column(const Vector& column) const {
    detail::require(column.size() == rows(), "appended column length mismatch");
    if (is_sparse()) {
      const auto& s = sparse_values();
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(s.nonZeros() + s.rows()));
      for (Index i = 0; i < s.outerSize(); ++i) {
        for (SparseRowMatrix::InnerIterator it(s, i); it; ++it) trip.emplace_back(i, it.col(), it.value());
        if (column(i) != 0.0) trip.emplace_back(i, s.cols(), column(i));
      }
      SparseRowMatrix out(s.rows(), s.cols() + 1);
      out.setFromTriplets(trip.begin(), trip.end());
      return sparse(std::move(out), scaling_);
    }
    Matrix out(rows(), cols() + 1);
    out.leftCols(cols()) = dense_values();
    out.col(cols()) = column;
    return dense(std::move(out), scaling_);
  }

 private:
  using Storage = std::variant<Matrix, SparseRowMatrix>;

  DataMatrix(Storage storage, Scaling scaling) : storage_(std::move(storage)), scaling_(scaling) {
    detail::require(rows() >= 1 && cols() >= 1, "empty input: data matrix needs n >= 1 and d >= 1");
    if (is_sparse()) {
      nnz_ = sparse_values().nonZeros();
    } else {
      nnz_ = (dense_values().array() != 0.0).count();
    }
  }

  Storage storage_;
  Scaling scaling_;
  Index nnz_ = 0;
};

/// Multiplies every row of the raw design by n^{-1/2}.
inline DataMatrix scale_rows(const DataMatrix& raw) {
  detail::require(!raw.scaled(), "scale_rows expects an unscaled matrix");
  return raw.rescaled(1.0 / std::sqrt(static_cast<double>(raw.rows())), Scaling::Scaled);
}

/// Recovers the raw instances X = sqrt(n) A.
inline DataMatrix unscale_rows(const DataMatrix& scaled) {
  detail::require(scaled.scaled(), "unscale_rows expects a scaled matrix");
  return scaled.rescaled(std::sqrt(static_cast<double>(scaled.rows())), Scaling::Raw);
}

}  // namespace sketchcond
