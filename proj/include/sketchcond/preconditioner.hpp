#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <memory>
#include <mutex>
#include <variant>

#include "sketchcond/overestimates.hpp"
#include "sketchcond/spectral_check.hpp"

namespace sketchcond {

/// Triangular factor R with R^T R = A^T S^T S A + lambda I, used as the change of
/// variables w_tilde = R w. Immutable; the eigendecomposition needed by the
/// ellipsoid projection is computed once on first use.
class Preconditioner {
 public:
  /// Factors M = (SA)^T (SA) + lambda I for the given sketch.
  static Preconditioner from_sketch(const DataMatrix& a, const SamplingMatrix& s, double lambda) {
    detail::require_lambda(lambda);
    detail::require(s.source_rows == a.rows(), "sampling matrix does not match the data row count");
    const Index d = a.cols();
    if (a.is_sparse()) {
      const SparseRowMatrix w = a.weighted_rows_sparse(s.indices, s.weights);
      SparseColMatrix m = SparseColMatrix(w.transpose() * w);
      SparseColMatrix ridge(d, d);
      ridge.setIdentity();
      m = m + lambda * ridge;
      Eigen::SimplicialLLT<SparseColMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>> llt(m);
      if (llt.info() != Eigen::Success) throw NumericalError("sparse Cholesky of the preconditioner failed");
      SparseColMatrix r = llt.matrixU();
      return Preconditioner(Factor(std::move(r)), Matrix(m), lambda, s);
    }
    Matrix m = sketched_gram(a, s);
    m.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw NumericalError("Cholesky of the preconditioner failed");
    Matrix r = llt.matrixU();
    return Preconditioner(Factor(std::move(r)), std::move(m), lambda, s);
  }

  Index dim() const { return gram_.rows(); }
  double lambda() const { return lambda_; }
  double source_eps() const { return sketch_.eps; }
  const SamplingMatrix& sketch() const { return sketch_; }

  /// M = R^T R.
  const Matrix& gram() const { return gram_; }

  Matrix factor() const {
    return std::visit([](const auto& r) -> Matrix { return Matrix(r); }, factor_);
  }

  /// R w
  Vector apply(const Vector& w) const {
    return std::visit([&](const auto& r) -> Vector { return r.template triangularView<Eigen::Upper>() * w; }, factor_);
  }

  /// R^{-1} v
  Vector apply_inverse(const Vector& v) const {
    return std::visit([&](const auto& r) -> Vector { return r.template triangularView<Eigen::Upper>().solve(v); }, factor_);
  }

  /// R^{-T} g
  Vector apply_inverse_transpose(const Vector& g) const {
    return std::visit(
        [&](const auto& r) -> Vector { return r.transpose().template triangularView<Eigen::Lower>().solve(g); }, factor_);
  }

  /// R^T v
  Vector apply_transpose(const Vector& v) const {
    return std::visit([&](const auto& r) -> Vector { return r.transpose().template triangularView<Eigen::Lower>() * v; },
                      factor_);
  }

  const Eigen::SelfAdjointEigenSolver<Matrix>& eigen() const {
    std::call_once(lazy_->once, [&] {
      lazy_->solver.compute(gram_);
      if (lazy_->solver.info() != Eigen::Success) throw NumericalError("eigensolver failed on the preconditioner");
    });
    return lazy_->solver;
  }

 private:
  using Factor = std::variant<Matrix, SparseColMatrix>;
  struct Lazy {
    std::once_flag once;
    Eigen::SelfAdjointEigenSolver<Matrix> solver;
  };

  Preconditioner(Factor f, Matrix gram, double lambda, SamplingMatrix sketch)
      : factor_(std::move(f)), gram_(std::move(gram)), lambda_(lambda), sketch_(std::move(sketch)),
        lazy_(std::make_shared<Lazy>()) {}

  Factor factor_;
  Matrix gram_;
  double lambda_;
  SamplingMatrix sketch_;
  std::shared_ptr<Lazy> lazy_;
};

/// Sketch A with leverage-score sampling at eps = 1/2 and factor the result.
/// Retries with a fresh seed if the factorization fails.
inline Preconditioner build_preconditioner(const DataMatrix& a, double lambda, const SamplerConfig& cfg) {
  detail::require_lambda(lambda);
  cfg.validate();
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t seed = derive_seed(cfg.rng_seed, 100 + attempt);
    try {
      const LeverageEstimates u = compute_overestimates(a, lambda, cfg.with_seed(derive_seed(seed, 1)));
      const SamplingMatrix s = sample(u, 0.5, cfg.with_seed(derive_seed(seed, 2)));
      return Preconditioner::from_sketch(a, s, lambda);
    } catch (const NumericalError&) {
      if (attempt == 3) throw;
    }
  }
}

/// Euclidean projection of v onto the ellipsoid {R w : |w| <= B/2}.
///
/// With z = R w the optimality condition reads (M + mu I) w = R^T v for the
/// multiplier mu >= 0; mu is found by bisection on |w(mu)| = B/2 using the
/// eigendecomposition of M. The returned point satisfies |R^{-1} z| <= B/2.
inline Vector project_ball_in_M_norm(const Vector& v, const Preconditioner& p, double diameter) {
  detail::require(v.size() == p.dim(), "projection dimension mismatch");
  detail::require(diameter > 0.0, "projection diameter must be positive");
  const double radius = 0.5 * diameter;
  if (p.apply_inverse(v).norm() <= radius) return v;

  const auto& es = p.eigen();
  const Vector& ev = es.eigenvalues();
  const Vector c = es.eigenvectors().transpose() * p.apply_transpose(v);
  auto norm_at = [&](double mu) { return (c.array() / (ev.array() + mu)).matrix().norm(); };

  double lo = 0.0;
  double hi = c.norm() / radius;
  const double tol = 1e-10 * diameter;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (norm_at(mid) > radius) lo = mid;
    else hi = mid;
    if (radius - norm_at(hi) <= tol) break;
  }
  const Vector w = es.eigenvectors() * (c.array() / (ev.array() + hi)).matrix();
  return p.apply(w);
}

}  // namespace sketchcond
