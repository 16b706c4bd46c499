#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

#include "sketchcond/data_matrix.hpp"

namespace sketchcond {

/// Minimizer of 1/2 w^T H w - g^T w over the Euclidean ball |w| <= radius,
/// for symmetric positive definite H.
///
/// Uses one eigendecomposition H = Q diag(h) Q^T; if the unconstrained
/// solution is infeasible the multiplier mu > 0 solving |(H + mu I)^{-1} g| = radius
/// is found by bisection.
struct BallQuadraticSolution {
  Vector w;
  double multiplier = 0.0;
  bool on_boundary = false;
};

inline BallQuadraticSolution minimize_quadratic_on_ball(const Matrix& h, const Vector& g, double radius) {
  detail::require(h.rows() == h.cols() && h.rows() == g.size(), "dimension mismatch in ball-constrained quadratic");
  detail::require(radius > 0.0, "ball radius must be positive");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed in ball-constrained quadratic");
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw NumericalError("quadratic is not positive definite");
  const Vector c = es.eigenvectors().transpose() * g;

  auto norm_at = [&](double mu) { return (c.array() / (ev.array() + mu)).matrix().norm(); };

  BallQuadraticSolution out;
  if (norm_at(0.0) <= radius) {
    out.w = es.eigenvectors() * (c.array() / ev.array()).matrix();
    return out;
  }
  double lo = 0.0;
  double hi = c.norm() / radius;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > radius) lo = mid;
    else hi = mid;
  }
  out.multiplier = hi;
  out.on_boundary = true;
  out.w = es.eigenvectors() * (c.array() / (ev.array() + hi)).matrix();
  return out;
}

/// Exact minimizer of 1/2 |A w - b|^2 + (lambda/2) |w|^2 over |w| <= radius.
inline BallQuadraticSolution exact_ridge(const DataMatrix& a, const Vector& b, double lambda, double radius) {
  detail::require(b.size() == a.rows(), "label length does not match the data row count");
  Matrix h = a.gram();
  h.diagonal().array() += lambda;
  return minimize_quadratic_on_ball(h, a.multiply_transpose(b), radius);
}

}  // namespace sketchcond
