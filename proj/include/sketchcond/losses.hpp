#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "sketchcond/data_matrix.hpp"

namespace sketchcond {

/// A scalar loss phi_y(z) with its curvature constants on predictions z in [-1, 1]:
/// alpha <= phi'' <= beta and |phi'| <= rho. Exp-concavity modulus is alpha / rho^2.
struct LossSpec {
  using Scalar2 = double (*)(double y, double z);

  std::string name;
  Scalar2 value = nullptr;
  Scalar2 deriv = nullptr;
  Scalar2 second_deriv = nullptr;
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;

  double exp_concavity() const { return alpha / (rho * rho); }
};

/// phi_y(z) = (z - y)^2 / 2 with alpha = beta = 1 and rho = 2.
inline LossSpec square_loss() {
  LossSpec l;
  l.name = "square";
  l.value = [](double y, double z) { return 0.5 * (z - y) * (z - y); };
  l.deriv = [](double y, double z) { return z - y; };
  l.second_deriv = [](double, double) { return 1.0; };
  l.alpha = 1.0;
  l.beta = 1.0;
  l.rho = 2.0;
  return l;
}

/// phi_y(z) = log(1 + exp(-y z)) for y in {-1, +1}. alpha is the exact
/// infimum of phi'' on [-1, 1], attained at |z| = 1.
inline LossSpec logistic_loss() {
  LossSpec l;
  l.name = "logistic";
  l.value = [](double y, double z) {
    const double m = -y * z;
    return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  };
  l.deriv = [](double y, double z) {
    // -y * sigmoid(-y z)
    const double m = -y * z;
    const double s = m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
    return -y * s;
  };
  l.second_deriv = [](double y, double z) {
    const double m = -y * z;
    const double s = m >= 0.0 ? 1.0 / (1.0 + std::exp(-m)) : std::exp(m) / (1.0 + std::exp(m));
    return y * y * s * (1.0 - s);
  };
  constexpr double e = std::numbers::e;
  l.alpha = e / ((1.0 + e) * (1.0 + e));
  l.beta = 0.25;
  l.rho = 1.0;
  return l;
}

/// Loss by CLI name: "square" or "logistic".
inline LossSpec loss_by_name(std::string_view name) {
  if (name == "square") return square_loss();
  if (name == "logistic") return logistic_loss();
  throw PreconditionError("unknown loss '" + std::string(name) + "' (expected square or logistic)");
}

/// Regularized loss minimization over the centered ball of diameter radius_B:
/// minimize (1/n) sum_i phi_{y_i}(w^T x_i) + (lambda/2) |w|^2, x_i = sqrt(n) a_i.
struct RLMProblem {
  DataMatrix a;
  Vector labels;
  double lambda = 0.0;
  double radius_B = 0.0;  ///< diameter of the feasible ball
  LossSpec loss;

  RLMProblem(DataMatrix a_, Vector labels_, double lambda_, double radius_B_, LossSpec loss_)
      : a(std::move(a_)), labels(std::move(labels_)), lambda(lambda_), radius_B(radius_B_), loss(std::move(loss_)) {
    detail::require(a.scaled(), "RLM problem expects the scaled data matrix");
    detail::require(labels.size() == a.rows(), "label length does not match the data row count");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("RLM lambda must be positive");
    if (!(radius_B > 0.0)) throw DomainError("RLM diameter B must be positive");
  }

  Index n() const { return a.rows(); }
  Index d() const { return a.cols(); }
  double ball_radius() const { return 0.5 * radius_B; }

  RLMProblem with_lambda(double new_lambda) const { return RLMProblem(a, labels, new_lambda, radius_B, loss); }
};

/// Predictions z_i = w^T x_i.
inline Vector predictions(const RLMProblem& p, const Vector& w) {
  detail::require(w.size() == p.d(), "weight dimension mismatch");
  return std::sqrt(static_cast<double>(p.n())) * p.a.multiply(w);
}

inline double max_abs_prediction(const RLMProblem& p, const Vector& w) {
  return predictions(p, w).cwiseAbs().maxCoeff();
}

inline double rlm_value(const RLMProblem& p, const Vector& w) {
  const Vector z = predictions(p, w);
  double sum = 0.0;
  for (Index i = 0; i < z.size(); ++i) sum += p.loss.value(p.labels(i), z(i));
  return sum / static_cast<double>(p.n()) + 0.5 * p.lambda * w.squaredNorm();
}

inline Vector rlm_gradient(const RLMProblem& p, const Vector& w) {
  const Vector z = predictions(p, w);
  Vector g(z.size());
  for (Index i = 0; i < z.size(); ++i) g(i) = p.loss.deriv(p.labels(i), z(i));
  // (1/n) sum_i phi'_i x_i = A^T phi' / sqrt(n)
  return p.a.multiply_transpose(g) / std::sqrt(static_cast<double>(p.n())) + p.lambda * w;
}

/// (alpha/2) (w - w_hat)^T (C_hat + (lambda/alpha) I) (w - w_hat): the
/// strong-convexity lower bound on rlm_value(w) - rlm_value(w_hat) at the minimizer.
inline double strong_convexity_gap(const RLMProblem& p, const Vector& w, const Vector& w_hat) {
  const Vector diff = w - w_hat;
  return 0.5 * p.loss.alpha * p.a.multiply(diff).squaredNorm() + 0.5 * p.lambda * diff.squaredNorm();
}

}  // namespace sketchcond
