#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "sketchcond/effdim.hpp"
#include "sketchcond/losses.hpp"
#include "sketchcond/preconditioner.hpp"

namespace sketchcond {

struct SolveReport {
  int iterations = 0;            ///< total projected-gradient steps
  double final_gap_bound = 0.0;  ///< certified upper bound on the suboptimality
  int inner_epochs = 0;          ///< PPA epochs (1 for a plain solve)
  int planned_epochs = 0;        ///< epoch count predicted by the PPA formula
  double lambda_inner = 0.0;
  double step_size = 0.0;        ///< final step in transformed coordinates
  std::chrono::duration<double> wall_time{0.0};
  std::vector<double> objective_trace;  ///< objective after each step (plain solves only)
};

/// Iteration cap reached; carries the best iterate found.
class SolverIterationError : public NumericalError {
 public:
  SolverIterationError(const std::string& what, Vector best, SolveReport report)
      : NumericalError(what), best_(std::move(best)), report_(std::move(report)) {}
  const Vector& best() const { return best_; }
  const SolveReport& report() const { return report_; }

 private:
  Vector best_;
  SolveReport report_;
};

struct GdOptions {
  int max_iterations = 10000;
  /// Halve the step whenever the descent inequality fails. Never triggers when
  /// the preconditioner is a (lambda, 1/2)-approximation.
  bool backtracking = true;
  bool record_trace = false;
};

/// Step size in transformed coordinates. With a (lambda, 1/2)-approximation
/// R^T R <= A^T A + lambda I <= 3 R^T R, so the transformed Hessian is bounded
/// by 3 max(beta, 1).
inline double transformed_step(const LossSpec& loss) { return 1.0 / (3.0 * std::max(loss.beta, 1.0)); }

namespace detail {

struct ShiftedObjective {
  const RLMProblem& p;
  double shift = 0.0;  ///< lambda' - lambda
  Vector center;

  double value(const Vector& w) const {
    double v = rlm_value(p, w);
    if (shift > 0.0) v += 0.5 * shift * (w - center).squaredNorm();
    return v;
  }
  Vector gradient(const Vector& w) const {
    Vector g = rlm_gradient(p, w);
    if (shift > 0.0) g += shift * (w - center);
    return g;
  }
};

struct GdOutcome {
  Vector w;
  int iterations = 0;
  double gap_bound = 0.0;
  double step = 0.0;
  std::vector<double> trace;
};

/// Projected GD in the coordinates w_tilde = R w. Stops once the gradient mapping
/// G certifies F(w) - min <= |G|^2 / (2 mu), mu being the transformed strong
/// convexity modulus. With rel_factor > 0 the target becomes
/// max(tol, rel_factor * (eta/2) |G_1|^2), a certified fraction of the initial gap.
inline GdOutcome projected_gd(const ShiftedObjective& f, const Preconditioner& pc, const Vector& w_start, double mu,
                              double tol, double rel_factor, const GdOptions& opts) {
  const double diameter = f.p.radius_B;
  GdOutcome out;
  double eta = transformed_step(f.p.loss);
  Vector w = w_start;
  Vector x = pc.apply(w);
  double value = f.value(w);
  Vector grad = f.gradient(w);
  double target = tol;
  double best_value = value;
  Vector best = w;

  while (out.iterations < opts.max_iterations) {
    const Vector g_t = pc.apply_inverse_transpose(grad);
    const Vector x_next = project_ball_in_M_norm(x - eta * g_t, pc, diameter);
    const Vector w_next = pc.apply_inverse(x_next);
    const double value_next = f.value(w_next);
    ++out.iterations;

    const Vector dx = x_next - x;
    const double model = value + grad.dot(w_next - w) + dx.squaredNorm() / (2.0 * eta);
    if (opts.backtracking && value_next > model + 1e-13 * std::max(1.0, std::abs(value))) {
      eta *= 0.5;
      continue;
    }

    const double g_norm2 = dx.squaredNorm() / (eta * eta);
    const double cert = g_norm2 / (2.0 * mu);
    if (out.iterations == 1 && rel_factor > 0.0) target = std::max(tol, rel_factor * 0.5 * eta * g_norm2);

    x = x_next;
    w = w_next;
    value = value_next;
    grad = f.gradient(w);
    if (opts.record_trace) out.trace.push_back(value);
    if (value < best_value) {
      best_value = value;
      best = w;
    }
    if (cert <= target) {
      out.w = std::move(w);
      out.gap_bound = cert;
      out.step = eta;
      return out;
    }
  }
  SolveReport r;
  r.iterations = out.iterations;
  r.step_size = eta;
  throw SolverIterationError("projected gradient descent hit its iteration cap", std::move(best), std::move(r));
}

/// Strong convexity of the objective with regularization lambda_total, measured
/// against the preconditioner's metric R^T R, assuming the (lambda_p, 1/2) sandwich.
inline double transformed_strong_convexity(const LossSpec& loss, double lambda_total, double lambda_p) {
  return std::min(loss.alpha, lambda_total / lambda_p);
}

}  // namespace detail

/// Sketch-to-precondition projected gradient descent started at w = 0.
/// P must have been built for p.lambda.
inline std::pair<Vector, SolveReport> preconditioned_gd(const RLMProblem& p, const Preconditioner& pc, double tol,
                                                        const GdOptions& opts = {}) {
  detail::require(pc.dim() == p.d(), "preconditioner dimension mismatch");
  if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
  const auto start = std::chrono::steady_clock::now();
  const detail::ShiftedObjective f{p, 0.0, Vector::Zero(p.d())};
  const double mu = detail::transformed_strong_convexity(p.loss, p.lambda, pc.lambda());
  detail::GdOutcome g = detail::projected_gd(f, pc, Vector::Zero(p.d()), mu, tol, 0.0, opts);
  SolveReport r;
  r.iterations = g.iterations;
  r.final_gap_bound = g.gap_bound;
  r.inner_epochs = 1;
  r.planned_epochs = 1;
  r.lambda_inner = pc.lambda();
  r.step_size = g.step;
  r.objective_trace = std::move(g.trace);
  r.wall_time = std::chrono::steady_clock::now() - start;
  return {std::move(g.w), std::move(r)};
}

/// Epoch count ceil((lambda'/lambda) log(dF0/eps)) with dF0 bounded by
/// |grad F(0)|^2 / (2 lambda). At least one epoch.
inline int ppa_epoch_count(const RLMProblem& p, double lambda_inner, double eps) {
  const double g0 = rlm_gradient(p, Vector::Zero(p.d())).squaredNorm();
  const double df0 = g0 / (2.0 * p.lambda);
  if (!(df0 > eps)) return 1;
  return std::max(1, static_cast<int>(std::ceil((lambda_inner / p.lambda) * std::log(df0 / eps))));
}

/// Proximal point outer loop: epoch t minimizes
/// F_lambda(w) + ((lambda' - lambda)/2)|w - w_{t-1}|^2 to relative accuracy
/// c lambda / lambda' (c = 1/4) with one preconditioner built at lambda'.
inline std::pair<Vector, SolveReport> ppa_solve(const RLMProblem& p, double lambda_inner, double eps,
                                                const SamplerConfig& cfg, const GdOptions& opts = {}) {
  if (!(lambda_inner >= p.lambda)) throw DomainError("lambda_inner must be at least lambda");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const auto start = std::chrono::steady_clock::now();
  const Preconditioner pc = build_preconditioner(p.a, lambda_inner, cfg);

  SolveReport r;
  r.lambda_inner = lambda_inner;
  if (lambda_inner == p.lambda) {
    auto [w, inner] = preconditioned_gd(p, pc, eps, opts);
    inner.wall_time = std::chrono::steady_clock::now() - start;
    return {std::move(w), std::move(inner)};
  }

  constexpr double kInnerConstant = 0.25;
  const double shift = lambda_inner - p.lambda;
  const double ratio = p.lambda / lambda_inner;
  const double mu_inner = detail::transformed_strong_convexity(p.loss, lambda_inner, lambda_inner);
  const double mu_outer = detail::transformed_strong_convexity(p.loss, p.lambda, lambda_inner);
  const double inner_floor = 1e-3 * eps * ratio;
  r.planned_epochs = ppa_epoch_count(p, lambda_inner, eps);
  const int epoch_cap = 4 * r.planned_epochs;

  Vector w = Vector::Zero(p.d());
  GdOptions inner_opts = opts;
  inner_opts.record_trace = false;
  for (;;) {
    const detail::ShiftedObjective f{p, shift, w};
    detail::GdOutcome g = detail::projected_gd(f, pc, w, mu_inner, inner_floor, kInnerConstant * ratio, inner_opts);
    r.iterations += g.iterations;
    r.step_size = g.step;
    w = std::move(g.w);
    ++r.inner_epochs;
    if (r.inner_epochs < r.planned_epochs) continue;

    // Certify the unshifted objective with one projected step.
    const detail::ShiftedObjective plain{p, 0.0, Vector::Zero(p.d())};
    GdOptions one = inner_opts;
    one.max_iterations = 1;
    try {
      detail::GdOutcome c = detail::projected_gd(plain, pc, w, mu_outer, eps, 0.0, one);
      r.iterations += c.iterations;
      w = std::move(c.w);
      r.final_gap_bound = c.gap_bound;
      break;
    } catch (const SolverIterationError& e) {
      r.iterations += e.report().iterations;
      if (plain.value(e.best()) <= plain.value(w)) w = e.best();
      if (r.inner_epochs >= epoch_cap) {
        const Vector gt = pc.apply_inverse_transpose(plain.gradient(w));
        const Vector x = pc.apply(w);
        const double eta = transformed_step(p.loss);
        const Vector xn = project_ball_in_M_norm(x - eta * gt, pc, p.radius_B);
        r.final_gap_bound = (x - xn).squaredNorm() / (eta * eta) / (2.0 * mu_outer);
        break;
      }
    }
  }
  r.wall_time = std::chrono::steady_clock::now() - start;
  return {std::move(w), std::move(r)};
}

struct AutoSolveReport {
  SolveReport solve;
  TuneResult tuning;
};

/// Tunes lambda' with the effective-dimension verifier, then runs PPA at lambda'.
inline std::pair<Vector, AutoSolveReport> solve_auto(const RLMProblem& p, double eps, const SamplerConfig& cfg,
                                                     const GdOptions& opts = {}) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  AutoSolveReport out;
  out.tuning = tune_lambda(p.a, p.lambda, cfg.with_seed(derive_seed(cfg.rng_seed, 7)));
  auto [w, r] = ppa_solve(p, out.tuning.lambda, eps, cfg, opts);
  out.solve = std::move(r);
  return {std::move(w), std::move(out)};
}

inline void to_json(nlohmann::json& j, const SolveReport& r) {
  j = nlohmann::json{{"iterations", r.iterations},
                     {"final_gap_bound", r.final_gap_bound},
                     {"inner_epochs", r.inner_epochs},
                     {"planned_epochs", r.planned_epochs},
                     {"lambda_inner", r.lambda_inner},
                     {"step_size", r.step_size}};
}

}  // namespace sketchcond
