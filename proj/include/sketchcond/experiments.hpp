#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "sketchcond/losses.hpp"
#include "sketchcond/random.hpp"
#include "sketchcond/ridge_exact.hpp"
#include "sketchcond/sampling.hpp"
#include "sketchcond/spectrum.hpp"

namespace sketchcond {

/// Compensated running sum.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return out;
  KahanSum s;
  for (double x : xs) s.add(x);
  out.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    KahanSum v;
    for (double x : xs) v.add((x - out.mean) * (x - out.mean));
    out.se = std::sqrt(v.value() / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

/// Eigenvalue profile of a population covariance:
/// polynomial lambda_i = C i^{-p}, exponential lambda_i = C e^{-i}, or an explicit list.
struct DecayProfile {
  enum class Kind { Polynomial, Exponential, Explicit };

  Kind kind = Kind::Polynomial;
  double C = 1.0;
  double p = 2.0;
  std::vector<double> values;  ///< explicit eigenvalues, descending
  Index d = 0;

  static DecayProfile polynomial(double C, double p, Index d) {
    DecayProfile out;
    out.kind = Kind::Polynomial;
    out.C = C;
    out.p = p;
    out.d = d;
    out.validate();
    return out;
  }
  static DecayProfile exponential(double C, Index d) {
    DecayProfile out;
    out.kind = Kind::Exponential;
    out.C = C;
    out.d = d;
    out.validate();
    return out;
  }
  static DecayProfile explicit_list(std::vector<double> eigenvalues) {
    DecayProfile out;
    out.kind = Kind::Explicit;
    out.d = static_cast<Index>(eigenvalues.size());
    out.values = std::move(eigenvalues);
    out.validate();
    return out;
  }

  void validate() const {
    detail::require(d >= 1, "profile dimension must be at least 1");
    switch (kind) {
      case Kind::Polynomial:
        if (!(C > 0.0)) throw DomainError("polynomial decay needs C > 0");
        if (!(p > 1.0)) throw DomainError("polynomial decay needs p > 1");
        break;
      case Kind::Exponential:
        if (!(C > 0.0)) throw DomainError("exponential decay needs C > 0");
        break;
      case Kind::Explicit:
        detail::require(static_cast<Index>(values.size()) == d, "explicit profile length mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
          if (!(values[i] >= 0.0)) throw DomainError("explicit eigenvalues must be nonnegative");
          if (i > 0 && values[i] > values[i - 1]) throw DomainError("explicit eigenvalues must be descending");
        }
        break;
    }
  }

  std::vector<double> eigenvalues() const {
    if (kind == Kind::Explicit) return values;
    std::vector<double> out(static_cast<std::size_t>(d));
    for (Index i = 1; i <= d; ++i) {
      const double x = static_cast<double>(i);
      out[static_cast<std::size_t>(i - 1)] = kind == Kind::Polynomial ? C * std::pow(x, -p) : C * std::exp(-x);
    }
    return out;
  }
};

inline double effective_dimension(const std::vector<double>& eigenvalues, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("effective dimension needs lambda > 0");
  KahanSum s;
  for (double v : eigenvalues) s.add(v / (v + lambda));
  return s.value();
}

/// Closed-form effective-dimension bound for a decay profile:
/// (C/((p-1) lambda))^{1/p} for polynomial decay and log(C/((e-1) lambda)) for
/// exponential decay (lambda <= C/(e-1)). Explicit profiles return the exact sum.
/// Both closed forms can undershoot the exact sum; see decay_effdim_safe_bound.
inline double decay_effdim_bound(const DecayProfile& profile, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("decay bound needs lambda > 0");
  profile.validate();
  switch (profile.kind) {
    case DecayProfile::Kind::Polynomial:
      return std::pow(profile.C / ((profile.p - 1.0) * lambda), 1.0 / profile.p);
    case DecayProfile::Kind::Exponential: {
      const double arg = profile.C / ((std::numbers::e - 1.0) * lambda);
      if (arg < 1.0) throw DomainError("exponential decay bound needs lambda <= C/(e-1)");
      return std::log(arg);
    }
    case DecayProfile::Kind::Explicit:
      break;
  }
  return effective_dimension(profile.values, lambda);
}

/// Upper bounds that hold for every profile dominated by the decay family:
/// (p/(p-1)) (C/lambda)^{1/p} and max(0, log(C/lambda)) + e/(e-1).
inline double decay_effdim_safe_bound(const DecayProfile& profile, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("decay bound needs lambda > 0");
  profile.validate();
  switch (profile.kind) {
    case DecayProfile::Kind::Polynomial:
      return profile.p / (profile.p - 1.0) * std::pow(profile.C / lambda, 1.0 / profile.p);
    case DecayProfile::Kind::Exponential:
      return std::max(0.0, std::log(profile.C / lambda)) + std::numbers::e / (std::numbers::e - 1.0);
    case DecayProfile::Kind::Explicit:
      break;
  }
  return effective_dimension(profile.values, lambda);
}

// ---------------------------------------------------------------------------
// Hard distribution: x = sqrt(d lambda_i) e_i with i uniform, and
// Pr[y = +-1 | i] = (1 +- sigma_i b)/2 with b = sqrt(d / (6 n)).

struct HardDistribution {
  std::vector<double> eigenvalues;
  std::vector<double> sigma;
  double b = 0.0;
  Index n_design = 0;

  Index d() const { return static_cast<Index>(eigenvalues.size()); }
  double support_scale(Index i) const {
    return std::sqrt(static_cast<double>(d()) * eigenvalues[static_cast<std::size_t>(i)]);
  }
};

/// n samples given as coordinate indices and labels.
struct HardSample {
  std::vector<Index> coord;
  Vector y;
};

inline HardDistribution make_hard_distribution(const DecayProfile& profile, Index n, const SamplerConfig& cfg) {
  profile.validate();
  detail::require(n >= 1, "sample size must be positive");
  HardDistribution hd;
  hd.eigenvalues = profile.eigenvalues();
  hd.n_design = n;
  hd.b = std::sqrt(static_cast<double>(profile.d) / (6.0 * static_cast<double>(n)));
  if (hd.b > 0.5) throw PreconditionError("hard distribution needs n >= 2d/3 so that b <= 1/2");
  Rng rng(derive_seed(cfg.rng_seed, 0x5167));
  hd.sigma.resize(hd.eigenvalues.size());
  for (double& s : hd.sigma) s = rng.sign();
  return hd;
}

inline HardSample sample_hard(const HardDistribution& hd, Index n, Rng& rng) {
  HardSample s;
  s.coord.resize(static_cast<std::size_t>(n));
  s.y.resize(n);
  const auto d = static_cast<std::uint64_t>(hd.d());
  for (Index j = 0; j < n; ++j) {
    const auto i = static_cast<Index>(rng.index(d));
    s.coord[static_cast<std::size_t>(j)] = i;
    const double p_plus = 0.5 * (1.0 + hd.sigma[static_cast<std::size_t>(i)] * hd.b);
    s.y(j) = rng.uniform() < p_plus ? 1.0 : -1.0;
  }
  return s;
}

/// Raw n x d design of a hard sample.
inline Matrix hard_design(const HardDistribution& hd, const HardSample& s) {
  Matrix x = Matrix::Zero(static_cast<Index>(s.coord.size()), hd.d());
  for (std::size_t j = 0; j < s.coord.size(); ++j) x(static_cast<Index>(j), s.coord[j]) = hd.support_scale(s.coord[j]);
  return x;
}

/// (w*_lambda)_i = (b/sqrt d) sqrt(lambda_i) / (lambda_i + lambda) sigma_i.
inline Vector optimal_ridge_predictor(const HardDistribution& hd, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("ridge predictor needs lambda > 0");
  const double scale = hd.b / std::sqrt(static_cast<double>(hd.d()));
  Vector w(hd.d());
  for (Index i = 0; i < hd.d(); ++i) {
    const double li = hd.eigenvalues[static_cast<std::size_t>(i)];
    w(i) = scale * std::sqrt(li) / (li + lambda) * hd.sigma[static_cast<std::size_t>(i)];
  }
  return w;
}

/// E[x y] = (b/sqrt d) sqrt(lambda_i) sigma_i.
inline Vector hard_cross_moment(const HardDistribution& hd) {
  const double scale = hd.b / std::sqrt(static_cast<double>(hd.d()));
  Vector v(hd.d());
  for (Index i = 0; i < hd.d(); ++i) {
    v(i) = scale * std::sqrt(hd.eigenvalues[static_cast<std::size_t>(i)]) * hd.sigma[static_cast<std::size_t>(i)];
  }
  return v;
}

/// Population square-loss risk F(w) = E[(w^T x - y)^2] / 2.
inline double population_risk(const HardDistribution& hd, const Vector& w) {
  detail::require(w.size() == hd.d(), "weight dimension mismatch");
  const Vector c = hard_cross_moment(hd);
  KahanSum s;
  for (Index i = 0; i < hd.d(); ++i) {
    s.add(0.5 * hd.eigenvalues[static_cast<std::size_t>(i)] * w(i) * w(i) - c(i) * w(i));
  }
  return s.value() + 0.5;
}

/// Gradient of F(w) + (lambda/2)|w|^2.
inline Vector population_ridge_gradient(const HardDistribution& hd, const Vector& w, double lambda) {
  Vector g = -hard_cross_moment(hd);
  for (Index i = 0; i < hd.d(); ++i) g(i) += (hd.eigenvalues[static_cast<std::size_t>(i)] + lambda) * w(i);
  return g;
}

struct LambdaStar {
  double lambda = 0.0;
  bool active = false;  ///< false: the norm constraint does not bind and lambda = 0
};

inline double ridge_predictor_norm(const HardDistribution& hd, double lambda) {
  KahanSum s;
  const double scale2 = hd.b * hd.b / static_cast<double>(hd.d());
  for (double li : hd.eigenvalues) {
    if (li > 0.0) s.add(scale2 * li / ((li + lambda) * (li + lambda)));
  }
  return std::sqrt(s.value());
}

/// The lambda* >= 0 with |w*_{lambda*}| = radius, found by bisection to
/// relative tolerance 1e-8. Inactive when |w*_0| <= radius.
inline LambdaStar calibrate_lambda_star(const HardDistribution& hd, double radius) {
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  LambdaStar out;
  if (ridge_predictor_norm(hd, 0.0) <= radius) return out;
  double hi = std::max(1e-300, *std::max_element(hd.eigenvalues.begin(), hd.eigenvalues.end()));
  while (ridge_predictor_norm(hd, hi) > radius) hi *= 2.0;
  double lo = hi * 0.5;
  while (lo > 0.0 && ridge_predictor_norm(hd, lo) <= radius) lo *= 0.5;
  for (int it = 0; it < 400 && hi - lo > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ridge_predictor_norm(hd, mid) > radius) lo = mid;
    else hi = mid;
  }
  out.lambda = 0.5 * (lo + hi);
  out.active = true;
  return out;
}

/// Population minimizer of F over the centered ball of the given radius.
inline Vector constrained_population_optimum(const HardDistribution& hd, double radius) {
  const LambdaStar ls = calibrate_lambda_star(hd, radius);
  if (ls.active) return optimal_ridge_predictor(hd, ls.lambda);
  const Vector c = hard_cross_moment(hd);
  Vector w = Vector::Zero(hd.d());
  for (Index i = 0; i < hd.d(); ++i) {
    const double li = hd.eigenvalues[static_cast<std::size_t>(i)];
    if (li > 0.0) w(i) = c(i) / li;
  }
  return w;
}

namespace detail {

/// Minimizer of sum_i (h_i w_i^2 / 2 - g_i w_i) over |w| <= radius for h >= 0
/// (g_i = 0 wherever h_i = 0).
inline Vector diagonal_ball_solve(const Vector& h, const Vector& g, double radius) {
  auto at = [&](double mu) {
    Vector w(h.size());
    for (Index i = 0; i < h.size(); ++i) w(i) = g(i) == 0.0 ? 0.0 : g(i) / (h(i) + mu);
    return w;
  };
  bool interior_ok = true;
  for (Index i = 0; i < h.size(); ++i) {
    if (h(i) <= 0.0 && g(i) != 0.0) interior_ok = false;
  }
  if (interior_ok) {
    Vector w = at(0.0);
    if (w.norm() <= radius) return w;
  }
  double lo = 0.0;
  double hi = g.norm() / radius;
  for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid).norm() > radius) lo = mid;
    else hi = mid;
  }
  return at(hi);
}

}  // namespace detail

/// Exact square-loss RLM on a hard sample:
/// min (1/n) sum (w^T x_j - y_j)^2 / 2 + (lambda/2)|w|^2 over |w| <= radius.
inline Vector hard_rlm_solution(const HardDistribution& hd, const HardSample& s, double lambda, double radius) {
  const double n = static_cast<double>(s.coord.size());
  Vector h = Vector::Constant(hd.d(), lambda);
  Vector g = Vector::Zero(hd.d());
  for (std::size_t j = 0; j < s.coord.size(); ++j) {
    const Index i = s.coord[j];
    const double xi = hd.support_scale(i);
    h(i) += xi * xi / n;
    g(i) += s.y(static_cast<Index>(j)) * xi / n;
  }
  return detail::diagonal_ball_solve(h, g, radius);
}

struct GammaResult {
  double gamma = 0.0;
  double lambda = 0.0;  ///< gamma / (n B^2)
  double effdim = 0.0;  ///< d_lambda of the profile
};

/// Smallest gamma on the grid {2^k 1e-6} with
/// d_{lambda(gamma)} - sum_i (lambda_i/(lambda_i + lambda(gamma)))^2 <= gamma,
/// lambda(gamma) = gamma / (n B^2).
inline GammaResult lower_bound_gamma(const DecayProfile& profile, Index n, double radius) {
  detail::require(n >= 1, "sample size must be positive");
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  const std::vector<double> eig = profile.eigenvalues();
  const double scale = static_cast<double>(n) * radius * radius;
  for (int k = 0;; ++k) {
    const double gamma = std::ldexp(1e-6, k);
    const double lam = gamma / scale;
    KahanSum lhs;
    for (double v : eig) {
      const double r = v / (v + lam);
      lhs.add(r - r * r);
    }
    if (lhs.value() <= gamma || k > 200) return {gamma, lam, effective_dimension(eig, lam)};
  }
}

// ---------------------------------------------------------------------------
// Stability audit.

struct StabilityRecord {
  Index index = 0;
  double delta_i = 0.0;
  double delta_np1 = 0.0;
  double tau_i = 0.0;
  double tau_np1 = 0.0;
  double bound_i = 0.0;
  double bound_np1 = 0.0;

  bool violated(double tol = 1e-10) const { return delta_i > bound_i + tol || delta_np1 > bound_np1 + tol; }
};

/// Replace-one stability terms of exact square-loss RLM against the leverage-score
/// bounds. tau_i uses the original sample and tau_{n+1} the sample with point i
/// replaced, both at lambda' = lambda / alpha.
inline std::vector<StabilityRecord> stability_audit(const RLMProblem& p, const Vector& x_new, double y_new,
                                                    const SamplerConfig& /*cfg*/) {
  detail::require(p.loss.name == "square", "stability audit needs the square loss (exact solver)");
  detail::require(x_new.size() == p.d(), "replacement point dimension mismatch");
  const Index n = p.n();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double lambda_prime = p.lambda / p.loss.alpha;
  const Matrix a = p.a.to_dense();
  const Vector b = p.labels / sqrt_n;
  const double radius = p.ball_radius();

  auto solve = [&](const Matrix& design, const Vector& rhs) {
    Matrix h = design.transpose() * design;
    h.diagonal().array() += p.lambda;
    return minimize_quadratic_on_ball(h, design.transpose() * rhs, radius).w;
  };
  auto f = [&](const Vector& x, double y, const Vector& w) { return p.loss.value(y, x.dot(w)); };
  auto tau = [&](const Matrix& design, const Vector& x) {
    Matrix m = design.transpose() * design;
    m.diagonal().array() += lambda_prime;
    return x.dot(m.llt().solve(x)) / static_cast<double>(n);
  };

  const Vector w_hat = solve(a, b);
  Matrix base = a.transpose() * a;
  base.diagonal().array() += lambda_prime;
  const Eigen::LLT<Matrix> base_llt(base);

  std::vector<StabilityRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Matrix ai = a;
    Vector bi = b;
    ai.row(i) = x_new.transpose() / sqrt_n;
    bi(i) = y_new / sqrt_n;
    const Vector w_i = solve(ai, bi);
    const Vector xi = a.row(i).transpose() * sqrt_n;
    const double yi = p.labels(i);

    StabilityRecord r;
    r.index = i;
    r.delta_i = f(xi, yi, w_i) - f(xi, yi, w_hat);
    r.delta_np1 = f(x_new, y_new, w_hat) - f(x_new, y_new, w_i);
    r.tau_i = xi.dot(base_llt.solve(xi)) / static_cast<double>(n);
    r.tau_np1 = tau(ai, x_new);
    const double total = std::max(0.0, r.delta_i + r.delta_np1);
    r.bound_i = p.loss.rho * std::sqrt(2.0 * r.tau_i * total / p.loss.alpha);
    r.bound_np1 = p.loss.rho * std::sqrt(2.0 * r.tau_np1 * total / p.loss.alpha);
    out.push_back(r);
  }
  return out;
}

struct StabilityAggregate {
  double mean_delta = 0.0;  ///< (1/n) sum (Delta_i + Delta_{n+1})
  double bound = 0.0;       ///< (4 rho^2 / (alpha n)) sum (tau_i + tau_{n+1})
};

inline StabilityAggregate stability_aggregate(const std::vector<StabilityRecord>& records, const LossSpec& loss) {
  KahanSum d, t;
  for (const auto& r : records) {
    d.add(r.delta_i + r.delta_np1);
    t.add(r.tau_i + r.tau_np1);
  }
  const double n = static_cast<double>(records.size());
  return {d.value() / n, 4.0 * loss.rho * loss.rho / (loss.alpha * n) * t.value()};
}

// ---------------------------------------------------------------------------
// Excess risk curves.

/// Gaussian design x ~ N(0, diag(lambda)) with y = w0^T x + noise.
struct GaussianDesign {
  std::vector<double> eigenvalues;
  Vector w0;
  double noise_sd = 0.0;

  Index d() const { return static_cast<Index>(eigenvalues.size()); }

  double risk(const Vector& w) const {
    KahanSum s;
    for (Index i = 0; i < d(); ++i) {
      const double diff = w(i) - w0(i);
      s.add(0.5 * eigenvalues[static_cast<std::size_t>(i)] * diff * diff);
    }
    return s.value() + 0.5 * noise_sd * noise_sd;
  }

  Vector constrained_optimum(double radius) const {
    Vector h(d()), g(d());
    for (Index i = 0; i < d(); ++i) {
      h(i) = eigenvalues[static_cast<std::size_t>(i)];
      g(i) = h(i) * w0(i);
    }
    return detail::diagonal_ball_solve(h, g, radius);
  }
};

enum class RiskDesign { Hard, Gaussian };
enum class LambdaSchedule { Fixpoint, Fixed };

inline const char* to_string(LambdaSchedule s) { return s == LambdaSchedule::Fixpoint ? "fixpoint" : "fixed"; }

struct RiskCurveOptions {
  RiskDesign design = RiskDesign::Hard;
  LambdaSchedule schedule = LambdaSchedule::Fixpoint;
  double fixed_lambda = 0.0;
  double noise_sd = 0.1;  ///< Gaussian design only
};

struct RiskCurveRow {
  Index n = 0;
  double lambda = 0.0;
  std::string schedule;
  double mean_excess = 0.0;
  double se_excess = 0.0;
  double bound = 0.0;
  int trials = 0;
  bool se_warning = false;  ///< fewer than 10 trials
};

/// 8 rho^2 d_{lambda/alpha}(C) / (alpha n) + lambda B^2 / 2.
inline double excess_risk_bound(const std::vector<double>& eigenvalues, const LossSpec& loss, Index n, double lambda,
                                double diameter) {
  return 8.0 * loss.rho * loss.rho * effective_dimension(eigenvalues, lambda / loss.alpha) /
             (loss.alpha * static_cast<double>(n)) +
         0.5 * lambda * diameter * diameter;
}

/// lambda = eps / (alpha B^2) with eps iterated five times through the bound, from eps = 1.
inline double fixpoint_lambda(const std::vector<double>& eigenvalues, const LossSpec& loss, Index n, double diameter) {
  double eps = 1.0;
  for (int k = 0; k < 5; ++k) eps = excess_risk_bound(eigenvalues, loss, n, eps / (loss.alpha * diameter * diameter), diameter);
  return eps / (loss.alpha * diameter * diameter);
}

/// Monte Carlo excess risk E[F(w_hat)] - min_{|w| <= B/2} F(w) of exact square-loss
/// RLM over the ball of diameter B. The hard distribution is calibrated once
/// for the smallest n of the grid; population risks are evaluated analytically.
inline std::vector<RiskCurveRow> excess_risk_curve(const DecayProfile& profile, double diameter,
                                                   const std::vector<Index>& n_grid, int trials,
                                                   const SamplerConfig& cfg, const RiskCurveOptions& opts = {}) {
  detail::require(!n_grid.empty(), "n grid must not be empty");
  detail::require(trials >= 1, "trials must be positive");
  if (!(diameter > 0.0)) throw DomainError("diameter must be positive");
  const LossSpec loss = square_loss();
  const std::vector<double> eig = profile.eigenvalues();
  const double radius = 0.5 * diameter;
  const Index n_min = *std::min_element(n_grid.begin(), n_grid.end());

  HardDistribution hd;
  GaussianDesign gd;
  double f_star = 0.0;
  if (opts.design == RiskDesign::Hard) {
    hd = make_hard_distribution(profile, n_min, cfg);
    f_star = population_risk(hd, constrained_population_optimum(hd, radius));
  } else {
    gd.eigenvalues = eig;
    gd.noise_sd = opts.noise_sd;
    gd.w0 = Vector(profile.d);
    Rng rng(derive_seed(cfg.rng_seed, 0x6A55));
    for (Index i = 0; i < profile.d; ++i) gd.w0(i) = rng.normal();
    gd.w0 *= radius / gd.w0.norm();
    f_star = gd.risk(gd.constrained_optimum(radius));
  }

  std::vector<RiskCurveRow> rows;
  for (const Index n : n_grid) {
    RiskCurveRow row;
    row.n = n;
    row.trials = trials;
    row.se_warning = trials < 10;
    row.schedule = to_string(opts.schedule);
    row.lambda = opts.schedule == LambdaSchedule::Fixed ? opts.fixed_lambda : fixpoint_lambda(eig, loss, n, diameter);
    if (!(row.lambda > 0.0)) throw DomainError("risk curve lambda must be positive");
    row.bound = excess_risk_bound(eig, loss, n, row.lambda, diameter);

    std::vector<double> excess(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(t)));
      double risk = 0.0;
      if (opts.design == RiskDesign::Hard) {
        const HardSample s = sample_hard(hd, n, rng);
        risk = population_risk(hd, hard_rlm_solution(hd, s, row.lambda, radius));
      } else {
        Matrix x(n, gd.d());
        Vector y(n);
        for (Index j = 0; j < n; ++j) {
          for (Index i = 0; i < gd.d(); ++i) x(j, i) = std::sqrt(eig[static_cast<std::size_t>(i)]) * rng.normal();
          y(j) = x.row(j).dot(gd.w0) + gd.noise_sd * rng.normal();
        }
        const double sn = std::sqrt(static_cast<double>(n));
        const DataMatrix a = DataMatrix::dense(x / sn, Scaling::Scaled);
        risk = gd.risk(exact_ridge(a, y / sn, row.lambda, radius).w);
      }
      excess[static_cast<std::size_t>(t)] = risk - f_star;
    }
    const MeanSe ms = mean_and_se(excess);
    row.mean_excess = ms.mean;
    row.se_excess = ms.se;
    rows.push_back(row);
  }
  return rows;
}

/// Lower-bound measurement on the hard distribution calibrated for n: excess risk
/// of exact RLM (regularizer lambda(gamma), ball of radius B) against the best
/// predictor of norm <= B, next to d_{lambda(gamma)} / n.
struct LowerBoundRow {
  Index n = 0;
  double gamma = 0.0;
  double lambda = 0.0;
  double effdim = 0.0;
  double rate = 0.0;  ///< d_{lambda(gamma)} / n
  double mean_excess = 0.0;
  double se_excess = 0.0;
  int trials = 0;
};

inline LowerBoundRow lower_bound_experiment(const DecayProfile& profile, Index n, double radius, int trials,
                                            const SamplerConfig& cfg) {
  detail::require(trials >= 1, "trials must be positive");
  const HardDistribution hd = make_hard_distribution(profile, n, cfg);
  const GammaResult g = lower_bound_gamma(profile, n, radius);
  const double f_star = population_risk(hd, constrained_population_optimum(hd, radius));
  std::vector<double> excess(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(derive_seed(cfg.rng_seed, 0x10B0 + static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(t)));
    const HardSample s = sample_hard(hd, n, rng);
    excess[static_cast<std::size_t>(t)] = population_risk(hd, hard_rlm_solution(hd, s, g.lambda, radius)) - f_star;
  }
  const MeanSe ms = mean_and_se(excess);
  LowerBoundRow row;
  row.n = n;
  row.gamma = g.gamma;
  row.lambda = g.lambda;
  row.effdim = g.effdim;
  row.rate = g.effdim / static_cast<double>(n);
  row.mean_excess = ms.mean;
  row.se_excess = ms.se;
  row.trials = trials;
  return row;
}

// ---------------------------------------------------------------------------
// Expected effective dimension of the empirical covariance.

struct EffdimExpectation {
  double mean = 0.0;
  double se = 0.0;
  double population = 0.0;  ///< d_lambda(C)
  double bound = 0.0;       ///< 2 d_lambda(C)
  bool skipped = false;     ///< both sides below 1e-8
  bool holds = true;        ///< mean <= bound + 3 se
};

namespace detail {

inline EffdimExpectation finish_expectation(const std::vector<double>& samples, double population) {
  EffdimExpectation out;
  const MeanSe ms = mean_and_se(samples);
  out.mean = ms.mean;
  out.se = ms.se;
  out.population = population;
  out.bound = 2.0 * population;
  if (out.mean < 1e-8 && out.bound < 1e-8) {
    out.skipped = true;
    return out;
  }
  out.holds = out.mean <= out.bound + 3.0 * out.se;
  return out;
}

}  // namespace detail

/// Monte Carlo E[d_lambda(C_hat)] for the hard-distribution design of a profile.
inline EffdimExpectation effdim_expectation_check(const DecayProfile& profile, Index n, double lambda, int trials,
                                                  const SamplerConfig& cfg) {
  if (trials < 100) throw PreconditionError("effective dimension expectation needs at least 100 trials");
  detail::require(n >= 1, "sample size must be positive");
  const std::vector<double> eig = profile.eigenvalues();
  const auto d = static_cast<std::uint64_t>(profile.d);
  std::vector<double> samples(static_cast<std::size_t>(trials));
  std::vector<double> counts(eig.size());
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(cfg.rng_seed, 0xEFD0 + static_cast<std::uint64_t>(t)));
    std::fill(counts.begin(), counts.end(), 0.0);
    for (Index j = 0; j < n; ++j) counts[rng.index(d)] += 1.0;
    KahanSum s;
    for (std::size_t i = 0; i < eig.size(); ++i) {
      const double v = counts[i] * static_cast<double>(d) * eig[i] / static_cast<double>(n);
      s.add(v / (v + lambda));
    }
    samples[static_cast<std::size_t>(t)] = s.value();
  }
  return detail::finish_expectation(samples, effective_dimension(eig, lambda));
}

/// Same check for an arbitrary design given by a sampler and its second moment E[x x^T].
inline EffdimExpectation effdim_expectation_check(const std::function<Vector(Rng&)>& draw, const Matrix& population_cov,
                                                  Index n, double lambda, int trials, const SamplerConfig& cfg) {
  if (trials < 100) throw PreconditionError("effective dimension expectation needs at least 100 trials");
  const SymmetricSpectrum pop = symmetric_spectrum(population_cov);
  std::vector<double> samples(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(cfg.rng_seed, 0xEFD0 + static_cast<std::uint64_t>(t)));
    Matrix c = Matrix::Zero(population_cov.rows(), population_cov.cols());
    for (Index j = 0; j < n; ++j) {
      const Vector x = draw(rng);
      c.noalias() += x * x.transpose();
    }
    c /= static_cast<double>(n);
    samples[static_cast<std::size_t>(t)] = effective_dimension(symmetric_spectrum(c), lambda);
  }
  return detail::finish_expectation(samples, effective_dimension(pop, lambda));
}

inline void to_json(nlohmann::json& j, const StabilityRecord& r) {
  j = nlohmann::json{{"index", r.index},     {"delta_i", r.delta_i}, {"delta_np1", r.delta_np1}, {"tau_i", r.tau_i},
                     {"tau_np1", r.tau_np1}, {"bound_i", r.bound_i}, {"bound_np1", r.bound_np1}};
}

inline void to_json(nlohmann::json& j, const RiskCurveRow& r) {
  j = nlohmann::json{{"n", r.n},
                     {"lambda", r.lambda},
                     {"schedule", r.schedule},
                     {"mean_excess", r.mean_excess},
                     {"se_excess", r.se_excess},
                     {"bound", r.bound},
                     {"trials", r.trials},
                     {"se_warning", r.se_warning}};
}

inline void to_json(nlohmann::json& j, const LowerBoundRow& r) {
  j = nlohmann::json{{"n", r.n},           {"gamma", r.gamma},       {"lambda", r.lambda},
                     {"effdim", r.effdim}, {"rate", r.rate},         {"mean_excess", r.mean_excess},
                     {"se_excess", r.se_excess}, {"trials", r.trials}};
}

inline void to_json(nlohmann::json& j, const EffdimExpectation& e) {
  j = nlohmann::json{{"mean", e.mean},   {"se", e.se},           {"population", e.population},
                     {"bound", e.bound}, {"skipped", e.skipped}, {"holds", e.holds}};
}

}  // namespace sketchcond
