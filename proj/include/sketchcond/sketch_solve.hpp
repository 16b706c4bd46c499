#pragma once

#include <cmath>
#include <optional>

#include "sketchcond/overestimates.hpp"
#include "sketchcond/ridge_exact.hpp"
#include "sketchcond/spectral_check.hpp"

namespace sketchcond {

struct SketchSolveResult {
  Vector weights;
  SamplingMatrix sketch;
  int retries = 0;
};

/// Sketch-and-solve ridge regression. Samples rows of [A | b] (b = y / sqrt(n))
/// from leverage overestimates at accuracy eps and solves
/// min 1/2 |S(Aw - b)|^2 + (lambda/2)|w|^2 over the ball of diameter B.
/// B defaults to sqrt(eps / lambda), i.e. lambda = eps / B^2.
inline SketchSolveResult sketch_and_solve_ridge(const DataMatrix& a, const Vector& labels, double lambda, double eps,
                                                const SamplerConfig& cfg,
                                                std::optional<double> diameter = std::nullopt) {
  detail::require(a.scaled(), "sketch-and-solve expects the scaled data matrix");
  detail::require(labels.size() == a.rows(), "label length does not match the data row count");
  detail::require_lambda(lambda);
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("sketch-and-solve eps must lie in (0,1)");
  const double radius = 0.5 * diameter.value_or(std::sqrt(eps / lambda));

  const Vector b = labels / std::sqrt(static_cast<double>(a.rows()));
  const DataMatrix augmented = a.append_column(b);
  const LeverageEstimates u = compute_overestimates(augmented, lambda, cfg.with_seed(derive_seed(cfg.rng_seed, 1)));

  SamplerConfig sampling_cfg = cfg.with_seed(derive_seed(cfg.rng_seed, 2));
  SketchSolveResult out;
  for (int attempt = 0;; ++attempt) {
    out.sketch = sample(u, eps, sampling_cfg);
    if (out.sketch.kept() > 0) break;
    if (attempt == 3) throw NumericalError("sketch-and-solve sampled no rows after 3 retries");
    sampling_cfg.c *= 2.0;
    sampling_cfg.rng_seed = derive_seed(sampling_cfg.rng_seed, 3);
    ++out.retries;
  }

  const Matrix sa = a.weighted_rows(out.sketch.indices, out.sketch.weights);
  Vector sb(out.sketch.kept());
  for (Index k = 0; k < sb.size(); ++k) sb(k) = out.sketch.weights[static_cast<std::size_t>(k)] * b(out.sketch.indices[static_cast<std::size_t>(k)]);
  Matrix h = sa.transpose() * sa;
  h.diagonal().array() += lambda;
  out.weights = minimize_quadratic_on_ball(h, sa.transpose() * sb, radius).w;
  return out;
}

}  // namespace sketchcond
