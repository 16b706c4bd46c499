#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "sketchcond/leverage.hpp"
#include "sketchcond/sampling.hpp"

namespace sketchcond {

/// Thrown when iterative refinement fails to stabilize; carries the last estimates.
class OverestimateConvergenceError : public NumericalError {
 public:
  OverestimateConvergenceError(const std::string& what, LeverageEstimates last)
      : NumericalError(what), last_(std::move(last)) {}
  const LeverageEstimates& last() const { return last_; }

 private:
  LeverageEstimates last_;
};

/// Accuracy used when sampling for refinement.
inline constexpr double kRefinementEps = 0.5;

/// Trivial overestimates u_i = min(1, |a_i|^2 / lambda).
inline LeverageEstimates initial_overestimates(const DataMatrix& a, double lambda) {
  detail::require_lambda(lambda);
  const Vector norms = a.row_squared_norms();
  LeverageEstimates u;
  u.lambda = lambda;
  u.kind = EstimateKind::Overestimate;
  u.dim = a.cols();
  u.values.resize(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) u.values[static_cast<std::size_t>(i)] = std::min(1.0, norms(i) / lambda);
  return u;
}

/// One undersampling refinement: S = undersample(u, 1/2, alpha) and
/// u_new_i = min{a_i^T (A^T S^T S A + lambda I)^{-1} a_i, u_i}.
/// Never increases a coordinate.
inline LeverageEstimates refine_overestimates(const DataMatrix& a, double lambda, const LeverageEstimates& u,
                                              double alpha, const SamplerConfig& cfg) {
  detail::require_lambda(lambda);
  detail::require(u.size() == a.rows(), "estimate length does not match the data row count");
  LeverageEstimates u_dim = u;
  u_dim.dim = a.cols();
  const SamplingMatrix s = undersample(u_dim, kRefinementEps, alpha, cfg);
  const Vector q = sketched_quadratic_forms(a, s.indices, s.weights, lambda);

  LeverageEstimates out;
  out.lambda = lambda;
  out.kind = EstimateKind::Overestimate;
  out.dim = a.cols();
  out.values.resize(u.values.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = std::min(q(static_cast<Index>(i)), u.values[i]);
  }
  return out;
}

/// Constant-factor overestimates of the ridge leverage scores: start from
/// min(1, |a_i|^2/lambda) and refine with alpha = 1 until the total mass no
/// longer halves between rounds.
inline LeverageEstimates compute_overestimates(const DataMatrix& a, double lambda, const SamplerConfig& cfg) {
  LeverageEstimates u = initial_overestimates(a, lambda);
  const int max_rounds =
      std::max(2, 2 * static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<Index>(a.rows(), 2))))));
  for (int round = 0; round < max_rounds; ++round) {
    const double before = u.total();
    LeverageEstimates next =
        refine_overestimates(a, lambda, u, 1.0, cfg.with_seed(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(round))));
    const double after = next.total();
    u = std::move(next);
    if (after >= 0.5 * before) return u;
  }
  throw OverestimateConvergenceError("leverage overestimates did not stabilize", std::move(u));
}

}  // namespace sketchcond
