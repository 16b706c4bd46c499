#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sketchcond/leverage.hpp"
#include "sketchcond/random.hpp"

namespace sketchcond {

/// Constants of ridge leverage score sampling.
struct SamplerConfig {
  double c = 8.0;        ///< oversampling constant
  double delta = 0.01;   ///< target failure probability
  std::uint64_t rng_seed = 42;

  void validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("sampler constant c must be positive");
    if (!(delta > 0.0 && delta < 0.5)) throw DomainError("sampler delta must lie in (0, 1/2)");
  }

  /// The "log d" factor of the sampling probabilities with the failure
  /// probability folded in: log(max(d,2)) * (1 + log(1/delta) / log(max(d,2))).
  double log_factor(Index d) const {
    const double ld = std::log(static_cast<double>(std::max<Index>(d, 2)));
    return ld + std::log(1.0 / delta);
  }

  /// Same constants, different seed.
  SamplerConfig with_seed(std::uint64_t seed) const {
    SamplerConfig out = *this;
    out.rng_seed = seed;
    return out;
  }
};

/// Sparse diagonal reweighting S: kept row indices (strictly increasing) and
/// their positive weights.
struct SamplingMatrix {
  Index source_rows = 0;
  std::vector<Index> indices;
  std::vector<double> weights;
  double eps = 0.0;
  double alpha = 1.0;
  std::uint64_t seed = 0;

  Index kept() const { return static_cast<Index>(indices.size()); }

  void validate() const {
    detail::require(indices.size() == weights.size(), "sampling matrix index/weight length mismatch");
    detail::require(alpha > 0.0 && alpha <= 1.0, "sampling matrix alpha outside (0,1]");
    for (std::size_t k = 0; k < indices.size(); ++k) {
      detail::require(indices[k] >= 0 && indices[k] < source_rows, "sampling index out of range");
      detail::require(k == 0 || indices[k] > indices[k - 1], "sampling indices must be strictly increasing");
      detail::require(std::isfinite(weights[k]) && weights[k] > 0.0, "sampling weights must be finite and positive");
    }
  }

  /// Keeps every row with the same weight.
  static SamplingMatrix all_rows(Index n, double weight = 1.0) {
    SamplingMatrix s;
    s.source_rows = n;
    s.indices.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) s.indices[static_cast<std::size_t>(i)] = i;
    s.weights.assign(static_cast<std::size_t>(n), weight);
    return s;
  }
};

/// p_i = min{1, c eps^-2 alpha u_i log d}.
inline double sampling_probability(double u, double eps, double alpha, Index d, const SamplerConfig& cfg) {
  if (!(u >= 0.0)) throw DomainError("leverage estimates must be nonnegative");
  return std::min(1.0, cfg.c / (eps * eps) * alpha * u * cfg.log_factor(d));
}

/// Weight of a kept row: ((1 + eps) p / alpha)^{-1/2}.
inline double sampling_weight(double p, double eps, double alpha) { return 1.0 / std::sqrt((1.0 + eps) * p / alpha); }

inline std::vector<double> sampling_probabilities(const LeverageEstimates& u, double eps, double alpha,
                                                  const SamplerConfig& cfg) {
  std::vector<double> p(u.values.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = sampling_probability(u.values[i], eps, alpha, u.dim, cfg);
  return p;
}

/// Ridge leverage score undersampling: row i is kept independently with
/// probability p_i (scaled by alpha) but reweighted as if sampled at p_i / alpha.
inline SamplingMatrix undersample(const LeverageEstimates& u, double eps, double alpha, const SamplerConfig& cfg) {
  cfg.validate();
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("sampling accuracy eps must lie in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("undersampling factor alpha must lie in (0,1]");
  detail::require(u.dim >= 1, "leverage estimates carry no column dimension");
  const std::vector<double> p = sampling_probabilities(u, eps, alpha, cfg);

  SamplingMatrix s;
  s.source_rows = u.size();
  s.eps = eps;
  s.alpha = alpha;
  s.seed = cfg.rng_seed;
  Rng rng(cfg.rng_seed);
  for (std::size_t i = 0; i < p.size(); ++i) {
    // One draw per row keeps the random stream aligned with the row index.
    const double draw = rng.uniform();
    if (p[i] > 0.0 && draw < p[i]) {
      s.indices.push_back(static_cast<Index>(i));
      s.weights.push_back(sampling_weight(p[i], eps, alpha));
    }
  }
  return s;
}

/// Ridge leverage score sampling (undersampling with alpha = 1).
inline SamplingMatrix sample(const LeverageEstimates& u, double eps, const SamplerConfig& cfg) {
  return undersample(u, eps, 1.0, cfg);
}

/// Expected number of kept rows, sum_i p_i.
inline double expected_kept(const LeverageEstimates& u, double eps, double alpha, const SamplerConfig& cfg) {
  double sum = 0.0;
  for (double p : sampling_probabilities(u, eps, alpha, cfg)) sum += p;
  return sum;
}

inline void to_json(nlohmann::json& j, const SamplingMatrix& s) {
  j = nlohmann::json{{"source_rows", s.source_rows}, {"indices", s.indices}, {"weights", s.weights},
                     {"eps", s.eps},                 {"alpha", s.alpha},     {"seed", s.seed}};
}

inline void from_json(const nlohmann::json& j, SamplingMatrix& s) {
  j.at("source_rows").get_to(s.source_rows);
  j.at("indices").get_to(s.indices);
  j.at("weights").get_to(s.weights);
  j.at("eps").get_to(s.eps);
  j.at("alpha").get_to(s.alpha);
  j.at("seed").get_to(s.seed);
  s.validate();
}

}  // namespace sketchcond
