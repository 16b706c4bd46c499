#pragma once

#include <json.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sketchcond/overestimates.hpp"

namespace sketchcond {

enum class Decision { Accept, Reject };

inline const char* to_string(Decision d) { return d == Decision::Accept ? "accept" : "reject"; }

/// Outcome of the undersampling test of d_lambda(A^T A) <= m.
struct EffDimVerdict {
  Decision decision = Decision::Reject;
  int rounds_used = 0;
  double final_mass = 0.0;  ///< |u_final|_1
  double threshold_m = 0.0;
  std::vector<double> mass_history;  ///< |u|_1 before each round and after the last
};

/// Verifier ran out of rounds; carries the partial verdict.
class VerifierBudgetError : public NumericalError {
 public:
  VerifierBudgetError(const std::string& what, EffDimVerdict partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const EffDimVerdict& partial() const { return partial_; }

 private:
  EffDimVerdict partial_;
};

/// Multiplier c_v relating the undersampling factor to the threshold, alpha = c_v m / |u|_1.
inline constexpr double kVerifierConstant = 6.0;

inline int verifier_round_budget(Index n) {
  return 2 * static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<Index>(n, 1))))) + 1;
}

/// Undersampling test for d_lambda(A^T A) <= m.
///
/// Starting from u_i = min(1, |a_i|^2/lambda), each round refines u with
/// alpha = min(1, 6m/|u|_1). Accept as soon as |u|_1 <= m; reject when a round
/// fails to halve |u|_1 (ties reject). With high probability this accepts
/// whenever d_lambda <= m/6 and rejects whenever d_lambda > 6m.
inline EffDimVerdict verify_effdim_bound(const DataMatrix& a, double lambda, double m, const SamplerConfig& cfg) {
  detail::require_lambda(lambda);
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("effective dimension threshold m must be positive");
  cfg.validate();

  EffDimVerdict v;
  v.threshold_m = m;
  LeverageEstimates u = initial_overestimates(a, lambda);
  double mass = u.total();
  v.mass_history.push_back(mass);
  if (mass <= m) {
    v.decision = Decision::Accept;
    v.final_mass = mass;
    return v;
  }
  const int budget = verifier_round_budget(a.rows());
  while (v.rounds_used < budget) {
    const double alpha = std::min(1.0, kVerifierConstant * m / mass);
    LeverageEstimates next = refine_overestimates(
        a, lambda, u, alpha, cfg.with_seed(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(v.rounds_used))));
    ++v.rounds_used;
    const double next_mass = next.total();
    v.mass_history.push_back(next_mass);
    v.final_mass = next_mass;
    if (next_mass <= m) {
      v.decision = Decision::Accept;
      return v;
    }
    if (next_mass >= 0.5 * mass) {
      v.decision = Decision::Reject;
      return v;
    }
    u = std::move(next);
    mass = next_mass;
  }
  throw VerifierBudgetError("effective dimension verifier exhausted its round budget", std::move(v));
}

/// Inputs of the runtime model psi(lambda') = (lambda'/lambda)(nnz(A) + d_{lambda'}^2 d).
struct PsiBudget {
  double lambda_base = 0.0;
  double nnz = 0.0;
  double d = 0.0;
};

inline double psi(double lambda_prime, const PsiBudget& budget, double dlam) {
  if (!(budget.lambda_base > 0.0 && budget.nnz > 0.0 && budget.d > 0.0)) throw DomainError("psi budget must be positive");
  if (!(lambda_prime >= budget.lambda_base)) throw DomainError("psi needs lambda' >= lambda");
  if (!(dlam >= 0.0)) throw DomainError("psi needs a nonnegative effective dimension");
  return (lambda_prime / budget.lambda_base) * (budget.nnz + dlam * dlam * budget.d);
}

/// One check "psi(lambda_bar) <= phi" performed by the tuner.
struct TuneCheck {
  double phi = 0.0;
  double lambda_bar = 0.0;
  double m = 0.0;
  bool skipped = false;  ///< m == 0: the check fails without running the verifier
  Decision decision = Decision::Reject;
  int rounds_used = 0;
  double final_mass = 0.0;
};

struct TuneResult {
  double lambda = 0.0;
  bool fell_back = false;      ///< every check rejected; lambda returned unchanged
  bool verifier_error = false; ///< a verifier call failed; lambda returned unchanged
  std::vector<TuneCheck> trace;
};

/// Doubling search for the inner regularizer minimizing psi: outer loop over
/// phi in {nnz + d, nnz + 2d, ..., nnz + d^3}, inner loop over
/// lambda_bar in {lambda, 2 lambda, ..., d^2 lambda}; returns the first lambda_bar
/// whose verifier accepts d_{lambda_bar} <= sqrt(((lambda/lambda_bar) phi - nnz)/d).
inline TuneResult tune_lambda(const DataMatrix& a, double lambda, const SamplerConfig& cfg) {
  detail::require_lambda(lambda);
  cfg.validate();
  const double nnz = static_cast<double>(a.nnz());
  const double d = static_cast<double>(a.cols());
  const double phi_max = nnz + d * d * d;
  const int max_k = static_cast<int>(std::ceil(2.0 * std::log2(std::max(d, 1.0))));

  TuneResult out;
  out.lambda = lambda;
  std::uint64_t check_id = 0;
  for (double scale = 1.0;; scale *= 2.0) {
    const double phi = std::min(nnz + d * scale, phi_max);
    for (int k = 0; k <= max_k; ++k) {
      const double lambda_bar = lambda * std::ldexp(1.0, k);
      TuneCheck check;
      check.phi = phi;
      check.lambda_bar = lambda_bar;
      const double slack = (lambda / lambda_bar) * phi - nnz;
      check.m = std::sqrt(std::max(0.0, slack) / d);
      if (!(check.m > 0.0)) {
        // m only shrinks as lambda_bar grows.
        check.skipped = true;
        out.trace.push_back(check);
        break;
      }
      try {
        const EffDimVerdict v = verify_effdim_bound(a, lambda_bar, check.m, cfg.with_seed(derive_seed(cfg.rng_seed, check_id++)));
        check.decision = v.decision;
        check.rounds_used = v.rounds_used;
        check.final_mass = v.final_mass;
      } catch (const NumericalError&) {
        out.trace.push_back(check);
        out.verifier_error = true;
        out.lambda = lambda;
        return out;
      }
      out.trace.push_back(check);
      if (check.decision == Decision::Accept) {
        out.lambda = lambda_bar;
        return out;
      }
    }
    if (phi >= phi_max) break;
  }
  out.fell_back = true;
  return out;
}

inline void to_json(nlohmann::json& j, const EffDimVerdict& v) {
  j = nlohmann::json{{"decision", to_string(v.decision)},
                     {"rounds_used", v.rounds_used},
                     {"final_mass", v.final_mass},
                     {"threshold_m", v.threshold_m},
                     {"mass_history", v.mass_history}};
}

inline void to_json(nlohmann::json& j, const TuneCheck& c) {
  j = nlohmann::json{{"phi", c.phi},
                     {"lambda_bar", c.lambda_bar},
                     {"m", c.m},
                     {"skipped", c.skipped},
                     {"decision", to_string(c.decision)},
                     {"rounds_used", c.rounds_used},
                     {"final_mass", c.final_mass}};
}

inline void to_json(nlohmann::json& j, const TuneResult& t) {
  j = nlohmann::json{{"lambda", t.lambda}, {"fell_back", t.fell_back}, {"verifier_error", t.verifier_error}, {"trace", t.trace}};
}

}  // namespace sketchcond
