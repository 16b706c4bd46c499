// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sketchcond/sketchcond.hpp"

using namespace sketchcond;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DataMatrix scaled(const Matrix& m) { return DataMatrix::dense(m, Scaling::Scaled); }

/// Rows sqrt(eig_j / copies) e_j, so A^T A = diag(eig).
DataMatrix diagonal_design(const std::vector<double>& eig, Index copies) {
  const auto d = static_cast<Index>(eig.size());
  std::vector<Eigen::Triplet<double>> t;
  for (Index j = 0; j < d; ++j)
    for (Index c = 0; c < copies; ++c)
      t.emplace_back(j * copies + c, j, std::sqrt(eig[static_cast<std::size_t>(j)] / static_cast<double>(copies)));
  return DataMatrix::from_triplets(d * copies, d, t, Scaling::Scaled);
}

struct Regression {
  Matrix x;
  Vector y;
  Matrix a() const { return x / std::sqrt(static_cast<double>(x.rows())); }
  Vector b() const { return y / std::sqrt(static_cast<double>(x.rows())); }
  RLMProblem problem(double lambda) const {
    return RLMProblem(scale_rows(DataMatrix::dense(x)), y, lambda, kInf, square_loss());
  }
  double optimum(double lambda) const { return oracle::ridge_objective(a(), b(), lambda, oracle::ridge(a(), b(), lambda)); }
};

Regression regression(Index n, Index d, std::uint64_t seed, double decay) {
  Regression f;
  f.x = oracle::gaussian_matrix(n, d, seed);
  for (Index j = 0; j < d; ++j) f.x.col(j) *= std::pow(static_cast<double>(j + 1), -decay);
  const Vector w0 = oracle::gaussian_vector(d, seed + 1) / std::sqrt(static_cast<double>(d));
  f.y = f.x * w0 + 0.1 * oracle::gaussian_vector(n, seed + 2);
  return f;
}

// 1. Leverage scores sum to the effective dimension.
Outcome leverage_identity() {
  std::mt19937_64 gen(1);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = std::uniform_int_distribution<Index>(2, 200)(gen);
    const Index d = std::uniform_int_distribution<Index>(1, 50)(gen);
    Matrix m = oracle::gaussian_matrix(n, d, 100 + static_cast<std::uint64_t>(t));
    for (Index j = 0; j < d; ++j) m.col(j) *= std::pow(static_cast<double>(j + 1), -0.1 * (t % 15));
    m /= std::sqrt(static_cast<double>(n));
    const DataMatrix a = t % 5 == 0 ? DataMatrix::sparse(m.sparseView(), Scaling::Scaled) : scaled(m);
    const auto eig = oracle::gram_eigenvalues(m);
    for (double lam : {1e-3, 1e-1, 1.0}) {
      const auto u = ridge_leverage_scores_exact(a, lam);
      const double ref = static_cast<double>(oracle::effdim(eig, lam));
      worst = std::max(worst, std::abs(u.total() - ref) / std::max(ref, 1e-300));
    }
  }
  return {worst <= 1e-6, fmt("worst relative error %.2e over 150 cases", worst)};
}

// 2. Exact-score sampling gives a (lambda, 1/2)-spectral approximation.
Outcome spectral_approximation() {
  struct Spec {
    const char* name;
    std::vector<double> sv;
    double lambda;
  };
  std::vector<Spec> specs;
  {
    Spec poly{"poly", {}, 0.1}, expo{"exp", {}, 0.3}, cluster{"two-cluster", {}, 0.2};
    for (int i = 1; i <= 100; ++i) {
      poly.sv.push_back(1.0 / i);
      expo.sv.push_back(std::pow(0.9, i - 1));
      cluster.sv.push_back(i <= 5 ? 1.0 : 0.05);
    }
    specs = {poly, expo, cluster};
  }
  const double eps = 0.5;
  const SamplerConfig base;
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const Matrix m = oracle::with_singular_values(2000, specs[k].sv, 200 + k);
    const DataMatrix a = scaled(m);
    const double lam = specs[k].lambda;
    const auto u = ridge_leverage_scores_exact(a, lam);
    const double bound = 2.0 * base.c / (eps * eps) * u.total() * base.log_factor(a.cols());
    int pass = 0, small = 0;
    double kept = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const SamplingMatrix s = sample(u, eps, base.with_seed(seed));
      if (check_spectral_approximation(a, s, lam, eps)) ++pass;
      if (static_cast<double>(s.kept()) <= bound) ++small;
      kept += static_cast<double>(s.kept()) / 100.0;
    }
    ok = ok && pass >= 95 && small >= 99;
    detail += fmt("%s: d_lam=%.1f pass=%d/100 size-ok=%d/100 mean kept=%.0f; ", specs[k].name, u.total(), pass, small, kept);
  }
  return {ok, detail};
}

// 3. Preconditioned gradient descent converges linearly.
Outcome preconditioned_gd_criterion() {
  int checked = 0, converged = 0, contraction_fail = 0, max_it = 0;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const double lam = std::pow(10.0, -4.0 + static_cast<double>(t % 3));
    const Regression f = regression(500, 50, 300 + 7 * t, 0.5 * static_cast<double>(t % 3));
    const RLMProblem p = f.problem(lam);
    const Preconditioner pc = build_preconditioner(p.a, lam, SamplerConfig{8.0, 0.01, t});
    if (!check_spectral_approximation(p.a, pc.sketch(), lam, 0.5)) continue;
    ++checked;
    GdOptions opts;
    opts.max_iterations = 200;
    opts.record_trace = true;
    try {
      const auto [w, r] = preconditioned_gd(p, pc, 1e-13, opts);
      const double fstar = f.optimum(lam);
      if (oracle::ridge_objective(f.a(), f.b(), lam, w) - fstar <= 1e-8) ++converged;
      max_it = std::max(max_it, r.iterations);
      double prev = rlm_value(p, Vector::Zero(50)) - fstar;
      for (double v : r.objective_trace) {
        if (prev < 1e-11) break;
        const double gap = v - fstar;
        if (gap > 0.75 * prev + 1e-14) {
          ++contraction_fail;
          break;
        }
        prev = gap;
      }
    } catch (const SolverIterationError&) {
      max_it = 200;
    }
  }
  return {checked > 0 && converged == checked && contraction_fail == 0,
          fmt("%d/20 fixtures passed the check; %d converged to 1e-8; max iterations %d; contraction violations %d",
              checked, converged, max_it, contraction_fail)};
}

// 4. Proximal point solves match the oracle and epochs scale with lambda'/lambda.
Outcome ppa_criterion() {
  double worst_gap = 0.0, min_ratio = kInf, max_ratio = 0.0, min_scale = kInf, max_scale = 0.0;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const Regression f = regression(500, 50, 400 + 5 * t, 0.8);
    const double lam = t % 2 == 0 ? 1e-3 : 1e-4;
    const RLMProblem p = f.problem(lam);
    const double fstar = f.optimum(lam);
    int epochs[2] = {0, 0};
    for (int k = 0; k < 2; ++k) {
      const double factor = k == 0 ? 2.0 : 8.0;
      const auto [w, r] = ppa_solve(p, factor * lam, 1e-6, SamplerConfig{8.0, 0.01, t});
      worst_gap = std::max(worst_gap, oracle::ridge_objective(f.a(), f.b(), lam, w) - fstar);
      const double ratio = static_cast<double>(r.inner_epochs) / ppa_epoch_count(p, factor * lam, 1e-6);
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
      epochs[k] = r.inner_epochs;
    }
    const double scale = static_cast<double>(epochs[1]) / epochs[0];
    min_scale = std::min(min_scale, scale);
    max_scale = std::max(max_scale, scale);
  }
  const bool ok = worst_gap <= 1e-6 && min_ratio >= 0.5 && max_ratio <= 2.0 && min_scale >= 2.0 && max_scale <= 8.0;
  return {ok, fmt("worst gap %.2e; epochs/formula in [%.2f, %.2f]; epochs(8)/epochs(2) in [%.2f, %.2f]", worst_gap,
                  min_ratio, max_ratio, min_scale, max_scale)};
}

// 5. Effective-dimension verifier separates m/6 and 6m.
Outcome verifier_criterion() {
  struct Case {
    const char* name;
    DataMatrix a;
    double lambda;
    double dlam;
  };
  std::vector<Case> cases;
  {
    Matrix m = Matrix::Zero(64, 16);
    for (Index i = 0; i < 16; ++i) m(i, i) = 1.0;
    cases.push_back({"unit", scaled(m), 1.0, 8.0});
    std::vector<double> poly, expo;
    for (int i = 1; i <= 200; ++i) poly.push_back(1.0 / (static_cast<double>(i) * i));
    for (int i = 0; i < 100; ++i) expo.push_back(std::pow(0.9, i));
    cases.push_back({"poly", diagonal_design(poly, 3), 1e-3, static_cast<double>(oracle::effdim(poly, 1e-3))});
    cases.push_back({"exp", diagonal_design(expo, 2), 1e-2, static_cast<double>(oracle::effdim(expo, 1e-2))});
  }
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    int accepts = 0, rejects = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const SamplerConfig cfg{8.0, 0.01, seed};
      if (verify_effdim_bound(c.a, c.lambda, 6.0 * c.dlam, cfg).decision == Decision::Accept) ++accepts;
      if (verify_effdim_bound(c.a, c.lambda, c.dlam / 6.0, cfg).decision == Decision::Reject) ++rejects;
    }
    ok = ok && accepts >= 95 && rejects >= 95;
    detail += fmt("%s (d_lam=%.2f): accept %d/100, reject %d/100; ", c.name, c.dlam, accepts, rejects);
  }
  return {ok, detail};
}

// 6. Tuned lambda' is within 4 c_v^2 of the best grid value of psi.
Outcome tuner_criterion() {
  struct Case {
    const char* name;
    std::vector<double> eig;
    double lambda;
    Index copies;
  };
  std::vector<Case> cases;
  cases.push_back({"flat", std::vector<double>(64, 1e-2), 1e-2, 4});
  {
    std::vector<double> two(256, 1e-4);
    for (int i = 0; i < 4; ++i) two[static_cast<std::size_t>(i)] = 1.0;
    cases.push_back({"two-cluster", two, 1e-4, 2});
    std::vector<double> poly, expo, step;
    for (int i = 1; i <= 128; ++i) poly.push_back(1.0 / (static_cast<double>(i) * i));
    for (int i = 0; i < 128; ++i) expo.push_back(std::pow(0.95, i));
    for (int i = 0; i < 64; ++i) step.push_back(i < 32 ? 1.0 : 1e-3);
    cases.push_back({"poly", poly, 1e-4, 2});
    cases.push_back({"exp", expo, 1e-3, 2});
    cases.push_back({"step", step, 1e-5, 4});
  }
  constexpr double kVerifierConstant = 6.0;
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const DataMatrix a = diagonal_design(c.eig, c.copies);
    const double nnz = static_cast<double>(a.nnz());
    const double d = static_cast<double>(c.eig.size());
    auto exact_psi = [&](double lp) {
      const double dl = static_cast<double>(oracle::effdim(c.eig, lp));
      return (lp / c.lambda) * (nnz + dl * dl * d);
    };
    double best = kInf;
    for (int k = 0; k <= static_cast<int>(std::ceil(2.0 * std::log2(d))); ++k) best = std::min(best, exact_psi(std::ldexp(c.lambda, k)));
    int good = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const TuneResult r = tune_lambda(a, c.lambda, SamplerConfig{8.0, 0.01, seed});
      const double ratio = exact_psi(r.lambda) / best;
      worst = std::max(worst, ratio);
      if (ratio <= 4.0 * kVerifierConstant * kVerifierConstant) ++good;
    }
    ok = ok && good >= 90;
    detail += fmt("%s: %d/100 (worst psi ratio %.2f); ", c.name, good, worst);
  }
  return {ok, detail};
}

// 7. Replace-one stability inequality.
Outcome stability_criterion() {
  int violations = 0, records = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix x = oracle::gaussian_matrix(50, 10, 700 + 3 * seed);
    for (Index i = 0; i < 50; ++i) x.row(i) /= std::max(1.0, x.row(i).norm());
    const Vector y = oracle::gaussian_vector(50, 701 + 3 * seed).cwiseMax(-1.0).cwiseMin(1.0);
    const double diameter = seed % 2 == 0 ? 100.0 : 0.5;
    const RLMProblem p(scale_rows(DataMatrix::dense(x)), y, 0.01 + 0.02 * static_cast<double>(seed % 3), diameter,
                       square_loss());
    Vector xn = oracle::gaussian_vector(10, 800 + seed);
    xn /= std::max(1.0, xn.norm());
    const double yn = std::tanh(oracle::gaussian_vector(1, 850 + seed)(0));
    for (const auto& r : stability_audit(p, xn, yn, SamplerConfig{8.0, 0.01, seed})) {
      ++records;
      if (r.violated()) ++violations;
    }
  }
  return {violations == 0 && records == 1000, fmt("%d violations over %d replacements", violations, records)};
}

// 8. Monte Carlo excess risk stays under the bound.
Outcome excess_risk_criterion() {
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<const char*, DecayProfile>> profiles = {{"poly", DecayProfile::polynomial(1.0, 2.0, 20)},
                                                                      {"exp", DecayProfile::exponential(1.0, 20)}};
  for (const auto& [name, profile] : profiles) {
    double worst = -kInf;
    for (const auto& r : excess_risk_curve(profile, 2.0, {50, 100, 200, 400}, 200, SamplerConfig{})) {
      const double slack = r.mean_excess - (r.bound + 2.0 * r.se_excess);
      worst = std::max(worst, (r.mean_excess) / (r.bound + 2.0 * r.se_excess));
      ok = ok && slack <= 0.0;
    }
    detail += fmt("%s: max risk/(bound+2se) = %.3f; ", name, worst);
  }
  return {ok, detail};
}

// 9. E[d_lambda(C_hat)] <= 2 d_lambda(C).
Outcome expected_effdim_criterion() {
  int cases = 0, holds = 0;
  double worst = 0.0;
  const std::vector<DecayProfile> profiles = {DecayProfile::polynomial(1.0, 1.5, 40), DecayProfile::polynomial(1.0, 3.0, 40),
                                              DecayProfile::exponential(1.0, 40)};
  for (const auto& profile : profiles) {
    for (Index n : {20, 100}) {
      for (double lam : {1e-3, 1e-2, 1e-1}) {
        const auto r = effdim_expectation_check(profile, n, lam, 500, SamplerConfig{});
        ++cases;
        if (r.holds) ++holds;
        if (!r.skipped) worst = std::max(worst, r.mean / r.bound);
      }
    }
  }
  return {holds == cases, fmt("%d/%d cases hold; max mean/(2 d_lam) = %.3f", holds, cases, worst)};
}

// 10. Lower-bound direction on the hard distribution.
Outcome lower_bound_criterion() {
  bool ok = true;
  std::string detail;
  const Index d = 30;
  const std::vector<std::pair<const char*, DecayProfile>> profiles = {{"poly", DecayProfile::polynomial(1.0, 2.0, d)},
                                                                      {"exp", DecayProfile::exponential(1.0, d)}};
  for (const auto& [name, profile] : profiles) {
    for (Index n : {static_cast<Index>(1.5 * 2.0 * d / 3.0), 3 * d}) {
      const LowerBoundRow r = lower_bound_experiment(profile, n, 1.0, 200, SamplerConfig{});
      const double ratio = r.mean_excess / r.rate;
      ok = ok && ratio >= 0.05;
      detail += fmt("%s n=%ld: excess/rate = %.4f; ", name, static_cast<long>(n), ratio);
    }
  }
  return {ok, detail};
}

// 11. Sketch-and-solve ridge is an eps-approximate minimizer.
Outcome sketch_and_solve_criterion() {
  bool ok = true;
  std::string detail;
  for (std::uint64_t t = 0; t < 3; ++t) {
    const Index n = 1000, d = 20;
    Matrix m = oracle::gaussian_matrix(n, d, 1100 + 3 * t);
    for (Index j = 0; j < d; ++j) m.col(j) *= std::pow(static_cast<double>(j + 1), -0.5 * static_cast<double>(t));
    m /= std::sqrt(static_cast<double>(n));
    const Vector w0 = oracle::gaussian_vector(d, 1101 + 3 * t);
    const Vector y = std::sqrt(static_cast<double>(n)) * m * w0 / w0.norm() + 0.3 * oracle::gaussian_vector(n, 1102 + 3 * t);
    const Vector b = y / std::sqrt(static_cast<double>(n));
    const double eps = 0.1, lam = 0.01;
    const Vector best = oracle::ridge_ball(m, b, lam, 0.5 * std::sqrt(eps / lam));
    const double fbest = oracle::ridge_objective(m, b, lam, best);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto r = sketch_and_solve_ridge(scaled(m), y, lam, eps, SamplerConfig{8.0, 0.01, seed});
      if (oracle::ridge_objective(m, b, lam, r.weights) - fbest <= eps) ++good;
    }
    ok = ok && good >= 95;
    detail += fmt("fixture %d: %d/100; ", static_cast<int>(t), good);
  }
  return {ok, detail};
}

// 12. Linear-kernel dual predictions equal primal predictions.
Outcome kernel_criterion() {
  double worst = 0.0;
  const KernelSpec k = KernelSpec::parse("linear");
  for (std::uint64_t t = 0; t < 6; ++t) {
    const Index n = 60 + 40 * static_cast<Index>(t), d = 3 + 2 * static_cast<Index>(t);
    const double lam = std::pow(10.0, -1.0 - 0.5 * static_cast<double>(t));
    const Matrix x = oracle::gaussian_matrix(n, d, 1200 + t);
    const Vector y = x * oracle::gaussian_vector(d, 1210 + t) + 0.2 * oracle::gaussian_vector(n, 1220 + t);
    const Matrix z = oracle::gaussian_matrix(25, d, 1230 + t);
    const double sn = std::sqrt(static_cast<double>(n));
    const Vector w = oracle::ridge(x / sn, y / sn, lam);
    const auto r = kernel_ridge_solve(gram(k, x), y, lam, 1e-18, SamplerConfig{8.0, 0.01, t});
    worst = std::max(worst, (kernel_predict(k, x, r.alpha, z) - z * w).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, fmt("max prediction difference %.2e over 6 fixtures", worst)};
}

// 13. Analytic gradients against central differences.
Outcome gradient_criterion() {
  double worst = 0.0;
  for (const LossSpec& loss : {square_loss(), logistic_loss()}) {
    Matrix x = oracle::gaussian_matrix(40, 7, 1300);
    for (Index i = 0; i < 40; ++i) x.row(i) /= std::max(1.0, x.row(i).norm());
    Vector y = oracle::gaussian_vector(40, 1301);
    if (loss.name == "logistic") y = y.array().sign().matrix();
    const RLMProblem p(scale_rows(DataMatrix::dense(x)), y, 0.03, kInf, loss);
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Vector w = 0.5 * oracle::gaussian_vector(7, 1310 + s);
      const Vector g = rlm_gradient(p, w);
      const Vector fd = oracle::central_difference([&](const Vector& v) { return rlm_value(p, v); }, w);
      worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-12));
    }
  }
  return {worst <= 1e-5, fmt("worst relative error %.2e over 20 probes", worst)};
}

// 14. Repeated CLI runs give byte-identical payloads.
Outcome determinism_criterion() {
  const std::string cli = SKETCHCOND_CLI;
  const std::string data = std::string(TEST_DATA_DIR) + "/ridge_small.csv";
  const std::vector<std::string> commands = {
      "solve --data " + data + " --lambda 1e-3 --eps 1e-8",
      "solve --data " + data + " --lambda 1e-3 --eps 1e-8 --auto-tune",
      "solve --data " + data + " --lambda 1e-3 --eps 1e-8 --kernel gaussian:0.5",
      "tune --data " + data + " --lambda 1e-4",
      "effdim --data " + data + " --lambda 1e-2 --m 4",
      "sketch --data " + data + " --lambda 1e-2 --eps 0.5 --check",
      "experiment stability --n 30 --d 5",
      "experiment risk-curve --d 10 --n-grid 20,40 --trials 20",
      "experiment effdim-expectation --d 10 --n 20 --lambda 0.01 --trials 100",
      "experiment lower-bound --d 10 --n-grid 10,30 --trials 20"};
  auto run = [&](const std::string& args) -> std::string {
    std::FILE* pipe = popen(("\"" + cli + "\" " + args + " 2>/dev/null").c_str(), "r");
    if (pipe == nullptr) return {};
    std::string out;
    char buf[4096];
    while (std::size_t k = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, k);
    if (pclose(pipe) != 0) return {};
    return nlohmann::json::parse(out).at("payload").dump();
  };
  int same = 0;
  std::string failed;
  for (const auto& c : commands) {
    const std::string a = run(c), b = run(c);
    if (!a.empty() && a == b) ++same;
    else failed += " [" + c.substr(0, c.find(' ')) + "]";
  }
  return {same == static_cast<int>(commands.size()),
          fmt("%d/%d commands byte-identical", same, static_cast<int>(commands.size())) + failed};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"leverage scores sum to d_lambda", leverage_identity},
      {"exact-score sampling is a spectral approximation", spectral_approximation},
      {"preconditioned gradient descent", preconditioned_gd_criterion},
      {"proximal point correctness and epochs", ppa_criterion},
      {"effective-dimension verifier", verifier_criterion},
      {"regularization tuner quality", tuner_criterion},
      {"stability inequality", stability_criterion},
      {"excess-risk bound", excess_risk_criterion},
      {"expected effective dimension", expected_effdim_criterion},
      {"lower-bound direction", lower_bound_criterion},
      {"sketch-and-solve", sketch_and_solve_criterion},
      {"kernel/primal agreement", kernel_criterion},
      {"gradient checks", gradient_criterion},
      {"CLI determinism", determinism_criterion},
  };
  const std::vector<double> time_limits = {10.0, 60.0, kInf, kInf, 60.0, kInf, kInf, kInf, kInf, kInf, kInf, kInf, kInf, kInf};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > time_limits[i]) {
      o.pass = false;
      o.detail += fmt(" over the %.0f s limit;", time_limits[i]);
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": " << o.detail
              << fmt(" (%.1f s)", secs) << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
