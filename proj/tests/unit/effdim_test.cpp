#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sketchcond/effdim.hpp"

using namespace sketchcond;

namespace {

/// k unit rows e_0..e_{k-1} followed by zero rows; d_1 = k/2.
DataMatrix unit_rows(Index k, Index n) {
  Matrix a = Matrix::Zero(n, k);
  for (Index i = 0; i < k; ++i) a(i, i) = 1.0;
  return DataMatrix::dense(a, Scaling::Scaled);
}

/// Diagonal design with A^T A = diag(eig), each coordinate split over `copies` rows.
DataMatrix diagonal_design(const std::vector<double>& eig, Index copies) {
  const auto d = static_cast<Index>(eig.size());
  std::vector<Eigen::Triplet<double>> t;
  for (Index j = 0; j < d; ++j)
    for (Index c = 0; c < copies; ++c) t.emplace_back(j * copies + c, j, std::sqrt(eig[static_cast<std::size_t>(j)] / copies));
  return DataMatrix::from_triplets(d * copies, d, t, Scaling::Scaled);
}

struct GridPsi {
  double best = 0.0;
  double argmin = 0.0;
};

GridPsi exact_grid_psi(const std::vector<double>& eig, double nnz, double lambda) {
  const double d = static_cast<double>(eig.size());
  const int max_k = static_cast<int>(std::ceil(2.0 * std::log2(d)));
  GridPsi g{std::numeric_limits<double>::infinity(), lambda};
  for (int k = 0; k <= max_k; ++k) {
    const double lb = std::ldexp(lambda, k);
    const double dl = static_cast<double>(oracle::effdim(eig, lb));
    const double v = (lb / lambda) * (nnz + dl * dl * d);
    if (v < g.best) g = {v, lb};
  }
  return g;
}

double exact_psi(const std::vector<double>& eig, double nnz, double lambda, double lambda_prime) {
  const double dl = static_cast<double>(oracle::effdim(eig, lambda_prime));
  return (lambda_prime / lambda) * (nnz + dl * dl * static_cast<double>(eig.size()));
}

}  // namespace

TEST(Verifier, ZeroMatrixAcceptsImmediately) {
  const DataMatrix a = DataMatrix::dense(Matrix::Zero(10, 4), Scaling::Scaled);
  for (double m : {1.0, 3.0, 100.0}) {
    const EffDimVerdict v = verify_effdim_bound(a, 0.5, m, SamplerConfig{});
    EXPECT_EQ(v.decision, Decision::Accept);
    EXPECT_LE(v.rounds_used, 1);
    EXPECT_EQ(v.final_mass, 0.0);
    EXPECT_EQ(v.threshold_m, m);
  }
}

TEST(Verifier, AcceptsGenerousThreshold) {
  const Index k = 16;
  const DataMatrix a = unit_rows(k, 64);
  int accepts = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EffDimVerdict v = verify_effdim_bound(a, 1.0, 6.0 * k, SamplerConfig{8.0, 0.01, seed});
    if (v.decision == Decision::Accept) ++accepts;
  }
  EXPECT_GE(accepts, 95);
}

TEST(Verifier, RejectsTightThreshold) {
  const Index k = 16;
  const DataMatrix a = unit_rows(k, 64);
  int rejects = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const EffDimVerdict v = verify_effdim_bound(a, 1.0, k / 24.0, SamplerConfig{8.0, 0.01, seed});
    if (v.decision == Decision::Reject) ++rejects;
  }
  EXPECT_GE(rejects, 95);
}

TEST(Verifier, RoundBudgetAndHalving) {
  std::vector<double> eig;
  for (int i = 1; i <= 60; ++i) eig.push_back(1.0 / (static_cast<double>(i) * i));
  const DataMatrix a = diagonal_design(eig, 20);
  const double lam = 1e-3;
  const double dl = static_cast<double>(oracle::effdim(eig, lam));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const EffDimVerdict v = verify_effdim_bound(a, lam, 6.0 * dl, SamplerConfig{8.0, 0.01, seed});
    EXPECT_LE(v.rounds_used, verifier_round_budget(a.rows()));
    EXPECT_GE(v.final_mass, 0.0);
    if (v.decision == Decision::Accept) {
      for (std::size_t r = 1; r + 1 < v.mass_history.size(); ++r) EXPECT_LE(v.mass_history[r], 0.5 * v.mass_history[r - 1]);
    }
  }
}

TEST(Verifier, NeverAcceptsFarAboveThreshold) {
  std::vector<double> eig(40, 1.0);
  const DataMatrix a = diagonal_design(eig, 10);
  const double lam = 0.25;  // d = 32
  const double dl = static_cast<double>(oracle::effdim(eig, lam));
  const double m = dl / (6.0 * 1.5) * 0.99;
  int accepts = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    if (verify_effdim_bound(a, lam, m, SamplerConfig{8.0, 0.01, seed}).decision == Decision::Accept) ++accepts;
  EXPECT_LE(accepts, 5);
}

TEST(Verifier, DomainErrors) {
  const DataMatrix a = unit_rows(2, 3);
  EXPECT_THROW(verify_effdim_bound(a, 0.0, 1.0, SamplerConfig{}), DomainError);
  EXPECT_THROW(verify_effdim_bound(a, 1.0, 0.0, SamplerConfig{}), DomainError);
}

TEST(Psi, RatioOneAndZeroDimension) {
  const PsiBudget b{0.1, 500.0, 20.0};
  EXPECT_DOUBLE_EQ(psi(0.1, b, 3.0), 500.0 + 9.0 * 20.0);
  EXPECT_DOUBLE_EQ(psi(0.4, b, 0.0), 4.0 * 500.0);
}

TEST(Psi, IncreasingInLambdaPrime) {
  const PsiBudget b{1e-3, 100.0, 10.0};
  double prev = psi(1e-3, b, 2.0);
  for (double lp = 2e-3; lp < 1.0; lp *= 1.7) {
    const double cur = psi(lp, b, 2.0);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

TEST(Psi, DomainErrors) {
  const PsiBudget b{1.0, 10.0, 2.0};
  EXPECT_THROW(psi(0.5, b, 1.0), DomainError);
  EXPECT_THROW(psi(2.0, b, -1.0), DomainError);
}

TEST(Psi, TwoClusterSpectrumImprovesBySqrtD) {
  // A few unit eigenvalues, the rest at lambda; lambda' = sqrt(d) lambda.
  const int d = 4096;
  const double lam = 1e-4;
  std::vector<double> eig(d, lam);
  for (int i = 0; i < 4; ++i) eig[static_cast<std::size_t>(i)] = 1.0;
  const double nnz = 8.0 * d;  // o(d^2)
  const double lp = std::sqrt(static_cast<double>(d)) * lam;
  const PsiBudget b{lam, nnz, static_cast<double>(d)};
  const double slow = psi(lam, b, static_cast<double>(oracle::effdim(eig, lam)));
  const double fast = psi(lp, b, static_cast<double>(oracle::effdim(eig, lp)));
  const double ratio = slow / fast;
  EXPECT_GE(ratio, std::sqrt(static_cast<double>(d)) / 5.0);
  EXPECT_LE(ratio, std::sqrt(static_cast<double>(d)));
}

TEST(Tuner, HugeNnzReturnsLambda) {
  // nnz = n d >= d^3 for a dense 9 x 3 design.
  Matrix m = oracle::gaussian_matrix(9, 3, 1);
  const TuneResult r = tune_lambda(DataMatrix::dense(m, Scaling::Scaled), 0.05, SamplerConfig{});
  EXPECT_EQ(r.lambda, 0.05);
}

TEST(Tuner, ResultOnGridAndNearOptimal) {
  // Flat spectrum at lambda: d_{lambda'} = d lambda / (lambda + lambda').
  const Index d = 64;
  const double lam = 1e-2;
  const std::vector<double> eig(static_cast<std::size_t>(d), lam);
  const DataMatrix a = diagonal_design(eig, 4);
  const GridPsi g = exact_grid_psi(eig, static_cast<double>(a.nnz()), lam);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TuneResult r = tune_lambda(a, lam, SamplerConfig{8.0, 0.01, seed});
    const double k = std::log2(r.lambda / lam);
    EXPECT_NEAR(k, std::round(k), 1e-12);
    EXPECT_FALSE(r.trace.empty());
    if (exact_psi(eig, static_cast<double>(a.nnz()), lam, r.lambda) <= 4.0 * 36.0 * g.best) ++good;
  }
  EXPECT_GE(good, 18);
}

TEST(Tuner, Deterministic) {
  std::vector<double> eig;
  for (int i = 1; i <= 32; ++i) eig.push_back(1.0 / i);
  const DataMatrix a = diagonal_design(eig, 3);
  const TuneResult x = tune_lambda(a, 1e-3, SamplerConfig{8.0, 0.01, 9});
  const TuneResult y = tune_lambda(a, 1e-3, SamplerConfig{8.0, 0.01, 9});
  EXPECT_EQ(x.lambda, y.lambda);
  EXPECT_EQ(nlohmann::json(x).dump(), nlohmann::json(y).dump());
}

TEST(Tuner, TwoClusterSpectrumWithinContract) {
  // Four unit eigenvalues, the rest at lambda, d = 1024.
  const Index d = 1024;
  const double lam = 1e-4;
  std::vector<double> eig(static_cast<std::size_t>(d), lam);
  for (int i = 0; i < 4; ++i) eig[static_cast<std::size_t>(i)] = 1.0;
  const DataMatrix a = diagonal_design(eig, 2);
  const double nnz = static_cast<double>(a.nnz());
  const GridPsi g = exact_grid_psi(eig, nnz, lam);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TuneResult r = tune_lambda(a, lam, SamplerConfig{8.0, 0.01, seed});
    EXPECT_GT(r.lambda, lam);
    if (exact_psi(eig, nnz, lam, r.lambda) <= 4.0 * 36.0 * g.best) ++good;
  }
  EXPECT_GE(good, 9);
}
