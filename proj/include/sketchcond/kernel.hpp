#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "sketchcond/leverage.hpp"
#include "sketchcond/sampling.hpp"
#include "sketchcond/spectrum.hpp"

namespace sketchcond {

/// linear: x^T z; gaussian: exp(-|x - z|^2 / (2 sigma^2)); polynomial: (x^T z + c0)^degree.
struct KernelSpec {
  enum class Kind { Linear, Gaussian, Polynomial };
  Kind kind = Kind::Linear;
  double sigma = 1.0;
  int degree = 2;
  double c0 = 1.0;

  double operator()(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& z) const {
    switch (kind) {
      case Kind::Linear:
        return x.dot(z);
      case Kind::Gaussian:
        return std::exp(-(x - z).squaredNorm() / (2.0 * sigma * sigma));
      case Kind::Polynomial:
        return std::pow(x.dot(z) + c0, degree);
    }
    return 0.0;
  }

  std::string name() const {
    auto num = [](double v) {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, r.ptr);
    };
    switch (kind) {
      case Kind::Linear:
        return "linear";
      case Kind::Gaussian:
        return "gaussian:" + num(sigma);
      case Kind::Polynomial:
        return "polynomial:" + std::to_string(degree) + ":" + num(c0);
    }
    return {};
  }

  /// Parses "linear", "gaussian:<sigma>" or "polynomial:<degree>[:<c0>]".
  static KernelSpec parse(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = text.find(':', start);
      parts.push_back(text.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    auto number = [&](const std::string& s) {
      double v = 0.0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw PreconditionError("bad kernel parameter '" + s + "'");
      return v;
    };
    KernelSpec k;
    if (parts[0] == "linear" && parts.size() == 1) {
      k.kind = Kind::Linear;
    } else if (parts[0] == "gaussian" && parts.size() == 2) {
      k.kind = Kind::Gaussian;
      k.sigma = number(parts[1]);
      if (!(k.sigma > 0.0)) throw DomainError("gaussian kernel needs sigma > 0");
    } else if (parts[0] == "polynomial" && (parts.size() == 2 || parts.size() == 3)) {
      k.kind = Kind::Polynomial;
      const double deg = number(parts[1]);
      if (!(deg >= 1.0) || deg != std::floor(deg)) throw DomainError("polynomial kernel needs an integer degree >= 1");
      k.degree = static_cast<int>(deg);
      if (parts.size() == 3) k.c0 = number(parts[2]);
      if (!(k.c0 >= 0.0)) throw DomainError("polynomial kernel needs c0 >= 0");
    } else {
      throw PreconditionError("unknown kernel '" + text + "' (expected linear, gaussian:<sigma>, polynomial:<deg>[:<c0>])");
    }
    return k;
  }
};

struct GramMatrix {
  Matrix K;
  std::string kernel_name;
  double jitter = 0.0;
  std::vector<std::string> warnings;

  Index n() const { return K.rows(); }
};

/// Cross kernel matrix k(x_i, z_j) between the rows of X and Z.
inline Matrix kernel_cross(const KernelSpec& k, const Matrix& x, const Matrix& z) {
  detail::require(x.cols() == z.cols(), "kernel inputs have different dimensions");
  if (k.kind == KernelSpec::Kind::Linear) return x * z.transpose();
  Matrix out(x.rows(), z.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < z.rows(); ++j) out(i, j) = k(x.row(i).transpose(), z.row(j).transpose());
  }
  return out;
}

/// K_ij = k(x_i, x_j) over the rows of the raw instances. A minimum eigenvalue
/// below -1e-8 trace/n is repaired by adding jitter to the diagonal.
inline GramMatrix gram(const KernelSpec& k, const Matrix& x) {
  detail::require(x.rows() >= 1 && x.cols() >= 1, "empty input: kernel needs at least one instance");
  GramMatrix g;
  g.kernel_name = k.name();
  g.K = kernel_cross(k, x, x);
  g.K = 0.5 * (g.K + g.K.transpose()).eval();
  const double n = static_cast<double>(g.n());
  const double tol = 1e-8 * std::abs(g.K.trace()) / n;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.K, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on the Gram matrix");
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -tol) {
    g.jitter = -min_ev + tol;
    g.K.diagonal().array() += g.jitter;
    g.warnings.push_back("Gram matrix was not PSD; added diagonal jitter " + std::to_string(g.jitter));
  }
  return g;
}

/// d_lambda of (1/n) K, which equals that of the primal empirical covariance.
inline double kernel_effective_dimension(const GramMatrix& g, double lambda) {
  return effective_dimension(symmetric_spectrum(g.K / static_cast<double>(g.n())), lambda);
}

namespace detail {

/// Ridge leverage estimates (1/(n lambda)) (K_ii - K_iJ W (W K_JJ W + n lambda I)^{-1} W K_Ji)
/// for the weighted column subset J. With J empty these are K_ii / (n lambda).
inline Vector kernel_sketched_scores(const Matrix& k, double lambda, const std::vector<Index>& cols,
                                     const std::vector<double>& weights) {
  const Index n = k.rows();
  const double nl = static_cast<double>(n) * lambda;
  Vector out = k.diagonal() / nl;
  if (cols.empty()) return out;
  const Index s = static_cast<Index>(cols.size());
  Matrix c(n, s);
  for (Index j = 0; j < s; ++j) c.col(j) = k.col(cols[static_cast<std::size_t>(j)]) * weights[static_cast<std::size_t>(j)];
  Matrix inner(s, s);
  for (Index a = 0; a < s; ++a) {
    for (Index b = 0; b < s; ++b) inner(a, b) = c(cols[static_cast<std::size_t>(a)], b) * weights[static_cast<std::size_t>(a)];
  }
  inner = 0.5 * (inner + inner.transpose()).eval();
  inner.diagonal().array() += nl;
  const Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) throw NumericalError("kernel leverage factorization failed");
  const Matrix sol = llt.solve(c.transpose());
  for (Index i = 0; i < n; ++i) out(i) = std::max(0.0, (k(i, i) - c.row(i).dot(sol.col(i))) / nl);
  return out;
}

}  // namespace detail

/// Leverage overestimates of the kernelized rows, refined by column sampling in
/// the same way as the primal overestimates.
inline LeverageEstimates kernel_leverage_overestimates(const GramMatrix& g, double lambda, const SamplerConfig& cfg) {
  detail::require_lambda(lambda);
  const Index n = g.n();
  LeverageEstimates u;
  u.lambda = lambda;
  u.kind = EstimateKind::Overestimate;
  u.dim = n;
  const Vector init = detail::kernel_sketched_scores(g.K, lambda, {}, {});
  u.values.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) u.values[static_cast<std::size_t>(i)] = std::min(1.0, init(i));
  const int max_rounds = std::max(2, 2 * static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<Index>(n, 2))))));
  for (int round = 0; round < max_rounds; ++round) {
    const double before = u.total();
    const SamplingMatrix s = undersample(u, 0.5, 1.0, cfg.with_seed(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(round))));
    const Vector q = detail::kernel_sketched_scores(g.K, lambda, s.indices, s.weights);
    for (Index i = 0; i < n; ++i) {
      auto& v = u.values[static_cast<std::size_t>(i)];
      v = std::min(v, q(i));
    }
    if (u.total() >= 0.5 * before) return u;
  }
  return u;
}

struct KernelSolveResult {
  Vector alpha;
  int iterations = 0;
  Index columns = 0;  ///< Nystrom columns in the preconditioner
  double gap_bound = 0.0;
};

/// Iteration cap reached; carries the best dual iterate.
class KernelIterationError : public NumericalError {
 public:
  KernelIterationError(const std::string& what, Vector best) : NumericalError(what), best_(std::move(best)) {}
  const Vector& best() const { return best_; }

 private:
  Vector best_;
};

/// Solves (K + n lambda I) alpha = y by conjugate gradients preconditioned with a
/// Nystrom approximation built on leverage-sampled columns. Stops when the
/// primal objective gap of w = Phi^T alpha, at most |r|^2 / (8 n^2 lambda),
/// is below eps.
inline KernelSolveResult kernel_ridge_solve(const GramMatrix& g, const Vector& y, double lambda, double eps,
                                            const SamplerConfig& cfg, int max_iterations = 10000) {
  detail::require_lambda(lambda);
  detail::require(y.size() == g.n(), "label length does not match the Gram matrix");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const Index n = g.n();
  const double nl = static_cast<double>(n) * lambda;

  const LeverageEstimates u = kernel_leverage_overestimates(g, lambda, cfg.with_seed(derive_seed(cfg.rng_seed, 1)));
  const SamplingMatrix s = sample(u, 0.5, cfg.with_seed(derive_seed(cfg.rng_seed, 2)));
  const Index m = static_cast<Index>(s.indices.size());

  // P^{-1} = (1/(n lambda)) [I - C (n lambda K_w + C^T C)^{-1} C^T], C = K_{:,J} W, K_w = W K_JJ W.
  Matrix c(n, m);
  for (Index j = 0; j < m; ++j) c.col(j) = g.K.col(s.indices[static_cast<std::size_t>(j)]) * s.weights[static_cast<std::size_t>(j)];
  Matrix kw(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) kw(a, b) = c(s.indices[static_cast<std::size_t>(a)], b) * s.weights[static_cast<std::size_t>(a)];
  }
  Matrix inner = nl * 0.5 * (kw + kw.transpose()) + c.transpose() * c;
  if (m > 0) inner.diagonal().array() += 1e-12 * std::max(1.0, inner.diagonal().cwiseAbs().maxCoeff());
  const Eigen::LDLT<Matrix> ldlt(inner);
  if (m > 0 && ldlt.info() != Eigen::Success) throw NumericalError("Nystrom preconditioner factorization failed");
  auto precondition = [&](const Vector& r) -> Vector {
    if (m == 0) return r / nl;
    return (r - c * ldlt.solve(c.transpose() * r)) / nl;
  };
  auto apply = [&](const Vector& v) -> Vector { return g.K * v + nl * v; };
  auto gap = [&](const Vector& r) { return r.squaredNorm() / (8.0 * static_cast<double>(n) * nl); };

  KernelSolveResult out;
  out.columns = m;
  Vector alpha = Vector::Zero(n);
  Vector r = y;
  Vector z = precondition(r);
  Vector p = z;
  double rz = r.dot(z);
  Vector best = alpha;
  double best_gap = gap(r);
  while (true) {
    if (best_gap <= eps) {
      // The recursive residual can drift below the true one; confirm before stopping.
      r = y - apply(best);
      best_gap = gap(r);
      if (best_gap <= eps) break;
      alpha = best;
      z = precondition(r);
      p = z;
      rz = r.dot(z);
    }
    if (out.iterations >= max_iterations) throw KernelIterationError("kernel ridge solver hit its iteration cap", best);
    const Vector ap = apply(p);
    const double step = rz / p.dot(ap);
    alpha += step * p;
    r -= step * ap;
    ++out.iterations;
    if (out.iterations % 50 == 0) r = y - apply(alpha);  // limit drift in the recursive residual
    const double cur = gap(r);
    if (cur < best_gap) {
      best_gap = cur;
      best = alpha;
    }
    z = precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  out.alpha = std::move(best);
  out.gap_bound = gap(y - apply(out.alpha));
  return out;
}

/// Predictions sum_i alpha_i k(x_i, z) for the rows z of Z.
inline Vector kernel_predict(const KernelSpec& k, const Matrix& train, const Vector& alpha, const Matrix& test) {
  return kernel_cross(k, test, train) * alpha;
}

// Gram cache: uint64 n, uint32 name length, name bytes, then n*n row-major
// float64 values, all little-endian.

namespace detail {

template <typename T>
void write_le(std::ostream& os, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(v);
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  os.write(buf, sizeof buf);
}

template <typename T>
T read_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof buf)) throw ParseError("truncated Gram cache", 0);
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline void write_gram_cache(const std::string& path, const GramMatrix& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw PreconditionError("cannot open '" + path + "' for writing");
  detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(g.n()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.kernel_name.size()));
  os.write(g.kernel_name.data(), static_cast<std::streamsize>(g.kernel_name.size()));
  for (Index i = 0; i < g.n(); ++i) {
    for (Index j = 0; j < g.n(); ++j) detail::write_le<double>(os, g.K(i, j));
  }
  if (!os) throw PreconditionError("failed writing '" + path + "'");
}

inline GramMatrix read_gram_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PreconditionError("cannot open '" + path + "'");
  GramMatrix g;
  const auto n = detail::read_le<std::uint64_t>(is);
  const auto len = detail::read_le<std::uint32_t>(is);
  if (n == 0 || n > (1u << 20) || len > 4096) throw ParseError("corrupt Gram cache header", 0);
  g.kernel_name.resize(len);
  if (!is.read(g.kernel_name.data(), len)) throw ParseError("truncated Gram cache", 0);
  g.K.resize(static_cast<Index>(n), static_cast<Index>(n));
  for (Index i = 0; i < g.K.rows(); ++i) {
    for (Index j = 0; j < g.K.cols(); ++j) g.K(i, j) = detail::read_le<double>(is);
  }
  return g;
}

}  // namespace sketchcond
