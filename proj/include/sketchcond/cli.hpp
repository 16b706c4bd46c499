#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sketchcond/effdim.hpp"
#include "sketchcond/experiments.hpp"
#include "sketchcond/io.hpp"
#include "sketchcond/kernel.hpp"
#include "sketchcond/solver.hpp"
#include "sketchcond/spectral_check.hpp"
#include "sketchcond/version.hpp"

namespace sketchcond {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct RunConfig {
  std::string command;     ///< solve, tune, effdim, sketch or experiment
  std::string subcommand;  ///< experiment kind
  std::string data_path;
  std::string labels_path;
  std::string format = "csv";
  std::string loss = "square";
  double lambda = 1e-3;
  double B = std::numeric_limits<double>::infinity();  ///< diameter of the feasible ball
  double eps = 1e-6;
  std::optional<double> lambda_inner;
  bool auto_tune = false;
  std::string kernel;
  std::string gram_cache;
  std::optional<double> m;
  bool exact = false;
  bool check = false;
  std::uint64_t seed = kDefaultSeed;
  int trials = 200;
  std::string output;  ///< report path, stdout when empty
  std::string table;   ///< CSV table path for experiments
  double c = 8.0;
  double delta = 0.01;
  int threads = 1;
  std::string profile = "poly:1:2";
  Index d = 20;
  Index n = 50;
  std::vector<Index> n_grid = {50, 100, 200, 400};
};

/// Applies SKETCHCOND_SEED when set.
inline void apply_environment(RunConfig& cfg) {
  if (const char* env = std::getenv("SKETCHCOND_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw PreconditionError("SKETCHCOND_SEED is not an integer");
    cfg.seed = v;
  }
}

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j{{"command", c.command},
                   {"subcommand", c.subcommand},
                   {"data", c.data_path},
                   {"labels", c.labels_path},
                   {"format", c.format},
                   {"loss", c.loss},
                   {"lambda", c.lambda},
                   {"B", number_or_null(c.B)},
                   {"eps", c.eps},
                   {"lambda_inner", c.lambda_inner ? nlohmann::json(*c.lambda_inner) : nlohmann::json(nullptr)},
                   {"auto_tune", c.auto_tune},
                   {"kernel", c.kernel},
                   {"gram_cache", c.gram_cache},
                   {"m", c.m ? nlohmann::json(*c.m) : nlohmann::json(nullptr)},
                   {"exact", c.exact},
                   {"check", c.check},
                   {"seed", c.seed},
                   {"trials", c.trials},
                   {"c", c.c},
                   {"delta", c.delta},
                   {"threads", c.threads},
                   {"profile", c.profile},
                   {"d", c.d},
                   {"n", c.n},
                   {"n_grid", c.n_grid}};
  return j;
}

struct RunReport {
  nlohmann::json config;
  nlohmann::json payload;
  nlohmann::json timings;
  std::string table_csv;  ///< experiment table, empty otherwise

  nlohmann::json to_json() const {
    return nlohmann::json{{"version", kVersion}, {"config", config}, {"payload", payload}, {"timings", timings}};
  }
};

/// "poly:C:p", "exp:C" or "explicit:v1,v2,..." (the last ignores d).
inline DecayProfile parse_profile(const std::string& text, Index d) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  auto nums = [&](char sep) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= rest.size() && !rest.empty()) {
      const auto pos = rest.find(sep, start);
      out.push_back(detail::parse_double(std::string_view(rest).substr(start, pos == std::string::npos ? pos : pos - start), 0));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  };
  try {
    if (kind == "poly") {
      const auto v = nums(':');
      if (v.size() != 2) throw PreconditionError("poly profile needs C and p");
      return DecayProfile::polynomial(v[0], v[1], d);
    }
    if (kind == "exp") {
      const auto v = nums(':');
      if (v.size() != 1) throw PreconditionError("exp profile needs C");
      return DecayProfile::exponential(v[0], d);
    }
    if (kind == "explicit") return DecayProfile::explicit_list(nums(','));
  } catch (const ParseError&) {
    throw PreconditionError("cannot parse profile '" + text + "'");
  }
  throw PreconditionError("unknown profile '" + text + "' (expected poly:C:p, exp:C or explicit:v1,v2,...)");
}

namespace detail {

inline SamplerConfig sampler_config(const RunConfig& c) {
  SamplerConfig s;
  s.c = c.c;
  s.delta = c.delta;
  s.rng_seed = c.seed;
  s.validate();
  return s;
}

inline Dataset load_for(const RunConfig& c) {
  if (c.data_path.empty()) throw PreconditionError("--data is required for '" + c.command + "'");
  return load_dataset(c.data_path, parse_format(c.format), c.labels_path);
}

inline nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline std::string csv_table(const nlohmann::json& rows) {
  std::ostringstream os;
  if (rows.empty()) return {};
  bool first = true;
  for (const auto& [key, _] : rows.front().items()) {
    os << (first ? "" : ",") << key;
    first = false;
  }
  os << '\n';
  for (const auto& row : rows) {
    first = true;
    for (const auto& [_, v] : row.items()) {
      os << (first ? "" : ",");
      if (v.is_number_float()) os << format_double(v.get<double>());
      else if (v.is_string()) os << v.get<std::string>();
      else os << v.dump();
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json run_solve(const RunConfig& c) {
  if (!c.kernel.empty()) {
    const KernelSpec spec = KernelSpec::parse(c.kernel);
    if (c.loss != "square") throw PreconditionError("kernel solves support the square loss only");
    const Dataset ds = load_for(c);
    if (ds.labels.size() == 0) throw PreconditionError("solve needs labels");
    GramMatrix g;
    if (!c.gram_cache.empty() && std::filesystem::exists(c.gram_cache)) {
      g = read_gram_cache(c.gram_cache);
      if (g.n() != ds.x.rows() || g.kernel_name != spec.name()) throw PreconditionError("Gram cache does not match the data");
    } else {
      g = gram(spec, ds.x.to_dense());
      if (!c.gram_cache.empty()) write_gram_cache(c.gram_cache, g);
    }
    const KernelSolveResult r = kernel_ridge_solve(g, ds.labels, c.lambda, c.eps, sampler_config(c));
    const Vector fitted = g.K * r.alpha;
    const double n = static_cast<double>(g.n());
    const double objective = 0.5 * (fitted - ds.labels).squaredNorm() / n + 0.5 * c.lambda * r.alpha.dot(fitted);
    return nlohmann::json{{"kernel", g.kernel_name},
                          {"dual_coefficients", vector_json(r.alpha)},
                          {"objective", objective},
                          {"iterations", r.iterations},
                          {"nystrom_columns", r.columns},
                          {"gap_bound", r.gap_bound},
                          {"effective_dimension", kernel_effective_dimension(g, c.lambda)},
                          {"warnings", g.warnings}};
  }

  const Dataset ds = load_for(c);
  if (ds.labels.size() == 0) throw PreconditionError("solve needs labels");
  const RLMProblem p(scale_rows(ds.x), ds.labels, c.lambda, c.B, loss_by_name(c.loss));
  const SamplerConfig cfg = sampler_config(c);
  Vector w;
  nlohmann::json extra;
  SolveReport report;
  if (c.auto_tune) {
    auto [sol, r] = solve_auto(p, c.eps, cfg);
    w = std::move(sol);
    report = r.solve;
    extra["tuning"] = r.tuning;
  } else {
    const double inner = c.lambda_inner.value_or(c.lambda);
    auto [sol, r] = ppa_solve(p, inner, c.eps, cfg);
    w = std::move(sol);
    report = r;
  }
  nlohmann::json out{{"weights", vector_json(w)},
                     {"objective", rlm_value(p, w)},
                     {"lambda_inner", report.lambda_inner},
                     {"report", report},
                     {"max_abs_prediction", max_abs_prediction(p, w)}};
  if (out["max_abs_prediction"].get<double>() > 1.0) {
    out["warnings"] = {"predictions exceed 1 in magnitude; loss curvature constants may not hold"};
  }
  if (!extra.is_null()) out.update(extra);
  return out;
}

inline nlohmann::json run_tune(const RunConfig& c) {
  const Dataset ds = load_for(c);
  return tune_lambda(scale_rows(ds.x), c.lambda, sampler_config(c));
}

inline nlohmann::json run_effdim(const RunConfig& c) {
  if (!c.m) throw PreconditionError("effdim needs --m");
  const Dataset ds = load_for(c);
  const DataMatrix a = scale_rows(ds.x);
  nlohmann::json out{{"verdict", verify_effdim_bound(a, c.lambda, *c.m, sampler_config(c))}};
  if (c.exact) out["exact_effective_dimension"] = effective_dimension(covariance_spectrum(a), c.lambda);
  return out;
}

inline nlohmann::json run_sketch(const RunConfig& c) {
  const Dataset ds = load_for(c);
  const DataMatrix a = scale_rows(ds.x);
  const SamplerConfig cfg = sampler_config(c);
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw DomainError("sketch eps must lie in (0,1)");
  const LeverageEstimates u = compute_overestimates(a, c.lambda, cfg.with_seed(derive_seed(cfg.rng_seed, 1)));
  const SamplingMatrix s = sample(u, c.eps, cfg.with_seed(derive_seed(cfg.rng_seed, 2)));
  nlohmann::json out{{"sketch", s}, {"kept", s.kept()}, {"overestimate_mass", u.total()}};
  if (c.check) out["spectral_approximation"] = check_spectral_approximation(a, s, c.lambda, c.eps);
  return out;
}

inline nlohmann::json run_experiment(const RunConfig& c, std::string& table) {
  const SamplerConfig cfg = sampler_config(c);
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json out;
  if (c.subcommand == "stability") {
    const double diameter = std::isfinite(c.B) ? c.B : 2.0;
    Rng rng(derive_seed(cfg.rng_seed, 0x57AB));
    auto draw_point = [&] {
      Vector x(c.d);
      for (Index j = 0; j < c.d; ++j) x(j) = rng.normal();
      return Vector(x * (rng.uniform() / x.norm()));
    };
    Matrix x(c.n, c.d);
    Vector y(c.n);
    for (Index i = 0; i < c.n; ++i) {
      x.row(i) = draw_point().transpose();
      y(i) = 2.0 * rng.uniform() - 1.0;
    }
    const Vector x_new = draw_point();
    const double y_new = 2.0 * rng.uniform() - 1.0;
    const RLMProblem p(scale_rows(DataMatrix::dense(x)), y, c.lambda, diameter, square_loss());
    const auto records = stability_audit(p, x_new, y_new, cfg);
    int violations = 0;
    for (const auto& r : records) {
      rows.push_back(r);
      violations += r.violated() ? 1 : 0;
    }
    const StabilityAggregate agg = stability_aggregate(records, p.loss);
    out = {{"violations", violations}, {"mean_delta", agg.mean_delta}, {"aggregate_bound", agg.bound}};
  } else if (c.subcommand == "risk-curve") {
    const double diameter = std::isfinite(c.B) ? c.B : 1.0;
    for (const auto& r : excess_risk_curve(parse_profile(c.profile, c.d), diameter, c.n_grid, c.trials, cfg)) rows.push_back(r);
  } else if (c.subcommand == "effdim-expectation") {
    out = effdim_expectation_check(parse_profile(c.profile, c.d), c.n, c.lambda, c.trials, cfg);
    rows.push_back(out);
  } else if (c.subcommand == "lower-bound") {
    const double radius = std::isfinite(c.B) ? c.B : 1.0;
    for (const Index n : c.n_grid) rows.push_back(lower_bound_experiment(parse_profile(c.profile, c.d), n, radius, c.trials, cfg));
  } else {
    throw PreconditionError("unknown experiment '" + c.subcommand +
                            "' (expected stability, risk-curve, effdim-expectation or lower-bound)");
  }
  out["rows"] = rows;
  table = csv_table(rows);
  return out;
}

}  // namespace detail

/// Dispatches one command. Throws PreconditionError or NumericalError on failure.
inline RunReport run(RunConfig config) {
  apply_environment(config);
  if (config.threads < 1) throw PreconditionError("--threads must be at least 1");
  Eigen::setNbThreads(config.threads);
  for (const std::string* path : {&config.data_path, &config.labels_path}) {
    if (!path->empty() && !std::filesystem::exists(*path)) throw PreconditionError("file not found: '" + *path + "'");
  }

  RunReport report;
  report.config = to_json(config);
  const auto start = std::chrono::steady_clock::now();
  if (config.command == "solve") report.payload = detail::run_solve(config);
  else if (config.command == "tune") report.payload = detail::run_tune(config);
  else if (config.command == "effdim") report.payload = detail::run_effdim(config);
  else if (config.command == "sketch") report.payload = detail::run_sketch(config);
  else if (config.command == "experiment") report.payload = detail::run_experiment(config, report.table_csv);
  else throw PreconditionError("unknown command '" + config.command + "'");
  report.timings["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// Runs and writes the report; returns the process exit code (0, 2 or 3).
inline int run_and_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const RunReport report = run(config);
    const std::string text = report.to_json().dump(2) + "\n";
    if (config.output.empty()) {
      out << text;
    } else {
      std::ofstream os(config.output);
      if (!os) throw PreconditionError("cannot write '" + config.output + "'");
      os << text;
    }
    if (!config.table.empty() && !report.table_csv.empty()) {
      std::ofstream ts(config.table);
      if (!ts) throw PreconditionError("cannot write '" + config.table + "'");
      ts << report.table_csv;
    }
    return 0;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace sketchcond
