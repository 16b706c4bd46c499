// Command-line front end: solve, tune, effdim, sketch and experiment.

#include <CLI11.hpp>

#include <iostream>

#include "sketchcond/cli.hpp"

namespace {

void add_data_options(CLI::App* app, sketchcond::RunConfig& cfg) {
  app->add_option("--data", cfg.data_path, "Input data file")->required();
  app->add_option("--format", cfg.format, "Input format")->check(CLI::IsMember({"csv", "triplet", "libsvm"}));
  app->add_option("--labels", cfg.labels_path, "Label file, one value per line (triplet format)");
}

void add_sampler_options(CLI::App* app, sketchcond::RunConfig& cfg) {
  app->add_option("--seed", cfg.seed, "Random seed (SKETCHCOND_SEED overrides)");
  app->add_option("--c", cfg.c, "Oversampling constant");
  app->add_option("--delta", cfg.delta, "Failure probability");
}

}  // namespace

int main(int argc, char** argv) {
  sketchcond::RunConfig cfg;
  CLI::App app{"Sketch-to-precondition solvers and effective-dimension tools"};
  app.require_subcommand(1);
  app.add_option("--output,-o", cfg.output, "Write the JSON report here instead of stdout");
  app.add_option("--threads", cfg.threads, "Internal threads")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", std::string(sketchcond::kVersion));

  auto* solve = app.add_subcommand("solve", "Regularized loss minimization");
  add_data_options(solve, cfg);
  add_sampler_options(solve, cfg);
  solve->add_option("--loss", cfg.loss)->check(CLI::IsMember({"square", "logistic"}));
  solve->add_option("--lambda", cfg.lambda)->required();
  solve->add_option("--eps", cfg.eps);
  solve->add_option("--B", cfg.B, "Diameter of the feasible ball (unconstrained by default)");
  auto* inner = solve->add_option("--lambda-inner", cfg.lambda_inner, "Inner regularizer for the proximal point loop");
  solve->add_flag("--auto-tune", cfg.auto_tune, "Choose the inner regularizer automatically")->excludes(inner);
  solve->add_option("--kernel", cfg.kernel, "linear, gaussian:<sigma> or polynomial:<degree>[:<c0>]");
  solve->add_option("--gram-cache", cfg.gram_cache, "Binary Gram matrix cache");

  auto* tune = app.add_subcommand("tune", "Choose the inner regularizer");
  add_data_options(tune, cfg);
  add_sampler_options(tune, cfg);
  tune->add_option("--lambda", cfg.lambda)->required();

  auto* effdim = app.add_subcommand("effdim", "Test d_lambda <= m");
  add_data_options(effdim, cfg);
  add_sampler_options(effdim, cfg);
  effdim->add_option("--lambda", cfg.lambda)->required();
  effdim->add_option("--m", cfg.m)->required();
  effdim->add_flag("--exact", cfg.exact, "Also report the exact effective dimension");

  auto* sketch = app.add_subcommand("sketch", "Ridge leverage score row sampling");
  add_data_options(sketch, cfg);
  add_sampler_options(sketch, cfg);
  sketch->add_option("--lambda", cfg.lambda)->required();
  sketch->add_option("--eps", cfg.eps)->required();
  sketch->add_flag("--check", cfg.check, "Verify the spectral approximation exactly");

  auto* exp = app.add_subcommand("experiment", "Statistical experiments");
  exp->add_option("kind", cfg.subcommand, "stability, risk-curve, effdim-expectation or lower-bound")
      ->required()
      ->check(CLI::IsMember({"stability", "risk-curve", "effdim-expectation", "lower-bound"}));
  add_sampler_options(exp, cfg);
  exp->add_option("--profile", cfg.profile, "poly:C:p, exp:C or explicit:v1,v2,...");
  exp->add_option("--d", cfg.d);
  exp->add_option("--n", cfg.n);
  exp->add_option("--n-grid", cfg.n_grid)->delimiter(',');
  exp->add_option("--trials", cfg.trials);
  exp->add_option("--lambda", cfg.lambda);
  exp->add_option("--B", cfg.B);
  exp->add_option("--table", cfg.table, "Write the result table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  return sketchcond::run_and_report(cfg, std::cout, std::cerr);
}
