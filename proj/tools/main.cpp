// Command-line front end for the consensusflow library.
//
// Subcommands:
//   run     simulate an instance described by a JSON config
//   repro   run the built-in five-agent experiment
//   check   test a candidate scalar optimum against the stationarity condition
//   oracle  solve an instance with a reference method and print the optimum
//   sweep   run a parameter grid and tabulate outcomes

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "consensusflow/cli.hpp"

namespace cf = consensusflow;

namespace {

void add_common_flags(CLI::App* app, cf::CommonOverrides& common, bool with_alpha = true) {
  // The step-size option is spelled --h, so the short help alias -h must go.
  app->set_help_flag("--help", "print help and exit");
  app->add_option("--h", common.h, "integration step size");
  if (with_alpha) app->add_option("--alpha", common.alpha, "coupling gain");
  app->add_option("--t-end", common.t_end, "simulated time horizon");
  app->add_option("--stop-tol", common.stop_tol, "early-stop residual tolerance");
  app->add_option("--scheme", common.scheme,
                  "integration scheme: projected-euler or tangent");
  app->add_option("--seed", common.seed, "seed recorded in run metadata");
  app->add_option("--out-dir", common.out_dir,
                  "output directory (CONSENSUS_FLOW_OUT overrides)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed constrained consensus optimization simulator"};
  app.require_subcommand(1);

  cf::RunCommand run_cmd;
  CLI::App* run = app.add_subcommand("run", "simulate a configured instance");
  run->add_option("--config", run_cmd.config_path, "JSON instance description")->required();
  add_common_flags(run, run_cmd.common);
  run->add_option("--set-override", run_cmd.set_override,
                  "replace every agent constraint (supported: whole)");

  cf::ReproCommand repro_cmd;
  CLI::App* repro = app.add_subcommand("repro", "run the built-in five-agent experiment");
  add_common_flags(repro, repro_cmd.common);
  repro->add_flag("--unconstrained", repro_cmd.unconstrained,
                  "drop the interval constraints");

  cf::CheckCommand check_cmd;
  CLI::App* check = app.add_subcommand("check", "verify a candidate scalar optimum");
  check->add_option("--config", check_cmd.config_path, "JSON instance description")
      ->required();
  check->add_option("--at", check_cmd.at, "candidate optimum value")->required();

  cf::OracleCommand oracle_cmd;
  CLI::App* oracle = app.add_subcommand("oracle", "solve with a reference method");
  oracle->add_option("--config", oracle_cmd.config_path, "JSON instance description")
      ->required();
  oracle->add_option("--resolution", oracle_cmd.resolution, "grid resolution");

  cf::SweepCommand sweep_cmd;
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
  sweep->add_option("--config", sweep_cmd.config_path, "JSON instance description")
      ->required();
  sweep->add_option("--grid", sweep_cmd.grid_spec,
                    "grid spec, e.g. alpha=0.5,1;h=1e-3,2e-3;scheme=tangent;seed=0,1");
  sweep->add_option("--jobs", sweep_cmd.jobs, "worker thread count");
  add_common_flags(sweep, sweep_cmd.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cf::kExitOk : cf::kExitInputError;
  }

  if (run->parsed()) return cf::cmd_run(run_cmd, std::cout, std::cerr);
  if (repro->parsed()) return cf::cmd_repro(repro_cmd, std::cout, std::cerr);
  if (check->parsed()) return cf::cmd_check(check_cmd, std::cout, std::cerr);
  if (oracle->parsed()) return cf::cmd_oracle(oracle_cmd, std::cout, std::cerr);
  if (sweep->parsed()) return cf::cmd_sweep(sweep_cmd, std::cout, std::cerr);
  return cf::kExitInputError;
}
