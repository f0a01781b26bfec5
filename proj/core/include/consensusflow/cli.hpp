#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "consensusflow/schema.hpp"

namespace consensusflow {

// Exit codes shared by the commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitNotOptimal = 3;

// Flag-level overrides layered on top of a config's params. The output
// directory resolves as: CONSENSUS_FLOW_OUT environment variable, then the
// --out-dir flag, then the config's outputs.dir.
struct CommonOverrides {
  std::optional<double> h;
  std::optional<double> alpha;
  std::optional<double> t_end;
  std::optional<double> stop_tol;
  std::optional<std::string> scheme;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

struct RunCommand {
  std::string config_path;
  CommonOverrides common;
  // "whole" replaces every agent's constraint set with the whole space.
  std::optional<std::string> set_override;
};

struct ReproCommand {
  CommonOverrides common;
  bool unconstrained = false;
};

struct CheckCommand {
  std::string config_path;
  double at = 0.0;
};

struct OracleCommand {
  std::string config_path;
  double resolution = 1e-3;
};

struct SweepCommand {
  std::string config_path;
  std::string grid_spec;  // "alpha=0.5,1,2;h=1e-3,2e-3;scheme=projected-euler;seed=0"
  int jobs = 1;
  CommonOverrides common;
};

// Integrates a config's instance and writes trace.csv, summary.json, and
// (per the config's outputs) lyapunov.csv and SVG charts. Returns kExitOk
// when the run converged, kExitNotConverged when the horizon was reached
// first, kExitInputError on malformed input.
int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);

// Runs the built-in five-agent benchmark instance and writes
// fig1.csv/fig1.svg (primal trajectories), fig2.csv/fig2.svg (multiplier
// trajectories), fig3.csv/fig3.svg (Lyapunov series), and summary.json.
// Prints a PASS/FAIL line for the expected endpoint behavior.
int cmd_repro(const ReproCommand& cmd, std::ostream& out, std::ostream& err);

// Stationarity check of a scalar instance at a point: prints the total-cost
// subdifferential, the feasible-interval normal cone, the verdict, and (for
// an optimal point) the reconstructed multiplier and its membership
// residual. Returns kExitOk / kExitNotOptimal / kExitInputError.
int cmd_check(const CheckCommand& cmd, std::ostream& out, std::ostream& err);

// Prints the brute-force reference solution for a config as JSON (grid scan
// when the feasible interval is bounded and scalar, projected subgradient
// descent otherwise).
int cmd_oracle(const OracleCommand& cmd, std::ostream& out, std::ostream& err);

// Runs a grid of (alpha, h, scheme, seed) cells and writes sweep.csv,
// ordered by cell index and byte-identical for any --jobs value. Returns
// kExitOk if at least one cell succeeded.
int cmd_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err);

// The built-in five-agent benchmark: deadzone costs centered at 1..5 with
// halfwidth 5, interval constraints [i-12, i-2] (replaced by the whole line
// when `unconstrained`), the fixed 5x5 communication graph, initial points
// at the interval midpoints, zero multipliers, unit gain, and a 60-second
// horizon.
ExperimentConfig builtin_experiment_config(bool unconstrained);

}  // namespace consensusflow
