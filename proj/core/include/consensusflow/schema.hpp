#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "consensusflow/dynamics.hpp"

namespace consensusflow {

struct RunParams {
  double alpha = 1.0;
  double h = kDefaultStepSize;
  double t_end = kDefaultTimeEnd;
  double stop_tol = kDefaultStopTol;
  double k_fraction = 0.5;
  Scheme scheme = Scheme::ProjectedEuler;
  std::size_t record_stride = 10;
  std::uint64_t seed = 0;
};

struct OutputOptions {
  std::string dir = ".";
  bool emit_svg = true;
  bool emit_lyapunov = false;
};

// Parsed experiment description: per-agent cost/set/initial data plus graph
// and run parameters. Kept separate from ProblemInstance so overrides can
// be applied between parsing and validation.
struct ExperimentConfig {
  std::vector<AgentSpec> agents;
  Eigen::MatrixXd adjacency;
  RunParams params;
  OutputOptions outputs;
};

// Parses and validates a JSON experiment description. Every rejection is a
// ConfigError carrying a JSON-pointer-style path to the offending field
// (e.g. "/agents/2/set/lo"). Box bounds accept the strings "inf"/"-inf".
ExperimentConfig parse_config(const std::string& json_text);

// parse_config over the contents of a file; the file's path is prefixed to
// error messages.
ExperimentConfig load_config(const std::string& path);

// Builds the validated runtime instance (graph + agents + gain) from a
// config. Infeasible initial points and malformed graphs surface as
// ConfigError with pointer paths.
ProblemInstance build_instance(const ExperimentConfig& config);

}  // namespace consensusflow
