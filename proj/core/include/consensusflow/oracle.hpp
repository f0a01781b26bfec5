#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "consensusflow/dynamics.hpp"

namespace consensusflow {

// Reference solution from a brute-force solver, for grounding the
// distributed runs against an independent method.
struct OracleResult {
  Eigen::VectorXd x_opt;
  double f_opt = 0.0;
  std::string method;          // "grid-1d" or "centralized-projected-subgradient"
  double resolution = 0.0;     // grid method
  std::size_t iterations = 0;  // subgradient method
  // Grid method only, and deliberately conservative: set when every
  // near-minimal candidate sits within a couple of grid cells of the
  // minimizer. Flat-bottomed costs report false.
  bool unique_minimizer = false;
};

// Exhaustive scan of the summed cost over the (bounded) feasible interval:
// endpoints, every cost breakpoint inside, and a uniform grid at the given
// resolution. Exact for piecewise-linear costs since their minimizers are
// breakpoints or endpoints. Ties resolve to the leftmost minimizer. Throws
// UnboundedFeasibleSet or EmptyIntersection.
OracleResult grid_solve_1d(const ProblemInstance& p, double resolution);

// Projected subgradient descent on the summed cost over the aggregate
// feasible set, x <- P(x - eta_t g), eta_t = eta0 / sqrt(t+1), returning
// the best iterate seen. Works for any dimension and set variant.
OracleResult centralized_solve(const ProblemInstance& p, std::size_t iters, double eta0);

// Seeded random scalar instance for equivalence testing: 2..5 agents on a
// random connected unit-weight graph, interval constraints with a common
// interior, and costs summing 1..3 piecewise-linear primitives with
// breakpoints in (-10, 10). Initial points at the interval midpoints,
// multipliers at zero, unit gain.
ProblemInstance random_instance_1d(std::uint64_t seed);

}  // namespace consensusflow
