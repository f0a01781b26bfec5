#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "consensusflow/funcs.hpp"
#include "consensusflow/network.hpp"
#include "consensusflow/sets.hpp"

namespace consensusflow {

inline constexpr double kDefaultStepSize = 1e-3;
inline constexpr double kDefaultStopTol = 1e-6;
inline constexpr double kDefaultTimeEnd = 100.0;
// Consecutive sub-threshold residuals required before a run stops.
inline constexpr int kStopStreak = 10;

struct AgentSpec {
  ConvexFunction cost;
  ConvexSet constraint;
  Eigen::VectorXd x0;
  Eigen::VectorXd lambda0;
};

// Full problem data: per-agent costs, local constraint sets, initial
// conditions, the communication graph, and the coupling gain.
class ProblemInstance {
 public:
  // Validates dimension agreement across agents and graph, x0 feasibility
  // (within 1e-12), and alpha > 0.
  ProblemInstance(std::vector<AgentSpec> agents, Network network, double alpha);

  Eigen::Index n() const { return network_.n(); }
  Eigen::Index q() const { return network_.q(); }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  const Network& network() const { return network_; }
  double alpha() const { return alpha_; }

  // Stacked initial conditions in R^{nq}.
  Eigen::VectorXd stacked_x0() const;
  Eigen::VectorXd stacked_lambda0() const;

 private:
  std::vector<AgentSpec> agents_;
  Network network_;
  double alpha_ = 1.0;
};

struct SystemState {
  double t = 0.0;
  Eigen::VectorXd x;       // stacked, feasible per agent
  Eigen::VectorXd lambda;  // stacked
};

// Per-step diagnostics. xdot_est and lambdadot are forward-difference
// velocity estimates ((next - current)/h) for the step leaving the paired
// state; the final trace entry instead carries the report of the step that
// produced it.
struct StepReport {
  Eigen::VectorXd xdot_est;
  Eigen::VectorXd lambdadot;
  double residual = 0.0;       // ||xdot_est|| + ||lambdadot||
  double consensus_gap = 0.0;  // x'Lx at the paired state
};

enum class Scheme {
  ProjectedEuler,  // x+ = P_Omega(x + h * unprojected drive); any set variant
  Tangent,         // x+ = P_Omega(x + h * tangent-cone-projected drive)
};

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct RunMetadata {
  double h = kDefaultStepSize;
  double alpha = 1.0;
  Scheme scheme = Scheme::ProjectedEuler;
  std::uint64_t seed = 0;
  double stop_tol = kDefaultStopTol;
  std::size_t steps = 0;
  std::string stop_reason;  // "converged" or "t_end"
  double wall_ms = 0.0;
};

struct TrajectoryTrace {
  std::vector<std::pair<SystemState, StepReport>> samples;
  RunMetadata meta;
};

// Right-hand side of the flow: for each agent, the drive
//   d_i = -g_i(x_i) - alpha * sum_j a_ij (x_i - x_j) - alpha * sum_j a_ij (lambda_i - lambda_j)
// projected onto the tangent cone of the agent's constraint set at x_i, and
// the dual velocity alpha * sum_j a_ij (x_i - x_j). Each agent reads only its
// neighbors. Throws UnsupportedSet when a constraint set has no tangent-cone
// oracle (intersections).
struct Velocity {
  Eigen::VectorXd v_x;
  Eigen::VectorXd v_lambda;
};
Velocity velocity_field(const ProblemInstance& p, const SystemState& s);

// One explicit step. The primal update projects onto the constraint set
// itself, so feasibility is exact for every set variant; the dual update
// uses the pre-step x.
SystemState step_projected_euler(const ProblemInstance& p, const SystemState& s, double h);

// One explicit step through the tangent-cone-projected drive, with a final
// projection to absorb curvature drift (relevant on ball boundaries).
SystemState step_tangent(const ProblemInstance& p, const SystemState& s, double h);

struct RunOptions {
  double h = kDefaultStepSize;
  double t_end = kDefaultTimeEnd;
  double stop_tol = kDefaultStopTol;
  Scheme scheme = Scheme::ProjectedEuler;
  std::size_t record_stride = 10;
  std::uint64_t seed = 0;  // recorded in metadata; the integration itself is deterministic
};

// Integrates from the instance's initial conditions until t_end, or earlier
// once the residual stays at or below stop_tol for kStopStreak consecutive
// steps. Records every record_stride-th state plus the final one. Throws
// NonFinite (with the step index) if the state leaves the finite range.
TrajectoryTrace run(const ProblemInstance& p, const RunOptions& opts);

// Mean of the agents' primal states, in R^q.
Eigen::VectorXd consensus_mean(const ProblemInstance& p, const Eigen::VectorXd& x_stacked);

// x' (L kron I_q) x, clamped at zero from below only by exact arithmetic
// (the quadratic form of a PSD matrix).
double consensus_gap(const ProblemInstance& p, const Eigen::VectorXd& x_stacked);

// The feasible set of the coupled problem, Omega_0 = intersection of the
// per-agent constraint sets: the single agent's set for n = 1, a Box when
// all members are boxes (intersected componentwise), otherwise an
// Intersection. Throws EmptyIntersection when box intersection is empty.
ConvexSet feasible_intersection(const ProblemInstance& p);

struct SweepCell {
  double alpha = 1.0;
  double h = kDefaultStepSize;
  Scheme scheme = Scheme::ProjectedEuler;
  std::uint64_t seed = 0;
};

struct RunSummary {
  std::size_t index = 0;
  SweepCell cell;
  Eigen::VectorXd final_consensus;  // empty when the cell failed
  double residual = 0.0;
  std::size_t steps = 0;
  std::string stop_reason;
  std::string error;  // nonempty iff the cell failed
  double wall_ms = 0.0;
};

// Independent runs over the given cells (same costs/sets/initial data,
// varying gain, step, scheme). Cells may execute on up to `jobs` threads;
// results are ordered by cell index and are independent of `jobs`. A
// failing cell records its error and the sweep continues.
std::vector<RunSummary> sweep(const ProblemInstance& p, const std::vector<SweepCell>& cells,
                              const RunOptions& base, int jobs);

}  // namespace consensusflow
