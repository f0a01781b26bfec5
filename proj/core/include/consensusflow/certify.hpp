#pragma once

#include <Eigen/Dense>
#include <vector>

#include "consensusflow/dynamics.hpp"
#include "consensusflow/interval.hpp"

namespace consensusflow {

// Certificate tolerance used throughout this header.
inline constexpr double kCertTol = 1e-8;

// Per-step slack factor for discrete monotonicity audits: a first-order
// discretization of the flow can overshoot a decreasing function by O(h)
// per step, so decrease is asserted only up to kMonotoneSlack * h.
inline constexpr double kMonotoneSlack = 10.0;

// Stationarity test at a scalar point: whether zero lies in the sum of the
// total-cost subdifferential and the normal cone of the feasible interval.
struct Optimality1D {
  bool optimal = false;
  Interval subdifferential;  // of the summed cost at x
  Interval normal_cone;      // of the intersected feasible interval at x
  Interval slack;            // their sum; optimal iff it contains zero
};

// Requires q = 1 and interval (Box or WholeSpace) constraint sets; x must
// lie in the intersected feasible interval. The verdict is computed by
// exact arithmetic on interval endpoints; endpoint activity is detected
// within kActivityTol. Throws NotUnivariate, UnsupportedSet,
// EmptyIntersection, or Error (infeasible x).
Optimality1D check_optimal_1d(const ProblemInstance& p, double x);

// Scalar stationarity measure at a common point x in R^q: the norm of the
// tangent-cone projection of minus the summed least-norm subgradient when
// the aggregate feasible set supports tangent cones and x is feasible;
// otherwise the projected-gradient fixed-point gap
// ||x - P(x - tau g)|| / tau with tau = 1e-3. An upper-bound-style
// heuristic: the least-norm selection can overestimate where the
// subdifferential is set-valued.
double optimality_residual(const ProblemInstance& p, const Eigen::VectorXd& x);

// Dual gain data: k strictly inside (0, 1/(alpha lambda_max)) and the
// positive definite matrix Qn satisfying
//   alpha L - k alpha^2 L^2 = L Qn L,
// with Qn = k alpha^2 Q ((1/(k alpha)) Lbar - I) Q' where Lbar inverts the
// nonzero eigenvalues and replaces kernel ones by 2 k alpha. Both claims
// are verified numerically at construction.
struct GainSchedule {
  double alpha = 1.0;
  double k = 0.0;
  Eigen::MatrixXd Qn;
  double min_eig_qn = 0.0;
  double identity_residual = 0.0;  // Frobenius norm of the defect
};

// k = k_fraction / (alpha lambda_max), falling back to k_fraction / alpha
// for the single-agent graph (lambda_max = 0, any positive k admissible).
// Throws IdentityViolation if the factorization self-check fails.
GainSchedule build_gain_schedule(const Network& net, double alpha, double k_fraction);

// v' (Qn kron I_q) v for a stacked vector v in R^{nq}.
double qn_quadratic_form(const GainSchedule& g, const Eigen::VectorXd& v, Eigen::Index q);

// Reference point for the Lyapunov series. `certified_optimum` marks x_ref
// as a verified minimizer (with matching multiplier), which is what makes
// the V2-dependent series meaningful; otherwise only the distance series V1
// (centered at an arbitrary reference, typically the run's own final state)
// carries a monotonicity claim.
struct LyapunovRef {
  Eigen::VectorXd x_ref;
  Eigen::VectorXd lambda_ref;
  bool certified_optimum = false;
};

struct LyapunovValues {
  double V1 = 0.0;
  double V2 = 0.0;
  double Vstar = 0.0;  // V1 + k V2
};

// Pointwise evaluation:
//   V1 = 0.5 ||x - x_ref||^2 + 0.5 ||lambda - lambda_ref||^2
//   V2 = F(x) - F(x_ref) + (alpha/2) x'Lx + alpha x'L lambda
// with F the stacked total cost.
LyapunovValues eval_lyapunov(const ProblemInstance& p, const LyapunovRef& ref,
                             const GainSchedule& sched, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lambda);

struct LyapunovSample {
  double t = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;
  double Vstar = 0.0;
  double W = 0.0;  // k ||xdot||^2 + lambdadot' (Qn kron I) lambdadot
  double consensus_gap = 0.0;
};

// Decrease audit of one series over the recorded samples. A recorded
// interval spanning m integration steps is allowed to increase by at most
// kMonotoneSlack * h * m; anything beyond counts as a violation.
struct SeriesAudit {
  std::size_t violations = 0;
  double max_step_increase = 0.0;  // largest per-step-normalized increase
  double cumulative_increase = 0.0;
};

struct LyapunovReport {
  std::vector<LyapunovSample> samples;
  SeriesAudit v1_audit;
  SeriesAudit vstar_audit;  // meaningful only when `certified` is set
  bool certified = false;
  double min_w = 0.0;
  double min_vstar = 0.0;
};

// Evaluates the series along the trace and audits monotone decrease of V1
// and (for a certified reference) Vstar. W uses the recorded
// forward-difference velocities.
LyapunovReport lyapunov_audit(const ProblemInstance& p, const TrajectoryTrace& trace,
                              const LyapunovRef& ref, const GainSchedule& sched);

// Stationarity decomposition at a verified scalar minimizer: per-agent
// subgradient picks g_i in the local subdifferential and normal-cone picks
// z_i with sum_i (g_i + z_i) = 0, chosen least-norm, plus the multiplier
// recovered through the Laplacian pseudoinverse.
struct OptimalityCertificate {
  double x_star = 0.0;
  Eigen::VectorXd g_parts;
  Eigen::VectorXd z_parts;
  Eigen::VectorXd l_parts;      // g + z per agent
  Eigen::VectorXd lambda_star;  // minimum-norm solution of alpha L lambda = -l
  double residual = 0.0;        // |sum l| plus per-agent cone-membership defects
  bool verified = false;        // residual <= kCertTol
};

// Requires check_optimal_1d(p, x_star) to hold. The split minimizes
// sum_i (g_i^2 + z_i^2) subject to the zero-sum constraint and the interval
// memberships; the program is separable, so its exact solution is a clamped
// water-filling in the scalar multiplier, found by monotone bisection.
// Throws InfeasibleSplit when no admissible split exists (residual beyond
// kCertTol), which contradicts the certificate and signals an upstream bug.
OptimalityCertificate reconstruct_lambda_star(const ProblemInstance& p, double x_star);

// Convenience: the feasible interval [max lo_i, min hi_i] for q = 1
// box-constrained instances. Throws UnsupportedSet / EmptyIntersection.
Interval feasible_interval_1d(const ProblemInstance& p);

}  // namespace consensusflow
