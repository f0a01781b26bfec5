#include "consensusflow/certify.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "consensusflow/eig.hpp"

namespace consensusflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Total cost of a stacked state, sum_i f_i(x_i).
double total_cost(const ProblemInstance& p, const Eigen::VectorXd& x_stacked) {
  const Eigen::Index q = p.q();
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.n(); ++i)
    total += value(p.agents()[static_cast<std::size_t>(i)].cost, x_stacked.segment(i * q, q));
  return total;
}

// The 1-D interval of a Box/WholeSpace constraint.
Interval constraint_interval_1d(const ConvexSet& s, const char* who) {
  if (s.as<WholeSpace>()) return Interval::whole();
  if (const auto* b = s.as<Box>()) return {b->lo(0), b->hi(0)};
  throw UnsupportedSet(std::string(who) + ": requires interval (box) constraint sets");
}

// Normal cone of the interval [lo, hi] at a feasible scalar x, with
// endpoint activity detected within kActivityTol.
Interval interval_normal_cone(const Interval& box, double x) {
  const bool at_lo = std::isfinite(box.lo) && x <= box.lo + kActivityTol;
  const bool at_hi = std::isfinite(box.hi) && x >= box.hi - kActivityTol;
  if (at_lo && at_hi) return Interval::whole();
  if (at_lo) return {-kInf, 0.0};
  if (at_hi) return {0.0, kInf};
  return Interval::point(0.0);
}

}  // namespace

Interval feasible_interval_1d(const ProblemInstance& p) {
  if (p.q() != 1)
    throw NotUnivariate("feasible_interval_1d: instance has q = " + std::to_string(p.q()));
  Interval box = Interval::whole();
  for (const AgentSpec& a : p.agents()) {
    const Interval bi = constraint_interval_1d(a.constraint, "feasible_interval_1d");
    box.lo = std::max(box.lo, bi.lo);
    box.hi = std::min(box.hi, bi.hi);
  }
  if (box.lo > box.hi)
    throw EmptyIntersection("feasible_interval_1d: constraint intervals do not overlap");
  return box;
}

Optimality1D check_optimal_1d(const ProblemInstance& p, double x) {
  if (p.q() != 1)
    throw NotUnivariate("check_optimal_1d: instance has q = " + std::to_string(p.q()));
  const Interval box = feasible_interval_1d(p);
  if (x < box.lo - kActivityTol || x > box.hi + kActivityTol)
    throw Error("check_optimal_1d: point " + std::to_string(x) +
                " is outside the feasible interval");

  Optimality1D out;
  out.subdifferential = Interval::point(0.0);
  for (const AgentSpec& a : p.agents())
    out.subdifferential = out.subdifferential + subdifferential_1d(a.cost, x);
  out.normal_cone = interval_normal_cone(box, x);
  out.slack = out.subdifferential + out.normal_cone;
  out.optimal = out.slack.contains(0.0);
  return out;
}

double optimality_residual(const ProblemInstance& p, const Eigen::VectorXd& x) {
  const Eigen::Index q = p.q();
  if (x.size() != q)
    throw DimensionMismatch("optimality_residual: expected a point in R^" + std::to_string(q));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(q);
  for (const AgentSpec& a : p.agents()) g += subgradient(a.cost, x);

  const ConvexSet omega0 = feasible_intersection(p);
  if (!omega0.as<Intersection>() && contains(omega0, x, kActivityTol))
    return project_tangent_cone(omega0, x, -g).norm();

  const double tau = 1e-3;
  return (x - project(omega0, x - tau * g)).norm() / tau;
}

GainSchedule build_gain_schedule(const Network& net, double alpha, double k_fraction) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error("build_gain_schedule: alpha must be positive and finite");
  if (!(k_fraction > 0.0) || !(k_fraction < 1.0))
    throw Error("build_gain_schedule: k_fraction must lie strictly in (0, 1)");

  const SpectralData& sd = spectral(net);
  const Eigen::Index n = net.n();
  const double lambda_max = sd.lambda_max;

  GainSchedule g;
  g.alpha = alpha;
  // For a single-agent graph the Laplacian vanishes and every positive k is
  // admissible; elsewhere k sits at the requested fraction of the upper
  // limit 1/(alpha lambda_max).
  g.k = lambda_max > 0.0 ? k_fraction / (alpha * lambda_max) : k_fraction / alpha;

  const double kernel_tol = 1e-10 * std::max(lambda_max, 1e-300);
  Eigen::VectorXd lbar(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lbar(i) = sd.lambda(i) > kernel_tol ? 1.0 / sd.lambda(i) : 2.0 * g.k * alpha;

  const Eigen::VectorXd core = (lbar / (g.k * alpha)).array() - 1.0;
  g.Qn = g.k * alpha * alpha * (sd.Q * core.asDiagonal() * sd.Q.transpose());
  g.Qn = 0.5 * (g.Qn + g.Qn.transpose()).eval();

  g.min_eig_qn = jacobi_eigensymm(g.Qn).values.minCoeff();
  if (!(g.min_eig_qn > 0.0))
    throw IdentityViolation("build_gain_schedule: Qn is not positive definite (min eigenvalue " +
                                std::to_string(g.min_eig_qn) + ")",
                            g.min_eig_qn);

  const Eigen::MatrixXd& l = net.laplacian();
  const Eigen::MatrixXd defect =
      alpha * l - g.k * alpha * alpha * (l * l) - l * g.Qn * l;
  g.identity_residual = defect.norm();
  if (g.identity_residual > 1e-9)
    throw IdentityViolation(
        "build_gain_schedule: factorization residual " + std::to_string(g.identity_residual) +
            " exceeds 1e-9 (eigendecomposition failure)",
        g.identity_residual);
  return g;
}

double qn_quadratic_form(const GainSchedule& g, const Eigen::VectorXd& v, Eigen::Index q) {
  const Eigen::Index n = g.Qn.rows();
  if (v.size() != n * q)
    throw DimensionMismatch("qn_quadratic_form: expected stacked vector of size " +
                            std::to_string(n * q));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      total += g.Qn(i, j) * v.segment(i * q, q).dot(v.segment(j * q, q));
    }
  }
  return total;
}

LyapunovValues eval_lyapunov(const ProblemInstance& p, const LyapunovRef& ref,
                             const GainSchedule& sched, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& lambda) {
  const Eigen::Index nq = p.n() * p.q();
  if (ref.x_ref.size() != nq || ref.lambda_ref.size() != nq || x.size() != nq ||
      lambda.size() != nq)
    throw DimensionMismatch("eval_lyapunov: stacked vectors must have size " +
                            std::to_string(nq));
  LyapunovValues v;
  v.V1 = 0.5 * (x - ref.x_ref).squaredNorm() + 0.5 * (lambda - ref.lambda_ref).squaredNorm();
  const Eigen::VectorXd lx = apply_laplacian(p.network(), x);
  v.V2 = total_cost(p, x) - total_cost(p, ref.x_ref) + 0.5 * p.alpha() * lx.dot(x) +
         p.alpha() * lx.dot(lambda);
  v.Vstar = v.V1 + sched.k * v.V2;
  return v;
}

LyapunovReport lyapunov_audit(const ProblemInstance& p, const TrajectoryTrace& trace,
                              const LyapunovRef& ref, const GainSchedule& sched) {
  if (trace.samples.empty()) throw Error("lyapunov_audit: empty trace");
  if (sched.Qn.rows() != p.n())
    throw DimensionMismatch("lyapunov_audit: gain schedule built for a different graph");

  LyapunovReport report;
  report.certified = ref.certified_optimum;
  report.samples.reserve(trace.samples.size());
  for (const auto& [state, rep] : trace.samples) {
    const LyapunovValues v = eval_lyapunov(p, ref, sched, state.x, state.lambda);
    LyapunovSample s;
    s.t = state.t;
    s.V1 = v.V1;
    s.V2 = v.V2;
    s.Vstar = v.Vstar;
    s.W = sched.k * rep.xdot_est.squaredNorm() +
          qn_quadratic_form(sched, rep.lambdadot, p.q());
    s.consensus_gap = rep.consensus_gap;
    report.samples.push_back(s);
  }

  report.min_w = kInf;
  report.min_vstar = kInf;
  for (const LyapunovSample& s : report.samples) {
    report.min_w = std::min(report.min_w, s.W);
    report.min_vstar = std::min(report.min_vstar, s.Vstar);
  }

  const double h = trace.meta.h;
  const auto audit_series = [&](auto value_of) {
    SeriesAudit audit;
    for (std::size_t i = 1; i < report.samples.size(); ++i) {
      const double dt = report.samples[i].t - report.samples[i - 1].t;
      const double m = std::max(1.0, std::round(dt / h));
      const double jump = value_of(report.samples[i]) - value_of(report.samples[i - 1]);
      if (jump > 0.0) {
        audit.cumulative_increase += jump;
        audit.max_step_increase = std::max(audit.max_step_increase, jump / m);
        if (jump / m > kMonotoneSlack * h) ++audit.violations;
      }
    }
    return audit;
  };
  report.v1_audit = audit_series([](const LyapunovSample& s) { return s.V1; });
  report.vstar_audit = audit_series([](const LyapunovSample& s) { return s.Vstar; });
  return report;
}

OptimalityCertificate reconstruct_lambda_star(const ProblemInstance& p, double x_star) {
  const Optimality1D check = check_optimal_1d(p, x_star);
  if (!check.optimal)
    throw InfeasibleSplit("reconstruct_lambda_star: point is not a certified optimum",
                          check.slack.distance(0.0));

  const Eigen::Index n = p.n();
  std::vector<Interval> g_box(static_cast<std::size_t>(n));
  std::vector<Interval> z_box(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const AgentSpec& a = p.agents()[static_cast<std::size_t>(i)];
    g_box[static_cast<std::size_t>(i)] = subdifferential_1d(a.cost, x_star);
    z_box[static_cast<std::size_t>(i)] = interval_normal_cone(
        constraint_interval_1d(a.constraint, "reconstruct_lambda_star"), x_star);
  }

  // Feasibility of the zero-sum split: zero must lie in the Minkowski sum of
  // all the membership intervals.
  Interval total = Interval::point(0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    total = total + g_box[static_cast<std::size_t>(i)] + z_box[static_cast<std::size_t>(i)];
  if (!total.contains(0.0))
    throw InfeasibleSplit("reconstruct_lambda_star: no zero-sum subgradient/normal split exists",
                          total.distance(0.0));

  // Least-norm split. The program min sum(g_i^2 + z_i^2) subject to
  // sum(g_i + z_i) = 0 is separable, so the optimum clamps a common
  // multiplier nu into every membership interval; phi below is the
  // constraint value as a function of nu, nondecreasing and continuous.
  const auto phi = [&](double nu) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      s += g_box[static_cast<std::size_t>(i)].clamp(nu) +
           z_box[static_cast<std::size_t>(i)].clamp(nu);
    return s;
  };

  double scale = 1.0;
  for (const Interval& b : g_box) {
    if (std::isfinite(b.lo)) scale = std::max(scale, std::abs(b.lo));
    if (std::isfinite(b.hi)) scale = std::max(scale, std::abs(b.hi));
  }
  double lo = -2.0 * static_cast<double>(n) * scale;
  double hi = 2.0 * static_cast<double>(n) * scale;
  for (int guard = 0; guard < 200 && phi(lo) > 0.0; ++guard) lo *= 2.0;
  for (int guard = 0; guard < 200 && phi(hi) < 0.0; ++guard) hi *= 2.0;
  for (int it = 0; it < 500 && hi - lo > 1e-16 * std::max({1.0, std::abs(lo), std::abs(hi)});
       ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double nu = 0.5 * (lo + hi);

  OptimalityCertificate cert;
  cert.x_star = x_star;
  cert.g_parts.resize(n);
  cert.z_parts.resize(n);
  cert.l_parts.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cert.g_parts(i) = g_box[static_cast<std::size_t>(i)].clamp(nu);
    cert.z_parts(i) = z_box[static_cast<std::size_t>(i)].clamp(nu);
    cert.l_parts(i) = cert.g_parts(i) + cert.z_parts(i);
  }
  const double sum_residual = std::abs(cert.l_parts.sum());
  if (sum_residual > kCertTol)
    throw InfeasibleSplit("reconstruct_lambda_star: zero-sum split residual " +
                              std::to_string(sum_residual) + " exceeds tolerance",
                          sum_residual);

  // Minimum-norm multiplier through the spectral pseudoinverse; the kernel
  // direction is dropped, which is exactly where l has no component (its
  // entries sum to zero).
  const SpectralData& sd = spectral(p.network());
  const double kernel_tol = 1e-10 * std::max(sd.lambda_max, 1e-300);
  Eigen::VectorXd inv(n);
  for (Eigen::Index i = 0; i < n; ++i)
    inv(i) = sd.lambda(i) > kernel_tol ? 1.0 / sd.lambda(i) : 0.0;
  cert.lambda_star =
      -(1.0 / p.alpha()) * (sd.Q * inv.asDiagonal() * sd.Q.transpose() * cert.l_parts);

  // Membership self-check: -g_i - alpha (L lambda*)_i must lie in the
  // normal cone of agent i's set at x*.
  const Eigen::VectorXd l_lambda = apply_laplacian(p.network(), cert.lambda_star);
  double cone_defect = 0.0;
  Eigen::VectorXd xs(1);
  xs(0) = x_star;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd d(1);
    d(0) = -cert.g_parts(i) - p.alpha() * l_lambda(i);
    cone_defect +=
        project_tangent_cone(p.agents()[static_cast<std::size_t>(i)].constraint,
                             project(p.agents()[static_cast<std::size_t>(i)].constraint, xs), d)
            .norm();
  }
  cert.residual = sum_residual + cone_defect;
  cert.verified = cert.residual <= kCertTol;
  return cert;
}

}  // namespace consensusflow
