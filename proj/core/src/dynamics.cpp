#include "consensusflow/dynamics.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace consensusflow {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Unprojected drive of agent i:
//   -g_i(x_i) - alpha * sum_j a_ij (x_i - x_j) - alpha * sum_j a_ij (lambda_i - lambda_j)
// together with the dual velocity alpha * sum_j a_ij (x_i - x_j).
void agent_drive(const ProblemInstance& p, const SystemState& s, Eigen::Index i,
                 Eigen::VectorXd& d_out, Eigen::VectorXd& vlambda_out) {
  const Eigen::Index q = p.q();
  const auto xi = s.x.segment(i * q, q);
  const auto li = s.lambda.segment(i * q, q);
  Eigen::VectorXd cx = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd cl = Eigen::VectorXd::Zero(q);
  for (const auto& [j, w] : neighbor_view(p.network(), i)) {
    cx += w * (xi - s.x.segment(j * q, q));
    cl += w * (li - s.lambda.segment(j * q, q));
  }
  d_out = -subgradient(p.agents()[static_cast<std::size_t>(i)].cost, xi) -
          p.alpha() * cx - p.alpha() * cl;
  vlambda_out = p.alpha() * cx;
}

}  // namespace

ProblemInstance::ProblemInstance(std::vector<AgentSpec> agents, Network network, double alpha)
    : agents_(std::move(agents)), network_(std::move(network)), alpha_(alpha) {
  if (agents_.empty()) throw Error("ProblemInstance: needs at least one agent");
  if (static_cast<Eigen::Index>(agents_.size()) != network_.n())
    throw DimensionMismatch("ProblemInstance: " + std::to_string(agents_.size()) +
                            " agents but graph has " + std::to_string(network_.n()) +
                            " vertices");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_))
    throw Error("ProblemInstance: alpha must be positive and finite");
  const Eigen::Index q = network_.q();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const AgentSpec& a = agents_[i];
    const std::string who = "agent " + std::to_string(i);
    if (a.cost.dim() != q)
      throw DimensionMismatch("ProblemInstance: " + who + " cost dimension " +
                              std::to_string(a.cost.dim()) + " != q = " + std::to_string(q));
    if (a.constraint.dim() != q)
      throw DimensionMismatch("ProblemInstance: " + who + " constraint dimension " +
                              std::to_string(a.constraint.dim()) +
                              " != q = " + std::to_string(q));
    if (a.x0.size() != q || a.lambda0.size() != q)
      throw DimensionMismatch("ProblemInstance: " + who + " initial state has wrong size");
    if (!a.x0.allFinite() || !a.lambda0.allFinite())
      throw Error("ProblemInstance: " + who + " initial state is not finite");
    if (!contains(a.constraint, a.x0, 1e-12))
      throw Error("ProblemInstance: " + who + " initial point is not in its constraint set");
  }
}

Eigen::VectorXd ProblemInstance::stacked_x0() const {
  const Eigen::Index q = this->q();
  Eigen::VectorXd x(n() * q);
  for (Eigen::Index i = 0; i < n(); ++i)
    x.segment(i * q, q) = agents_[static_cast<std::size_t>(i)].x0;
  return x;
}

Eigen::VectorXd ProblemInstance::stacked_lambda0() const {
  const Eigen::Index q = this->q();
  Eigen::VectorXd l(n() * q);
  for (Eigen::Index i = 0; i < n(); ++i)
    l.segment(i * q, q) = agents_[static_cast<std::size_t>(i)].lambda0;
  return l;
}

std::string scheme_name(Scheme s) {
  return s == Scheme::ProjectedEuler ? "projected-euler" : "tangent";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "projected-euler") return Scheme::ProjectedEuler;
  if (name == "tangent") return Scheme::Tangent;
  throw Error("unknown scheme '" + name + "' (expected projected-euler or tangent)");
}

Velocity velocity_field(const ProblemInstance& p, const SystemState& s) {
  const Eigen::Index q = p.q();
  Velocity v;
  v.v_x.resize(p.n() * q);
  v.v_lambda.resize(p.n() * q);
  Eigen::VectorXd d(q);
  Eigen::VectorXd vl(q);
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    agent_drive(p, s, i, d, vl);
    v.v_x.segment(i * q, q) = project_tangent_cone(
        p.agents()[static_cast<std::size_t>(i)].constraint, s.x.segment(i * q, q), d);
    v.v_lambda.segment(i * q, q) = vl;
  }
  return v;
}

SystemState step_projected_euler(const ProblemInstance& p, const SystemState& s, double h) {
  const Eigen::Index q = p.q();
  SystemState next;
  next.t = s.t + h;
  next.x.resize(p.n() * q);
  next.lambda.resize(p.n() * q);
  Eigen::VectorXd d(q);
  Eigen::VectorXd vl(q);
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    agent_drive(p, s, i, d, vl);
    next.x.segment(i * q, q) = project(p.agents()[static_cast<std::size_t>(i)].constraint,
                                       s.x.segment(i * q, q) + h * d);
    next.lambda.segment(i * q, q) = s.lambda.segment(i * q, q) + h * vl;
  }
  return next;
}

SystemState step_tangent(const ProblemInstance& p, const SystemState& s, double h) {
  const Eigen::Index q = p.q();
  const Velocity v = velocity_field(p, s);
  SystemState next;
  next.t = s.t + h;
  next.x.resize(p.n() * q);
  next.lambda = s.lambda + h * v.v_lambda;
  for (Eigen::Index i = 0; i < p.n(); ++i) {
    next.x.segment(i * q, q) = project(p.agents()[static_cast<std::size_t>(i)].constraint,
                                       s.x.segment(i * q, q) + h * v.v_x.segment(i * q, q));
  }
  return next;
}

Eigen::VectorXd consensus_mean(const ProblemInstance& p, const Eigen::VectorXd& x_stacked) {
  const Eigen::Index q = p.q();
  if (x_stacked.size() != p.n() * q)
    throw DimensionMismatch("consensus_mean: wrong stacked length");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(q);
  for (Eigen::Index i = 0; i < p.n(); ++i) m += x_stacked.segment(i * q, q);
  return m / static_cast<double>(p.n());
}

double consensus_gap(const ProblemInstance& p, const Eigen::VectorXd& x_stacked) {
  return x_stacked.dot(apply_laplacian(p.network(), x_stacked));
}

ConvexSet feasible_intersection(const ProblemInstance& p) {
  if (p.n() == 1) return p.agents().front().constraint;

  const Eigen::Index q = p.q();
  bool boxes_only = true;
  for (const AgentSpec& a : p.agents()) {
    if (!a.constraint.as<Box>() && !a.constraint.as<WholeSpace>()) {
      boxes_only = false;
      break;
    }
  }
  if (boxes_only) {
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(q, -inf);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(q, inf);
    for (const AgentSpec& a : p.agents()) {
      if (const auto* b = a.constraint.as<Box>()) {
        lo = lo.cwiseMax(b->lo);
        hi = hi.cwiseMin(b->hi);
      }
    }
    for (Eigen::Index j = 0; j < q; ++j) {
      if (lo(j) > hi(j))
        throw EmptyIntersection("feasible_intersection: empty in coordinate " +
                                std::to_string(j));
    }
    return Box{lo, hi};
  }

  Intersection inter;
  for (const AgentSpec& a : p.agents()) inter.members.push_back(a.constraint);
  return ConvexSet(std::move(inter));
}

TrajectoryTrace run(const ProblemInstance& p, const RunOptions& opts) {
  if (!(opts.h > 0.0) || !std::isfinite(opts.h))
    throw Error("run: step size must be positive and finite");
  if (!(opts.t_end > 0.0) || !std::isfinite(opts.t_end))
    throw Error("run: time horizon must be positive and finite");
  if (!(opts.stop_tol >= 0.0)) throw Error("run: stop tolerance must be nonnegative");

  const auto start = Clock::now();
  const std::size_t stride = std::max<std::size_t>(opts.record_stride, 1);
  const auto n_steps =
      static_cast<std::size_t>(std::ceil(opts.t_end / opts.h - 1e-9));

  TrajectoryTrace trace;
  trace.meta.h = opts.h;
  trace.meta.alpha = p.alpha();
  trace.meta.scheme = opts.scheme;
  trace.meta.seed = opts.seed;
  trace.meta.stop_tol = opts.stop_tol;
  trace.meta.stop_reason = "t_end";

  SystemState s{0.0, p.stacked_x0(), p.stacked_lambda0()};
  const Eigen::Index nq = p.n() * p.q();
  StepReport last;
  last.xdot_est = Eigen::VectorXd::Zero(nq);
  last.lambdadot = Eigen::VectorXd::Zero(nq);

  int streak = 0;
  std::size_t k = 0;
  while (k < n_steps) {
    SystemState next = opts.scheme == Scheme::ProjectedEuler
                           ? step_projected_euler(p, s, opts.h)
                           : step_tangent(p, s, opts.h);
    next.t = static_cast<double>(k + 1) * opts.h;
    if (!next.x.allFinite() || !next.lambda.allFinite())
      throw NonFinite("run: state became non-finite at step " + std::to_string(k), k);

    StepReport rep;
    rep.xdot_est = (next.x - s.x) / opts.h;
    rep.lambdadot = (next.lambda - s.lambda) / opts.h;
    rep.residual = rep.xdot_est.norm() + rep.lambdadot.norm();
    rep.consensus_gap = consensus_gap(p, s.x);
    if (k % stride == 0) trace.samples.emplace_back(s, rep);

    s = std::move(next);
    last = std::move(rep);
    ++k;
    streak = last.residual <= opts.stop_tol ? streak + 1 : 0;
    if (streak >= kStopStreak) {
      trace.meta.stop_reason = "converged";
      break;
    }
  }

  last.consensus_gap = consensus_gap(p, s.x);
  trace.samples.emplace_back(std::move(s), std::move(last));
  trace.meta.steps = k;
  trace.meta.wall_ms = elapsed_ms(start);
  return trace;
}

std::vector<RunSummary> sweep(const ProblemInstance& p, const std::vector<SweepCell>& cells,
                              const RunOptions& base, int jobs) {
  if (cells.empty()) throw Error("sweep: empty grid");
  std::vector<RunSummary> results(cells.size());

  const auto work_one = [&](std::size_t idx) {
    RunSummary& out = results[idx];
    out.index = idx;
    out.cell = cells[idx];
    const auto start = Clock::now();
    try {
      ProblemInstance cell_p(p.agents(), p.network(), cells[idx].alpha);
      RunOptions o = base;
      o.h = cells[idx].h;
      o.scheme = cells[idx].scheme;
      o.seed = cells[idx].seed;
      const TrajectoryTrace trace = run(cell_p, o);
      out.final_consensus = consensus_mean(cell_p, trace.samples.back().first.x);
      out.residual = trace.samples.back().second.residual;
      out.steps = trace.meta.steps;
      out.stop_reason = trace.meta.stop_reason;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    out.wall_ms = elapsed_ms(start);
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1))
          work_one(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace consensusflow
