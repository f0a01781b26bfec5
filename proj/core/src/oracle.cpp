#include "consensusflow/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "consensusflow/certify.hpp"
#include "consensusflow/rng.hpp"

namespace consensusflow {

namespace {

double summed_cost_1d(const ProblemInstance& p, double x) {
  Eigen::VectorXd xv(1);
  xv(0) = x;
  double total = 0.0;
  for (const AgentSpec& a : p.agents()) total += value(a.cost, xv);
  return total;
}

ConvexFunction random_primitive(Rng& rng) {
  switch (rng.index(3)) {
    case 0:
      // Center and halfwidth ranges keep both kinks inside (-10, 10).
      return Deadzone{rng.uniform(-5.0, 5.0), rng.uniform(1.0, 5.0)};
    case 1: {
      Eigen::VectorXd c(1);
      c(0) = rng.uniform(-8.0, 8.0);
      return AbsDev{c, rng.uniform(0.2, 2.0)};
    }
    default: {
      // Pieces built left to right with increasing slopes, joined at chosen
      // breakpoints, so every crossing is a genuine kink inside (-10, 10).
      const std::size_t pieces = 2 + rng.index(2);
      std::vector<double> breaks(pieces - 1);
      for (double& b : breaks) b = rng.uniform(-9.0, 9.0);
      std::sort(breaks.begin(), breaks.end());
      MaxAffine f;
      double slope = rng.uniform(-2.0, 0.0);
      double offset = rng.uniform(-3.0, 3.0);
      for (std::size_t j = 0; j < pieces; ++j) {
        Eigen::VectorXd a(1);
        a(0) = slope;
        f.pieces.push_back({a, offset});
        if (j + 1 < pieces) {
          const double next_slope = slope + rng.uniform(0.2, 1.5);
          offset += (slope - next_slope) * breaks[j];
          slope = next_slope;
        }
      }
      return f;
    }
  }
}

}  // namespace

OracleResult grid_solve_1d(const ProblemInstance& p, double resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw Error("grid_solve_1d: resolution must be positive and finite");
  const Interval box = feasible_interval_1d(p);
  if (!std::isfinite(box.lo) || !std::isfinite(box.hi))
    throw UnboundedFeasibleSet("grid_solve_1d: feasible interval is unbounded");

  std::vector<double> candidates{box.lo, box.hi};
  for (const AgentSpec& a : p.agents()) {
    for (double b : breakpoints_1d(a.cost)) {
      if (b >= box.lo && b <= box.hi) candidates.push_back(b);
    }
  }
  for (double x = box.lo + resolution; x < box.hi; x += resolution) candidates.push_back(x);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_x = candidates.front();
  double best_f = summed_cost_1d(p, best_x);
  for (double x : candidates) {
    const double f = summed_cost_1d(p, x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }

  // Near-tie diameter: the spread of candidates whose value is within
  // rounding of the minimum. A flat bottom shows up as a wide spread; a
  // strict minimum as (at most) immediate grid neighbors.
  double tie_lo = best_x;
  double tie_hi = best_x;
  for (double x : candidates) {
    if (summed_cost_1d(p, x) <= best_f + 1e-12) {
      tie_lo = std::min(tie_lo, x);
      tie_hi = std::max(tie_hi, x);
    }
  }

  OracleResult r;
  r.x_opt.resize(1);
  r.x_opt(0) = best_x;
  r.f_opt = best_f;
  r.method = "grid-1d";
  r.resolution = resolution;
  r.unique_minimizer = (tie_hi - tie_lo) <= std::max(2.0 * resolution, 1e-9);
  return r;
}

OracleResult centralized_solve(const ProblemInstance& p, std::size_t iters, double eta0) {
  if (!(eta0 > 0.0)) throw Error("centralized_solve: step scale must be positive");
  const ConvexSet omega0 = feasible_intersection(p);
  const Eigen::Index q = p.q();

  const auto cost = [&](const Eigen::VectorXd& x) {
    double total = 0.0;
    for (const AgentSpec& a : p.agents()) total += value(a.cost, x);
    return total;
  };

  Eigen::VectorXd x = project(omega0, Eigen::VectorXd::Zero(q));
  Eigen::VectorXd best = x;
  double best_f = cost(x);
  for (std::size_t t = 0; t < iters; ++t) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(q);
    for (const AgentSpec& a : p.agents()) g += subgradient(a.cost, x);
    const double eta = eta0 / std::sqrt(static_cast<double>(t + 1));
    x = project(omega0, x - eta * g);
    const double f = cost(x);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }

  OracleResult r;
  r.x_opt = best;
  r.f_opt = best_f;
  r.method = "centralized-projected-subgradient";
  r.iterations = iters;
  return r;
}

ProblemInstance random_instance_1d(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index n = static_cast<Eigen::Index>(2 + rng.index(4));

  // Interval constraints, resampled until the common interior is comfortably
  // nonempty.
  std::vector<double> lo(static_cast<std::size_t>(n));
  std::vector<double> hi(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double common_lo = -std::numeric_limits<double>::infinity();
    double common_hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = rng.uniform(-5.0, 5.0);
      const double w = rng.uniform(2.0, 8.0);
      lo[static_cast<std::size_t>(i)] = c - w;
      hi[static_cast<std::size_t>(i)] = c + w;
      common_lo = std::max(common_lo, c - w);
      common_hi = std::min(common_hi, c + w);
    }
    if (common_hi - common_lo > 0.1) break;
  }

  std::vector<AgentSpec> agents;
  agents.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    FuncSum cost;
    const std::size_t primitives = 1 + rng.index(3);
    for (std::size_t k = 0; k < primitives; ++k) cost.members.push_back(random_primitive(rng));

    Eigen::VectorXd blo(1);
    Eigen::VectorXd bhi(1);
    blo(0) = lo[static_cast<std::size_t>(i)];
    bhi(0) = hi[static_cast<std::size_t>(i)];
    Eigen::VectorXd x0(1);
    x0(0) = 0.5 * (blo(0) + bhi(0));
    agents.push_back(AgentSpec{ConvexFunction(std::move(cost)), ConvexSet(Box{blo, bhi}), x0,
                               Eigen::VectorXd::Zero(1)});
  }

  // Random spanning tree plus optional extra edges keeps the graph
  // connected by construction.
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    const auto j = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(i)));
    adjacency(i, j) = adjacency(j, i) = 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (adjacency(i, j) == 0.0 && rng.uniform() < 0.3) adjacency(i, j) = adjacency(j, i) = 1.0;
    }
  }

  return ProblemInstance(std::move(agents), build_network(adjacency, 1), 1.0);
}

}  // namespace consensusflow
