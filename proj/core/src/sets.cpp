#include "consensusflow/sets.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace consensusflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dim(const char* op, Eigen::Index expected, Eigen::Index got) {
  if (expected != got)
    throw DimensionMismatch(std::string(op) + ": expected vector of size " +
                            std::to_string(expected) + ", got " + std::to_string(got));
}

Eigen::VectorXd project_box(const Box& b, const Eigen::VectorXd& u) {
  return u.cwiseMax(b.lo).cwiseMin(b.hi);
}

Eigen::VectorXd project_ball(const Ball& b, const Eigen::VectorXd& u) {
  const Eigen::VectorXd d = u - b.center;
  const double n = d.norm();
  if (n <= b.radius) return u;
  return b.center + (b.radius / n) * d;
}

Eigen::VectorXd project_halfspace(const Halfspace& h, const Eigen::VectorXd& u) {
  const double slack = h.normal.dot(u) - h.offset;
  if (slack <= 0.0) return u;
  return u - (slack / h.normal.squaredNorm()) * h.normal;
}

// Dykstra's alternating projections. Plain alternating projection converges
// to a point of the intersection but not to the nearest one; the per-member
// correction vectors restore convergence to the true projection for convex
// members.
Eigen::VectorXd project_intersection(const Intersection& inter, const Eigen::VectorXd& u) {
  const std::size_t m = inter.members.size();
  Eigen::VectorXd x = u;
  std::vector<Eigen::VectorXd> corrections(m, Eigen::VectorXd::Zero(u.size()));

  // Convergence is judged by the largest movement of x inside a sweep, not
  // by the end-to-end sweep displacement: on an empty intersection the
  // iterate cycles with the period of one sweep, so the end-to-end
  // displacement vanishes while x keeps hopping between the members.
  double displacement = kInf;
  for (std::size_t sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
    displacement = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::VectorXd y = project(inter.members[i], x + corrections[i]);
      corrections[i] = x + corrections[i] - y;
      displacement = std::max(displacement, (y - x).norm());
      x = y;
    }
    if (displacement <= kDykstraTol) return x;
  }
  throw DykstraFailure("project: alternating projections did not converge within " +
                           std::to_string(kDykstraMaxSweeps) + " sweeps (last displacement " +
                           std::to_string(displacement) + ")",
                       displacement, kDykstraMaxSweeps);
}

bool strictly_inside(const ConvexSet& s, const Eigen::VectorXd& y, double margin) {
  if (const auto* w = s.as<WholeSpace>()) {
    (void)w;
    return true;
  }
  if (const auto* b = s.as<Box>()) {
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      if (y(j) < b->lo(j) + margin || y(j) > b->hi(j) - margin) return false;
    }
    return true;
  }
  if (const auto* b = s.as<Ball>())
    return (y - b->center).norm() <= b->radius - margin;
  if (const auto* h = s.as<Halfspace>())
    return h->normal.dot(y) <= h->offset - margin * h->normal.norm();
  const auto& inter = std::get<Intersection>(s.variant());
  for (const auto& member : inter.members)
    if (!strictly_inside(member, y, margin)) return false;
  return true;
}

}  // namespace

ConvexSet::ConvexSet(WholeSpace w) : v_(std::move(w)) {
  const auto& ws = std::get<WholeSpace>(v_);
  if (ws.dim <= 0) throw Error("WholeSpace: dimension must be positive");
  dim_ = ws.dim;
}

ConvexSet::ConvexSet(Box b) : v_(std::move(b)) {
  const auto& box = std::get<Box>(v_);
  if (box.lo.size() == 0) throw Error("Box: empty bound vectors");
  if (box.lo.size() != box.hi.size())
    throw DimensionMismatch("Box: lo and hi sizes differ");
  for (Eigen::Index j = 0; j < box.lo.size(); ++j) {
    if (std::isnan(box.lo(j)) || std::isnan(box.hi(j)))
      throw Error("Box: NaN bound at coordinate " + std::to_string(j));
    if (box.lo(j) > box.hi(j))
      throw Error("Box: lo > hi at coordinate " + std::to_string(j));
  }
  dim_ = box.lo.size();
}

ConvexSet::ConvexSet(Ball b) : v_(std::move(b)) {
  const auto& ball = std::get<Ball>(v_);
  if (ball.center.size() == 0) throw Error("Ball: empty center");
  if (!ball.center.allFinite()) throw Error("Ball: center must be finite");
  if (!(ball.radius > 0.0) || !std::isfinite(ball.radius))
    throw Error("Ball: radius must be positive and finite");
  dim_ = ball.center.size();
}

ConvexSet::ConvexSet(Halfspace h) : v_(std::move(h)) {
  const auto& hs = std::get<Halfspace>(v_);
  if (hs.normal.size() == 0) throw Error("Halfspace: empty normal");
  if (!hs.normal.allFinite() || !std::isfinite(hs.offset))
    throw Error("Halfspace: normal and offset must be finite");
  if (hs.normal.norm() == 0.0) throw Error("Halfspace: normal must be nonzero");
  dim_ = hs.normal.size();
}

ConvexSet::ConvexSet(Intersection i) : v_(std::move(i)) {
  auto& inter = std::get<Intersection>(v_);
  if (inter.members.empty()) throw Error("Intersection: needs at least one member");

  // Flatten nested intersections so Dykstra iterates over primitives only.
  std::vector<ConvexSet> flat;
  flat.reserve(inter.members.size());
  for (auto& member : inter.members) {
    if (const auto* nested = member.as<Intersection>()) {
      for (const auto& inner : nested->members) flat.push_back(inner);
    } else {
      flat.push_back(std::move(member));
    }
  }
  inter.members = std::move(flat);

  dim_ = inter.members.front().dim();
  for (const auto& member : inter.members) {
    if (member.dim() != dim_)
      throw DimensionMismatch("Intersection: members have mixed dimensions");
  }
}

Eigen::VectorXd project(const ConvexSet& s, const Eigen::VectorXd& u) {
  check_dim("project", s.dim(), u.size());
  if (s.as<WholeSpace>()) return u;
  if (const auto* b = s.as<Box>()) return project_box(*b, u);
  if (const auto* b = s.as<Ball>()) return project_ball(*b, u);
  if (const auto* h = s.as<Halfspace>()) return project_halfspace(*h, u);
  return project_intersection(std::get<Intersection>(s.variant()), u);
}

bool contains(const ConvexSet& s, const Eigen::VectorXd& x, double tol) {
  check_dim("contains", s.dim(), x.size());
  return (x - project(s, x)).norm() <= tol;
}

ActiveFacet active_facets(const ConvexSet& s, const Eigen::VectorXd& x) {
  check_dim("active_facets", s.dim(), x.size());
  ActiveFacet f;
  f.tol = kActivityTol;
  if (s.as<WholeSpace>()) return f;
  if (const auto* b = s.as<Box>()) {
    f.at_lower.resize(static_cast<std::size_t>(x.size()));
    f.at_upper.resize(static_cast<std::size_t>(x.size()));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      f.at_lower[static_cast<std::size_t>(j)] =
          std::isfinite(b->lo(j)) && x(j) <= b->lo(j) + f.tol;
      f.at_upper[static_cast<std::size_t>(j)] =
          std::isfinite(b->hi(j)) && x(j) >= b->hi(j) - f.tol;
    }
    return f;
  }
  if (const auto* b = s.as<Ball>()) {
    f.on_boundary = (x - b->center).norm() >= b->radius - f.tol;
    return f;
  }
  if (const auto* h = s.as<Halfspace>()) {
    f.on_boundary = h->normal.dot(x) >= h->offset - f.tol;
    return f;
  }
  throw UnsupportedSet("active_facets: intersection sets have no facet catalogue");
}

Eigen::VectorXd project_tangent_cone(const ConvexSet& s, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& v) {
  check_dim("project_tangent_cone", s.dim(), x.size());
  check_dim("project_tangent_cone", s.dim(), v.size());
  if (s.as<Intersection>())
    throw UnsupportedSet(
        "project_tangent_cone: not defined for intersection sets; "
        "use a scheme that needs only project()");
  if (!contains(s, x, kActivityTol))
    throw Error("project_tangent_cone: base point is not in the set");

  if (s.as<WholeSpace>()) return v;

  if (const auto* b = s.as<Box>()) {
    const ActiveFacet f = active_facets(s, x);
    Eigen::VectorXd out = v;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const bool lo_act = f.at_lower[static_cast<std::size_t>(j)];
      const bool hi_act = f.at_upper[static_cast<std::size_t>(j)];
      if (lo_act && hi_act)
        out(j) = 0.0;
      else if (lo_act)
        out(j) = std::max(v(j), 0.0);
      else if (hi_act)
        out(j) = std::min(v(j), 0.0);
    }
    (void)b;
    return out;
  }

  if (const auto* b = s.as<Ball>()) {
    if (!active_facets(s, x).on_boundary) return v;
    const Eigen::VectorXd radial = (x - b->center).normalized();
    const double outward = v.dot(radial);
    if (outward <= 0.0) return v;
    return v - outward * radial;
  }

  const auto& h = std::get<Halfspace>(s.variant());
  if (!active_facets(s, x).on_boundary) return v;
  const Eigen::VectorXd n = h.normal.normalized();
  const double outward = v.dot(n);
  if (outward <= 0.0) return v;
  return v - outward * n;
}

bool in_normal_cone(const ConvexSet& s, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& d, double tol) {
  return project_tangent_cone(s, x, d).norm() <= tol;
}

Eigen::VectorXd interior_point_hint(const ConvexSet& s) {
  if (s.as<WholeSpace>()) return Eigen::VectorXd::Zero(s.dim());
  if (const auto* b = s.as<Box>()) {
    Eigen::VectorXd y(s.dim());
    for (Eigen::Index j = 0; j < s.dim(); ++j) {
      const bool lo_fin = std::isfinite(b->lo(j));
      const bool hi_fin = std::isfinite(b->hi(j));
      if (lo_fin && hi_fin)
        y(j) = 0.5 * (b->lo(j) + b->hi(j));
      else if (lo_fin)
        y(j) = b->lo(j) + 1.0;
      else if (hi_fin)
        y(j) = b->hi(j) - 1.0;
      else
        y(j) = 0.0;
    }
    return y;
  }
  if (const auto* b = s.as<Ball>()) return b->center;
  if (const auto* h = s.as<Halfspace>()) {
    const double nn = h->normal.squaredNorm();
    return ((h->offset - h->normal.norm()) / nn) * h->normal;
  }
  const auto& inter = std::get<Intersection>(s.variant());
  for (const auto& member : inter.members) {
    const Eigen::VectorXd y = interior_point_hint(member);
    if (strictly_inside(s, y, 1e-9)) return y;
  }
  return interior_point_hint(inter.members.front());
}

bool probably_has_interior(const ConvexSet& s) {
  const auto* inter = s.as<Intersection>();
  if (inter == nullptr) return true;
  for (const auto& member : inter->members) {
    if (strictly_inside(s, interior_point_hint(member), 1e-9)) return true;
  }
  return false;
}

}  // namespace consensusflow
