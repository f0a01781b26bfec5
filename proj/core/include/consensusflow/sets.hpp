#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <variant>
#include <vector>

#include "consensusflow/errors.hpp"

namespace consensusflow {

// Facet-activity detection tolerance (absolute). Projected steps land
// iterates exactly on facets in floating point, so a tight value avoids
// flagging spurious activity.
inline constexpr double kActivityTol = 1e-9;

// Alternating-projection (Dykstra) controls for intersection sets.
inline constexpr double kDykstraTol = 1e-10;
inline constexpr std::size_t kDykstraMaxSweeps = 10000;

class ConvexSet;

struct WholeSpace {
  Eigen::Index dim = 0;
};

// {y : lo <= y <= hi} componentwise; +/-infinity endpoints allowed.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct Ball {
  Eigen::VectorXd center;
  double radius = 0.0;
};

// {y : normal . y <= offset}.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

struct Intersection {
  std::vector<ConvexSet> members;
};

// Closed convex set supporting exact Euclidean projection. Box, Ball,
// Halfspace, and WholeSpace additionally support tangent-cone projection and
// normal-cone membership; Intersection supports projection only (via
// alternating projections over its members).
class ConvexSet {
 public:
  using Variant = std::variant<WholeSpace, Box, Ball, Halfspace, Intersection>;

  // Each constructor validates its variant's invariants and throws Error on
  // violation. Nested intersections are flattened.
  ConvexSet(WholeSpace w);    // NOLINT(google-explicit-constructor)
  ConvexSet(Box b);           // NOLINT(google-explicit-constructor)
  ConvexSet(Ball b);          // NOLINT(google-explicit-constructor)
  ConvexSet(Halfspace h);     // NOLINT(google-explicit-constructor)
  ConvexSet(Intersection i);  // NOLINT(google-explicit-constructor)

  Eigen::Index dim() const { return dim_; }
  const Variant& variant() const { return v_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }

 private:
  Variant v_;
  Eigen::Index dim_ = 0;
};

// Per-facet activity flags at a point of the set, detected with tolerance
// `tol`. Box sets fill the per-coordinate vectors; Ball and Halfspace use
// the single `on_boundary` flag; WholeSpace has no facets.
struct ActiveFacet {
  std::vector<bool> at_lower;
  std::vector<bool> at_upper;
  bool on_boundary = false;
  double tol = kActivityTol;
};

// Euclidean projection onto S. Exact for WholeSpace/Box/Ball/Halfspace;
// within kDykstraTol for Intersection. Throws DimensionMismatch and, for
// intersections, DykstraFailure when the sweep budget is exhausted.
Eigen::VectorXd project(const ConvexSet& s, const Eigen::VectorXd& u);

// dist(x, S) <= tol, with the distance computed through project().
bool contains(const ConvexSet& s, const Eigen::VectorXd& x, double tol);

// Activity flags at x (x must lie in S within kActivityTol).
ActiveFacet active_facets(const ConvexSet& s, const Eigen::VectorXd& x);

// Projection of v onto the tangent cone of S at x in S. Supported for
// WholeSpace/Box/Ball/Halfspace; throws UnsupportedSet for Intersection
// (callers fall back to a scheme that needs only project()). Throws Error if
// x is not in S within kActivityTol.
Eigen::VectorXd project_tangent_cone(const ConvexSet& s, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& v);

// d lies in the normal cone of S at x, i.e. the tangent-cone projection of d
// vanishes (within tol).
bool in_normal_cone(const ConvexSet& s, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& d, double tol);

// A point expected to lie strictly inside S when S has nonempty interior:
// box midpoint (finite bounds clamped into a unit-ish range when infinite),
// ball center, a backed-off halfspace point, the origin for WholeSpace. For
// Intersection, a member-derived candidate. Used for validation sampling
// only; no exactness guarantee.
Eigen::VectorXd interior_point_hint(const ConvexSet& s);

// Heuristic check that S has nonempty interior: true for the primitive
// variants, and for Intersection true iff some member's hint lies strictly
// inside every member. A false result warrants a warning to the user, not a
// hard error, since it is a modeling assumption on the input.
bool probably_has_interior(const ConvexSet& s);

}  // namespace consensusflow
