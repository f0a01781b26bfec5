#pragma once

#include <algorithm>
#include <limits>

#include "consensusflow/errors.hpp"

namespace consensusflow {

// Closed interval on the extended real line, [lo, hi] with lo <= hi.
// Endpoints may be +/-infinity. Used for 1-D subdifferentials, where sums
// and nonnegative scalings are the only operations the calculus needs.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static constexpr double inf() { return std::numeric_limits<double>::infinity(); }

  static Interval point(double v) { return {v, v}; }
  static Interval whole() { return {-inf(), inf()}; }

  bool contains(double v) const { return lo <= v && v <= hi; }

  // Distance from v to the interval; zero when v is inside.
  double distance(double v) const {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
  }

  double clamp(double v) const { return std::min(std::max(v, lo), hi); }

  Interval operator+(const Interval& o) const {
    // Endpoints of the same sign of infinity only; a subdifferential sum
    // never produces inf + (-inf).
    return {lo + o.lo, hi + o.hi};
  }

  // Scaling by a nonnegative constant. c = 0 collapses to {0} even when an
  // endpoint is infinite (0 * inf would be NaN in plain IEEE arithmetic).
  Interval scaled(double c) const {
    if (c < 0.0) throw Error("Interval::scaled requires a nonnegative factor");
    if (c == 0.0) return point(0.0);
    return {c * lo, c * hi};
  }
};

}  // namespace consensusflow
