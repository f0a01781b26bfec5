#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "consensusflow/errors.hpp"
#include "consensusflow/interval.hpp"

namespace consensusflow {

// Branch-activation tolerance (absolute) for kink detection in subgradient
// and subdifferential evaluation.
inline constexpr double kKinkTol = 1e-9;

// Deep-copying single-element box so recursive variants keep value
// semantics (a variant alternative cannot contain the variant by value).
template <class T>
class Boxed {
 public:
  Boxed(T v) : p_(std::make_unique<T>(std::move(v))) {}  // NOLINT
  Boxed(const Boxed& o) : p_(std::make_unique<T>(*o.p_)) {}
  Boxed(Boxed&&) noexcept = default;
  Boxed& operator=(const Boxed& o) {
    p_ = std::make_unique<T>(*o.p_);
    return *this;
  }
  Boxed& operator=(Boxed&&) noexcept = default;

  const T& operator*() const { return *p_; }
  const T* operator->() const { return p_.get(); }

 private:
  std::unique_ptr<T> p_;
};

class ConvexFunction;

// a.x + b
struct Affine {
  Eigen::VectorXd a;
  double b = 0.0;
};

// 0.5 x'Px + q.x + r with P symmetric positive semidefinite.
struct Quadratic {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double r = 0.0;
};

// weight * ||x - center||_1
struct AbsDev {
  Eigen::VectorXd center;
  double weight = 1.0;
};

// One-dimensional hinge pair: max(0, (center - halfwidth) - x,
// x - (center + halfwidth)). Zero on the plateau, unit slopes outside.
struct Deadzone {
  double center = 0.0;
  double halfwidth = 1.0;
};

// max_i (a_i.x + b_i)
struct MaxAffine {
  struct Piece {
    Eigen::VectorXd a;
    double b = 0.0;
  };
  std::vector<Piece> pieces;
};

struct FuncSum {
  std::vector<ConvexFunction> members;
};

struct Scaled {
  double kappa = 1.0;
  Boxed<ConvexFunction> inner;
};

// Convex cost, finite on all of R^q. Provides exact values, a deterministic
// least-norm subgradient selection, and (for one-dimensional functions) the
// exact subdifferential interval.
class ConvexFunction {
 public:
  using Variant = std::variant<Affine, Quadratic, AbsDev, Deadzone, MaxAffine, FuncSum, Scaled>;

  // Constructors validate invariants (PSD check for Quadratic, nonnegative
  // weights, dimension agreement) and throw Error on violation.
  ConvexFunction(Affine f);     // NOLINT(google-explicit-constructor)
  ConvexFunction(Quadratic f);  // NOLINT(google-explicit-constructor)
  ConvexFunction(AbsDev f);     // NOLINT(google-explicit-constructor)
  ConvexFunction(Deadzone f);   // NOLINT(google-explicit-constructor)
  ConvexFunction(MaxAffine f);  // NOLINT(google-explicit-constructor)
  ConvexFunction(FuncSum f);    // NOLINT(google-explicit-constructor)
  ConvexFunction(Scaled f);     // NOLINT(google-explicit-constructor)

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

double value(const ConvexFunction& f, const Eigen::VectorXd& x);

// Deterministic subgradient selection: the least-norm element for each
// primitive (zero at kinks of AbsDev/Deadzone; least-norm point of the
// active-gradient hull for MaxAffine), composed additively through
// FuncSum/Scaled. Identical inputs give bitwise-identical outputs.
Eigen::VectorXd subgradient(const ConvexFunction& f, const Eigen::VectorXd& x);

// Exact subdifferential [d-(x), d+(x)] of a one-dimensional function.
// Throws NotUnivariate when dim(f) != 1.
Interval subdifferential_1d(const ConvexFunction& f, double x);

// Points where a one-dimensional function can be nondifferentiable
// (plateau edges of Deadzone, the center of AbsDev, crossing points of
// MaxAffine pieces), unsorted and possibly with duplicates. Smooth variants
// contribute nothing. Throws NotUnivariate when dim(f) != 1.
std::vector<double> breakpoints_1d(const ConvexFunction& f);

struct ConvexityReport {
  std::size_t samples = 0;
  std::size_t midpoint_violations = 0;
  std::size_t subgradient_violations = 0;
  double max_violation = 0.0;
};

// Monte-Carlo sanity check on sampled pairs in [-10, 10]^q: midpoint
// convexity f((x+y)/2) <= (f(x)+f(y))/2 and the subgradient inequality
// f(y) >= f(x) + g(x).(y-x), both up to 1e-9 slack. Report-only.
ConvexityReport validate_convexity(const ConvexFunction& f, std::size_t samples,
                                   std::uint64_t seed);

}  // namespace consensusflow
