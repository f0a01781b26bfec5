#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace consensusflow {

// Base class for every error thrown by this library. Catching `Error`
// distinguishes our failures from generic std exceptions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Vector/matrix arguments whose sizes do not agree with the object they are
// passed to (wrong ambient dimension, wrong stacked length, ...).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Requested operation is not defined for the given set variant, e.g. a
// tangent-cone projection on an intersection set.
class UnsupportedSet : public Error {
 public:
  using Error::Error;
};

// The alternating-projection loop for intersection sets failed to reach its
// tolerance within the sweep budget.
class DykstraFailure : public Error {
 public:
  DykstraFailure(const std::string& what, double residual, std::size_t sweeps)
      : Error(what), residual(residual), sweeps(sweeps) {}
  double residual;
  std::size_t sweeps;
};

// A 1-D-only operation (interval subdifferential, kink scan) was invoked on a
// function whose domain dimension is not 1.
class NotUnivariate : public Error {
 public:
  using Error::Error;
};

// Adjacency input was not symmetric within tolerance.
class NotSymmetricError : public Error {
 public:
  using Error::Error;
};

// Adjacency input contained a negative weight.
class NegativeWeightError : public Error {
 public:
  using Error::Error;
};

// The weighted graph is not connected (Fiedler value below threshold).
class DisconnectedError : public Error {
 public:
  using Error::Error;
};

// A trajectory produced a NaN or infinity. Carries the step index at which
// the state first went bad.
class NonFinite : public Error {
 public:
  NonFinite(const std::string& what, std::size_t step) : Error(what), step(step) {}
  std::size_t step;
};

// The factorization identity required by the gain schedule failed its
// numerical self-check.
class IdentityViolation : public Error {
 public:
  IdentityViolation(const std::string& what, double violation)
      : Error(what), violation(violation) {}
  double violation;
};

// No admissible split of the stationarity residual into subgradient and
// normal-cone parts exists at the candidate point.
class InfeasibleSplit : public Error {
 public:
  InfeasibleSplit(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

// A grid or sampling routine needs a bounded region but the feasible set is
// unbounded in some coordinate.
class UnboundedFeasibleSet : public Error {
 public:
  using Error::Error;
};

// Validation found (numerically) no common point for an intersection set.
class EmptyIntersection : public Error {
 public:
  using Error::Error;
};

// Malformed configuration input. `path` is a JSON-pointer-style location of
// the offending field, e.g. "/agents/2/constraint/lower".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string path)
      : Error(what + " (at " + path + ")"), path(std::move(path)) {}
  std::string path;
};

}  // namespace consensusflow
