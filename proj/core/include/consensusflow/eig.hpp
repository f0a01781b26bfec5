#pragma once

#include <Eigen/Dense>

#include "consensusflow/errors.hpp"

namespace consensusflow {

// Full eigendecomposition of a real symmetric matrix.
struct EigResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column i pairs with values(i), orthonormal
};

// Cyclic Jacobi rotation method. Quadratically convergent and accurate to
// machine precision for the small matrices used here (n <= 64). Eigenvalues
// are returned in ascending order; each eigenvector's sign is fixed so its
// largest-magnitude entry is positive, which keeps the output deterministic.
// Throws Error (reporting the remaining off-diagonal norm) if the sweep
// budget is exhausted, and DimensionMismatch for non-square or oversized
// input.
EigResult jacobi_eigensymm(const Eigen::MatrixXd& a);

}  // namespace consensusflow
