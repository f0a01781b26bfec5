#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "consensusflow/errors.hpp"

namespace consensusflow {

// Spectral factorization of the graph Laplacian: L = Q diag(lambda) Q'.
struct SpectralData {
  Eigen::MatrixXd Q;        // orthonormal eigenvectors, column i of eigenvalue i
  Eigen::VectorXd lambda;   // ascending; lambda(0) is the kernel eigenvalue
  double lambda_max = 0.0;  // lambda(n-1)
};

// Weighted undirected communication graph over n agents, each carrying a
// local state in R^q. Holds the adjacency matrix, the Laplacian
// (degree minus adjacency, assembled so each row sums to exactly zero in
// floating point), and the full spectral factorization computed at build
// time. Immutable after construction. Agent indices are 0-based.
class Network {
 public:
  Eigen::Index n() const { return adjacency_.rows(); }
  Eigen::Index q() const { return q_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  const Eigen::MatrixXd& laplacian() const { return laplacian_; }
  const SpectralData& spectral_data() const { return spectral_; }

 private:
  friend Network build_network(const Eigen::MatrixXd&, Eigen::Index);
  Network() = default;

  Eigen::MatrixXd adjacency_;
  Eigen::MatrixXd laplacian_;
  SpectralData spectral_;
  Eigen::Index q_ = 1;
};

// Validates the adjacency matrix (square, symmetric within 1e-12, zero
// diagonal, nonnegative weights), symmetrizes it exactly, assembles the
// Laplacian, and verifies connectivity. Throws NotSymmetricError,
// NegativeWeightError, or DisconnectedError naming the offending indices.
Network build_network(const Eigen::MatrixXd& adjacency, Eigen::Index q);

// Laplacian action on a stacked vector y in R^{nq}, computed blockwise as
// (sum_j a_ij (y_i - y_j))_i without materializing the nq x nq matrix.
Eigen::VectorXd apply_laplacian(const Network& net, const Eigen::VectorXd& y);

// The cached eigendecomposition of the Laplacian.
const SpectralData& spectral(const Network& net);

// Positive-weight neighbors of agent i as (index, weight) pairs. The only
// graph-access path the per-agent dynamics uses, so locality of the update
// law is structural rather than by convention.
std::vector<std::pair<Eigen::Index, double>> neighbor_view(const Network& net,
                                                           Eigen::Index i);

}  // namespace consensusflow
