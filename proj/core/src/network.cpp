#include "consensusflow/network.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "consensusflow/eig.hpp"

namespace consensusflow {

namespace {

// Vertices unreachable from vertex 0 along positive-weight edges. Used only
// to build a readable error message once the spectral test has flagged the
// graph as disconnected.
std::vector<Eigen::Index> unreachable_from_zero(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index w = 0; w < n; ++w) {
      if (a(v, w) > 0.0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  std::vector<Eigen::Index> missing;
  for (Eigen::Index v = 0; v < n; ++v)
    if (!seen[static_cast<std::size_t>(v)]) missing.push_back(v);
  return missing;
}

}  // namespace

Network build_network(const Eigen::MatrixXd& adjacency, Eigen::Index q) {
  const Eigen::Index n = adjacency.rows();
  if (n == 0 || adjacency.cols() != n)
    throw DimensionMismatch("build_network: adjacency must be square and nonempty");
  if (q <= 0) throw Error("build_network: local state dimension must be positive");
  if (!adjacency.allFinite()) throw Error("build_network: adjacency has non-finite entries");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0)
      throw Error("build_network: nonzero diagonal entry at (" + std::to_string(i) + "," +
                  std::to_string(i) + ")");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) < 0.0)
        throw NegativeWeightError("build_network: negative weight at (" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
      if (std::abs(adjacency(i, j) - adjacency(j, i)) > 1e-12)
        throw NotSymmetricError("build_network: adjacency not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }

  Network net;
  net.q_ = q;
  // Exact symmetrization so a_ij == a_ji bitwise; downstream cancellation
  // arguments (row sums of L, dual conservation) rely on it.
  net.adjacency_ = 0.5 * (adjacency + adjacency.transpose());

  // Degree as the floating-point row sum in ascending column order. The
  // matching accumulation order makes every Laplacian row sum exactly zero.
  net.laplacian_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double degree = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      degree += net.adjacency_(i, j);
      net.laplacian_(i, j) = -net.adjacency_(i, j);
    }
    net.laplacian_(i, i) = degree;
  }

  net.spectral_ = [&] {
    const EigResult eig = jacobi_eigensymm(net.laplacian_);
    SpectralData sd;
    sd.Q = eig.vectors;
    sd.lambda = eig.values;
    sd.lambda_max = eig.values(n - 1);
    return sd;
  }();

  if (n > 1 && net.spectral_.lambda(1) <= 1e-10) {
    const std::vector<Eigen::Index> missing = unreachable_from_zero(net.adjacency_);
    std::string who;
    for (std::size_t k = 0; k < missing.size(); ++k)
      who += (k ? "," : "") + std::to_string(missing[k]);
    throw DisconnectedError("build_network: graph is disconnected (vertices {" + who +
                            "} unreachable from vertex 0)");
  }
  return net;
}

Eigen::VectorXd apply_laplacian(const Network& net, const Eigen::VectorXd& y) {
  const Eigen::Index n = net.n();
  const Eigen::Index q = net.q();
  if (y.size() != n * q)
    throw DimensionMismatch("apply_laplacian: expected stacked vector of size " +
                            std::to_string(n * q) + ", got " + std::to_string(y.size()));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n * q);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto yi = y.segment(i * q, q);
    auto oi = out.segment(i * q, q);
    for (const auto& [j, w] : neighbor_view(net, i)) {
      oi += w * (yi - y.segment(j * q, q));
    }
  }
  return out;
}

const SpectralData& spectral(const Network& net) { return net.spectral_data(); }

std::vector<std::pair<Eigen::Index, double>> neighbor_view(const Network& net,
                                                           Eigen::Index i) {
  if (i < 0 || i >= net.n())
    throw Error("neighbor_view: agent index " + std::to_string(i) + " out of range [0," +
                std::to_string(net.n() - 1) + "]");
  std::vector<std::pair<Eigen::Index, double>> nbrs;
  for (Eigen::Index j = 0; j < net.n(); ++j) {
    const double w = net.adjacency()(i, j);
    if (w > 0.0) nbrs.emplace_back(j, w);
  }
  return nbrs;
}

}  // namespace consensusflow
