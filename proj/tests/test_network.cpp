#include "consensusflow/network.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "consensusflow/eig.hpp"
#include "consensusflow/rng.hpp"

namespace cf = consensusflow;

namespace {

Eigen::MatrixXd path2() {
  Eigen::MatrixXd a(2, 2);
  a << 0, 1, 1, 0;
  return a;
}

Eigen::MatrixXd ring5() {
  Eigen::MatrixXd a(5, 5);
  a << 0, 1, 0, 0, 1,
       1, 0, 1, 0, 1,
       0, 1, 0, 1, 0,
       0, 0, 1, 0, 1,
       1, 1, 0, 1, 0;
  return a;
}

TEST(Build, PathLaplacian) {
  const cf::Network net = cf::build_network(path2(), 1);
  Eigen::MatrixXd expect(2, 2);
  expect << 1, -1, -1, 1;
  EXPECT_EQ(net.laplacian(), expect);
  EXPECT_EQ(net.n(), 2);
  EXPECT_EQ(net.q(), 1);
}

TEST(Build, DegreesOnDiagonal) {
  const cf::Network net = cf::build_network(ring5(), 1);
  const Eigen::VectorXd deg = net.laplacian().diagonal();
  Eigen::VectorXd expect(5);
  expect << 2, 3, 2, 2, 3;
  EXPECT_EQ(deg, expect);
}

TEST(Build, RowSumsExactlyZero) {
  // The diagonal is assembled as the same-order sum of the negated
  // off-diagonal entries, so re-summing in construction order (ascending
  // column, then the diagonal) must give exactly 0.0, not merely within
  // rounding.
  cf::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(7));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double w = rng.uniform() < 0.4 ? 0.0 : rng.uniform(0.05, 2.0);
        a(i, j) = a(j, i) = w;
      }
    for (int i = 1; i < n; ++i)
      if (a(i - 1, i) == 0.0) a(i - 1, i) = a(i, i - 1) = rng.uniform(0.05, 2.0);
    const cf::Network net = cf::build_network(a, 1);
    const Eigen::MatrixXd& lap = net.laplacian();
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) sum += lap(i, j);
      sum += lap(i, i);
      EXPECT_EQ(sum, 0.0);
    }
  }
}

TEST(Build, NearSymmetricInputIsSymmetrized) {
  Eigen::MatrixXd a = path2();
  a(0, 1) = 1.0 + 1e-13;
  const cf::Network net = cf::build_network(a, 1);
  EXPECT_EQ(net.adjacency()(0, 1), net.adjacency()(1, 0));
}

TEST(Build, RejectsAsymmetric) {
  Eigen::MatrixXd a = path2();
  a(0, 1) = 2.0;
  EXPECT_THROW(cf::build_network(a, 1), cf::NotSymmetricError);
}

TEST(Build, RejectsNegativeWeight) {
  Eigen::MatrixXd a = path2();
  a(0, 1) = a(1, 0) = -1.0;
  EXPECT_THROW(cf::build_network(a, 1), cf::NegativeWeightError);
}

TEST(Build, RejectsNonzeroDiagonal) {
  Eigen::MatrixXd a = path2();
  a(0, 0) = 0.5;
  EXPECT_THROW(cf::build_network(a, 1), cf::Error);
}

TEST(Build, RejectsDisconnected) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 3) = a(3, 2) = 1.0;
  EXPECT_THROW(cf::build_network(a, 1), cf::DisconnectedError);
}

TEST(Build, RejectsIsolatedVertex) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  EXPECT_THROW(cf::build_network(a, 1), cf::DisconnectedError);
}

TEST(Build, SingleNodeIsConnected) {
  const cf::Network net = cf::build_network(Eigen::MatrixXd::Zero(1, 1), 2);
  EXPECT_EQ(net.n(), 1);
  EXPECT_EQ(net.laplacian()(0, 0), 0.0);
  EXPECT_EQ(net.spectral_data().lambda_max, 0.0);
}

TEST(Spectral, PathEigenvalues) {
  const cf::Network net = cf::build_network(path2(), 1);
  const cf::SpectralData& sd = net.spectral_data();
  EXPECT_NEAR(sd.lambda(0), 0.0, 1e-14);
  EXPECT_NEAR(sd.lambda(1), 2.0, 1e-14);
  EXPECT_NEAR(sd.lambda_max, 2.0, 1e-14);
}

TEST(Spectral, ThreePath) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 1.0;
  const cf::Network net = cf::build_network(a, 1);
  const Eigen::VectorXd& ev = net.spectral_data().lambda;
  EXPECT_NEAR(ev(0), 0.0, 1e-14);
  EXPECT_NEAR(ev(1), 1.0, 1e-13);
  EXPECT_NEAR(ev(2), 3.0, 1e-13);
}

TEST(Spectral, FactorizationReconstructs) {
  const cf::Network net = cf::build_network(ring5(), 1);
  const cf::SpectralData& sd = net.spectral_data();
  const Eigen::MatrixXd recon =
      sd.Q * sd.lambda.asDiagonal() * sd.Q.transpose();
  EXPECT_LE((recon - net.laplacian()).norm(), 1e-12);
  EXPECT_LE((sd.Q.transpose() * sd.Q - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-13);
}

TEST(Spectral, KernelIsConsensusDirection) {
  const cf::Network net = cf::build_network(ring5(), 1);
  const Eigen::VectorXd v0 = net.spectral_data().Q.col(0);
  // Kernel eigenvector of a connected graph is the normalized ones vector
  // up to sign.
  EXPECT_NEAR(std::abs(v0.sum()), std::sqrt(5.0), 1e-12);
}

TEST(ApplyLaplacian, MatchesDenseProduct) {
  const cf::Network net = cf::build_network(ring5(), 2);
  cf::Rng rng(17);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) y(i) = rng.uniform(-3.0, 3.0);
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(10, 10);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      big.block(2 * i, 2 * j, 2, 2) =
          net.laplacian()(i, j) * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_LE((cf::apply_laplacian(net, y) - big * y).norm(), 1e-12);
}

TEST(ApplyLaplacian, KillsConsensusVectors) {
  const cf::Network net = cf::build_network(ring5(), 1);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
  EXPECT_EQ(cf::apply_laplacian(net, ones), Eigen::VectorXd::Zero(5));
}

TEST(ApplyLaplacian, RejectsWrongLength) {
  const cf::Network net = cf::build_network(path2(), 2);
  EXPECT_THROW(cf::apply_laplacian(net, Eigen::VectorXd::Zero(3)), cf::DimensionMismatch);
}

TEST(NeighborView, ListsPositiveWeightsOnly) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = a(1, 0) = 2.0;
  a(1, 2) = a(2, 1) = 0.5;
  const cf::Network net = cf::build_network(a, 1);
  const auto nb = cf::neighbor_view(net, 1);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0].first, 0);
  EXPECT_DOUBLE_EQ(nb[0].second, 2.0);
  EXPECT_EQ(nb[1].first, 2);
  EXPECT_DOUBLE_EQ(nb[1].second, 0.5);
  EXPECT_EQ(cf::neighbor_view(net, 0).size(), 1u);
  EXPECT_THROW(cf::neighbor_view(net, 3), cf::Error);
}

TEST(Eig, DiagonalMatrix) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m.diagonal() << 3.0, 1.0, 2.0;
  const cf::EigResult r = cf::jacobi_eigensymm(m);
  EXPECT_DOUBLE_EQ(r.values(0), 1.0);
  EXPECT_DOUBLE_EQ(r.values(1), 2.0);
  EXPECT_DOUBLE_EQ(r.values(2), 3.0);
}

TEST(Eig, TwoByTwoClosedForm) {
  Eigen::MatrixXd m(2, 2);
  m << 2.0, 1.0, 1.0, 2.0;
  const cf::EigResult r = cf::jacobi_eigensymm(m);
  EXPECT_NEAR(r.values(0), 1.0, 1e-14);
  EXPECT_NEAR(r.values(1), 3.0, 1e-14);
}

TEST(Eig, RandomSymmetricReconstructs) {
  cf::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(9));
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform(-2.0, 2.0);
    const cf::EigResult r = cf::jacobi_eigensymm(m);
    const double scale = std::max(1.0, m.norm());
    EXPECT_LE((r.vectors * r.values.asDiagonal() * r.vectors.transpose() - m).norm(),
              1e-12 * scale);
    EXPECT_LE((r.vectors.transpose() * r.vectors -
               Eigen::MatrixXd::Identity(n, n))
                  .norm(),
              1e-12);
    for (int i = 1; i < n; ++i) EXPECT_LE(r.values(i - 1), r.values(i));
  }
}

TEST(Eig, RejectsNonSquareAndOversize) {
  EXPECT_THROW(cf::jacobi_eigensymm(Eigen::MatrixXd::Zero(2, 3)), cf::DimensionMismatch);
  EXPECT_THROW(cf::jacobi_eigensymm(Eigen::MatrixXd::Zero(65, 65)), cf::DimensionMismatch);
}

TEST(Eig, DeterministicSignConvention) {
  Eigen::MatrixXd m(3, 3);
  m << 2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0;
  const cf::EigResult a = cf::jacobi_eigensymm(m);
  const cf::EigResult b = cf::jacobi_eigensymm(m);
  EXPECT_EQ(a.vectors, b.vectors);
  for (int c = 0; c < 3; ++c) {
    Eigen::Index imax = 0;
    a.vectors.col(c).cwiseAbs().maxCoeff(&imax);
    EXPECT_GT(a.vectors(imax, c), 0.0);
  }
}

}  // namespace
