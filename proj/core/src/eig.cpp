#include "consensusflow/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace consensusflow {

namespace {

double offdiag_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigResult jacobi_eigensymm(const Eigen::MatrixXd& input) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n)
    throw DimensionMismatch("jacobi_eigensymm: matrix is not square");
  if (n > 64)
    throw DimensionMismatch("jacobi_eigensymm: dimension " + std::to_string(n) +
                            " exceeds the supported maximum of 64");

  Eigen::MatrixXd a = input;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  if (n <= 1) {
    EigResult r;
    r.values = a.diagonal();
    r.vectors = v;
    return r;
  }

  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  const double tol = 1e-15 * scale * static_cast<double>(n);
  const int max_sweeps = 64;

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(a) <= tol) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        // Classical stable rotation choice (Golub & Van Loan eq. 8.4.4).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                             : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index j = 0; j < n; ++j) {
          const double apj = a(p, j);
          const double aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        a(p, q) = a(q, p) = 0.0;

        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  const double off = offdiag_norm(a);
  if (off > tol && sweep == max_sweeps)
    throw Error("jacobi_eigensymm: no convergence after " +
                std::to_string(max_sweeps) + " sweeps, off-diagonal norm " +
                std::to_string(off));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i) < a(j, j);
  });

  EigResult r;
  r.values.resize(n);
  r.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    r.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    r.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    // Deterministic sign: largest-magnitude entry made positive.
    Eigen::Index imax = 0;
    r.vectors.col(k).cwiseAbs().maxCoeff(&imax);
    if (r.vectors(imax, k) < 0.0) r.vectors.col(k) = -r.vectors.col(k);
  }
  return r;
}

}  // namespace consensusflow
