#include "consensusflow/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "consensusflow/eig.hpp"
#include "consensusflow/rng.hpp"

namespace consensusflow {

namespace {

void check_dim(const char* op, Eigen::Index expected, Eigen::Index got) {
  if (expected != got)
    throw DimensionMismatch(std::string(op) + ": expected vector of size " +
                            std::to_string(expected) + ", got " + std::to_string(got));
}

// Euclidean projection onto the probability simplex (sort-based exact
// algorithm).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    cumsum += u[static_cast<std::size_t>(i)];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0);
}

// Least-norm point of conv{columns of G}, by projected gradient descent on
// the simplex of weights. The iteration count is fixed so the result is a
// deterministic function of G.
Eigen::VectorXd min_norm_in_hull(const Eigen::MatrixXd& g) {
  const Eigen::Index m = g.cols();
  if (m == 1) return g.col(0);
  const Eigen::MatrixXd h = g.transpose() * g;
  const double lip = std::max(2.0 * h.norm(), 1e-12);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  for (int it = 0; it < 512; ++it) {
    w = project_simplex(w - (2.0 / lip) * (h * w));
  }
  return g * w;
}

std::vector<std::size_t> active_pieces(const MaxAffine& f, const Eigen::VectorXd& x) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : f.pieces) best = std::max(best, p.a.dot(x) + p.b);
  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < f.pieces.size(); ++i) {
    if (f.pieces[i].a.dot(x) + f.pieces[i].b >= best - kKinkTol) act.push_back(i);
  }
  return act;
}

}  // namespace

ConvexFunction::ConvexFunction(Affine f) : v_(std::move(f)) {
  const auto& a = std::get<Affine>(v_);
  if (a.a.size() == 0) throw Error("Affine: empty gradient");
  if (!a.a.allFinite() || !std::isfinite(a.b)) throw Error("Affine: non-finite data");
  dim_ = a.a.size();
}

ConvexFunction::ConvexFunction(Quadratic f) : v_(std::move(f)) {
  auto& q = std::get<Quadratic>(v_);
  const Eigen::Index n = q.P.rows();
  if (n == 0 || q.P.cols() != n) throw Error("Quadratic: P must be square and nonempty");
  if (q.q.size() != n) throw DimensionMismatch("Quadratic: q length does not match P");
  if (!q.P.allFinite() || !q.q.allFinite() || !std::isfinite(q.r))
    throw Error("Quadratic: non-finite data");
  const double scale = std::max(q.P.cwiseAbs().maxCoeff(), 1.0);
  if ((q.P - q.P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error("Quadratic: P is not symmetric");
  q.P = 0.5 * (q.P + q.P.transpose()).eval();
  const EigResult eig = jacobi_eigensymm(q.P);
  if (eig.values.minCoeff() < -1e-10)
    throw Error("Quadratic: P is not positive semidefinite (min eigenvalue " +
                std::to_string(eig.values.minCoeff()) + ")");
  dim_ = n;
}

ConvexFunction::ConvexFunction(AbsDev f) : v_(std::move(f)) {
  const auto& a = std::get<AbsDev>(v_);
  if (a.center.size() == 0) throw Error("AbsDev: empty center");
  if (!a.center.allFinite() || !std::isfinite(a.weight)) throw Error("AbsDev: non-finite data");
  if (a.weight < 0.0) throw Error("AbsDev: weight must be nonnegative");
  dim_ = a.center.size();
}

ConvexFunction::ConvexFunction(Deadzone f) : v_(std::move(f)) {
  const auto& d = std::get<Deadzone>(v_);
  if (!std::isfinite(d.center) || !std::isfinite(d.halfwidth))
    throw Error("Deadzone: non-finite data");
  if (!(d.halfwidth > 0.0)) throw Error("Deadzone: halfwidth must be positive");
  dim_ = 1;
}

ConvexFunction::ConvexFunction(MaxAffine f) : v_(std::move(f)) {
  const auto& m = std::get<MaxAffine>(v_);
  if (m.pieces.empty()) throw Error("MaxAffine: needs at least one piece");
  dim_ = m.pieces.front().a.size();
  if (dim_ == 0) throw Error("MaxAffine: empty piece gradient");
  for (const auto& p : m.pieces) {
    if (p.a.size() != dim_) throw DimensionMismatch("MaxAffine: pieces have mixed dimensions");
    if (!p.a.allFinite() || !std::isfinite(p.b)) throw Error("MaxAffine: non-finite piece");
  }
}

ConvexFunction::ConvexFunction(FuncSum f) : v_(std::move(f)) {
  const auto& s = std::get<FuncSum>(v_);
  if (s.members.empty()) throw Error("FuncSum: needs at least one member");
  dim_ = s.members.front().dim();
  for (const auto& m : s.members) {
    if (m.dim() != dim_) throw DimensionMismatch("FuncSum: members have mixed dimensions");
  }
}

ConvexFunction::ConvexFunction(Scaled f) : v_(std::move(f)) {
  const auto& s = std::get<Scaled>(v_);
  if (!std::isfinite(s.kappa) || s.kappa < 0.0)
    throw Error("Scaled: factor must be finite and nonnegative");
  dim_ = s.inner->dim();
}

double value(const ConvexFunction& f, const Eigen::VectorXd& x) {
  check_dim("value", f.dim(), x.size());
  if (const auto* a = f.as<Affine>()) return a->a.dot(x) + a->b;
  if (const auto* q = f.as<Quadratic>()) return 0.5 * x.dot(q->P * x) + q->q.dot(x) + q->r;
  if (const auto* a = f.as<AbsDev>()) return a->weight * (x - a->center).lpNorm<1>();
  if (const auto* d = f.as<Deadzone>()) {
    const double v = x(0);
    return std::max({0.0, (d->center - d->halfwidth) - v, v - (d->center + d->halfwidth)});
  }
  if (const auto* m = f.as<MaxAffine>()) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : m->pieces) best = std::max(best, p.a.dot(x) + p.b);
    return best;
  }
  if (const auto* s = f.as<FuncSum>()) {
    double total = 0.0;
    for (const auto& m : s->members) total += value(m, x);
    return total;
  }
  const auto& s = std::get<Scaled>(f.variant());
  if (s.kappa == 0.0) return 0.0;
  return s.kappa * value(*s.inner, x);
}

Eigen::VectorXd subgradient(const ConvexFunction& f, const Eigen::VectorXd& x) {
  check_dim("subgradient", f.dim(), x.size());
  if (const auto* a = f.as<Affine>()) return a->a;
  if (const auto* q = f.as<Quadratic>()) return q->P * x + q->q;
  if (const auto* a = f.as<AbsDev>()) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double d = x(j) - a->center(j);
      if (std::abs(d) <= kKinkTol)
        g(j) = 0.0;
      else
        g(j) = d > 0.0 ? a->weight : -a->weight;
    }
    return g;
  }
  if (const auto* d = f.as<Deadzone>()) {
    Eigen::VectorXd g(1);
    const double v = x(0);
    const double lo_edge = d->center - d->halfwidth;
    const double hi_edge = d->center + d->halfwidth;
    if (v < lo_edge - kKinkTol)
      g(0) = -1.0;
    else if (v > hi_edge + kKinkTol)
      g(0) = 1.0;
    else
      g(0) = 0.0;
    return g;
  }
  if (const auto* m = f.as<MaxAffine>()) {
    const std::vector<std::size_t> act = active_pieces(*m, x);
    if (act.size() == 1) return m->pieces[act.front()].a;
    if (f.dim() == 1) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i : act) {
        lo = std::min(lo, m->pieces[i].a(0));
        hi = std::max(hi, m->pieces[i].a(0));
      }
      Eigen::VectorXd g(1);
      g(0) = Interval{lo, hi}.clamp(0.0);
      return g;
    }
    Eigen::MatrixXd g(f.dim(), static_cast<Eigen::Index>(act.size()));
    for (std::size_t c = 0; c < act.size(); ++c)
      g.col(static_cast<Eigen::Index>(c)) = m->pieces[act[c]].a;
    return min_norm_in_hull(g);
  }
  if (const auto* s = f.as<FuncSum>()) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (const auto& m : s->members) g += subgradient(m, x);
    return g;
  }
  const auto& s = std::get<Scaled>(f.variant());
  if (s.kappa == 0.0) return Eigen::VectorXd::Zero(x.size());
  return s.kappa * subgradient(*s.inner, x);
}

Interval subdifferential_1d(const ConvexFunction& f, double x) {
  if (f.dim() != 1)
    throw NotUnivariate("subdifferential_1d: function has dimension " +
                        std::to_string(f.dim()));
  if (const auto* a = f.as<Affine>()) return Interval::point(a->a(0));
  if (const auto* q = f.as<Quadratic>()) return Interval::point(q->P(0, 0) * x + q->q(0));
  if (const auto* a = f.as<AbsDev>()) {
    const double d = x - a->center(0);
    if (std::abs(d) <= kKinkTol) return {-a->weight, a->weight};
    return Interval::point(d > 0.0 ? a->weight : -a->weight);
  }
  if (const auto* d = f.as<Deadzone>()) {
    const double lo_edge = d->center - d->halfwidth;
    const double hi_edge = d->center + d->halfwidth;
    const bool at_lo = std::abs(x - lo_edge) <= kKinkTol;
    const bool at_hi = std::abs(x - hi_edge) <= kKinkTol;
    if (at_lo && at_hi) return {-1.0, 1.0};
    if (at_lo) return {-1.0, 0.0};
    if (at_hi) return {0.0, 1.0};
    if (x < lo_edge) return Interval::point(-1.0);
    if (x > hi_edge) return Interval::point(1.0);
    return Interval::point(0.0);
  }
  if (const auto* m = f.as<MaxAffine>()) {
    Eigen::VectorXd xv(1);
    xv(0) = x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i : active_pieces(*m, xv)) {
      lo = std::min(lo, m->pieces[i].a(0));
      hi = std::max(hi, m->pieces[i].a(0));
    }
    return {lo, hi};
  }
  if (const auto* s = f.as<FuncSum>()) {
    Interval total = Interval::point(0.0);
    for (const auto& m : s->members) total = total + subdifferential_1d(m, x);
    return total;
  }
  const auto& s = std::get<Scaled>(f.variant());
  return subdifferential_1d(*s.inner, x).scaled(s.kappa);
}

std::vector<double> breakpoints_1d(const ConvexFunction& f) {
  if (f.dim() != 1)
    throw NotUnivariate("breakpoints_1d: function has dimension " + std::to_string(f.dim()));
  std::vector<double> pts;
  if (const auto* d = f.as<Deadzone>()) {
    pts.push_back(d->center - d->halfwidth);
    pts.push_back(d->center + d->halfwidth);
  } else if (const auto* a = f.as<AbsDev>()) {
    pts.push_back(a->center(0));
  } else if (const auto* m = f.as<MaxAffine>()) {
    for (std::size_t i = 0; i < m->pieces.size(); ++i) {
      for (std::size_t j = i + 1; j < m->pieces.size(); ++j) {
        const double da = m->pieces[i].a(0) - m->pieces[j].a(0);
        if (da != 0.0) pts.push_back((m->pieces[j].b - m->pieces[i].b) / da);
      }
    }
  } else if (const auto* s = f.as<FuncSum>()) {
    for (const auto& member : s->members) {
      const std::vector<double> inner = breakpoints_1d(member);
      pts.insert(pts.end(), inner.begin(), inner.end());
    }
  } else if (const auto* s2 = f.as<Scaled>()) {
    if (s2->kappa > 0.0) pts = breakpoints_1d(*s2->inner);
  }
  return pts;
}

ConvexityReport validate_convexity(const ConvexFunction& f, std::size_t samples,
                                   std::uint64_t seed) {
  Rng rng(seed);
  ConvexityReport report;
  report.samples = samples;
  const Eigen::Index d = f.dim();
  const double tol = 1e-9;
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::VectorXd x(d);
    Eigen::VectorXd y(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      x(j) = rng.uniform(-10.0, 10.0);
      y(j) = rng.uniform(-10.0, 10.0);
    }
    const double fx = value(f, x);
    const double fy = value(f, y);
    const double mid_gap = value(f, 0.5 * (x + y)) - 0.5 * (fx + fy);
    if (mid_gap > tol) {
      ++report.midpoint_violations;
      report.max_violation = std::max(report.max_violation, mid_gap);
    }
    const double sub_gap = fx + subgradient(f, x).dot(y - x) - fy;
    if (sub_gap > tol) {
      ++report.subgradient_violations;
      report.max_violation = std::max(report.max_violation, sub_gap);
    }
  }
  return report;
}

}  // namespace consensusflow
