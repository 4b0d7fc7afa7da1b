#ifndef WCC_GEOMETRY_HPP
#define WCC_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "wcc/common.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// Dual-block geometry: distance generating function and Bregman divergence.
//
// Two geometries are supported on the probability simplex:
//   entropy    d(y) = sum_i y_i log y_i   (divergence = KL, pairs with l1)
//   euclidean  d(y) = 0.5 * ||y||^2        (divergence = 0.5||.||^2, pairs with l2)
// ---------------------------------------------------------------------------

enum class GeometryKind { euclidean, entropy };

struct BregmanGeometry {
  GeometryKind kind = GeometryKind::entropy;
  int dim = 0;
  double floor = 1e-12;  // interior floor for simplex coordinates

  BregmanGeometry() = default;
  BregmanGeometry(GeometryKind k, int q, double fl = 1e-12) : kind(k), dim(q), floor(fl) {
    require(q >= 1, "BregmanGeometry: dim must be positive");
    require(fl > 0.0 && fl < 1.0 / q, "BregmanGeometry: floor out of range");
  }

  static BregmanGeometry entropy_on_simplex(int q, double fl = 1e-12) {
    return BregmanGeometry(GeometryKind::entropy, q, fl);
  }
  static BregmanGeometry euclidean_on_simplex(int q, double fl = 1e-12) {
    return BregmanGeometry(GeometryKind::euclidean, q, fl);
  }

  double dgf(const Vec& y) const {
    if (kind == GeometryKind::euclidean) return 0.5 * y.squaredNorm();
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      if (y[i] > 0.0) s += y[i] * std::log(y[i]);  // 0 log 0 = 0
    }
    return s;
  }

  Vec dgf_grad(const Vec& y) const {
    if (kind == GeometryKind::euclidean) return y;
    Vec g(y.size());
    for (int i = 0; i < y.size(); ++i) g[i] = std::log(y[i]) + 1.0;
    return g;
  }

  // Minimizer of d over the simplex; uniform for both geometries.
  Vec argmin_dgf() const { return Vec::Constant(dim, 1.0 / dim); }

  // D_y = sqrt(2 max d - 2 min d) over the simplex.
  double dual_diameter() const {
    if (kind == GeometryKind::euclidean) return std::sqrt(1.0 - 1.0 / dim);
    return std::sqrt(2.0 * std::log(static_cast<double>(dim)));
  }

  // Norm paired with the geometry (l1 for entropy, l2 for euclidean).
  double paired_norm(const Vec& v) const {
    return kind == GeometryKind::entropy ? v.lpNorm<1>() : v.norm();
  }
  // Its dual (l-infinity for entropy).
  double dual_norm(const Vec& v) const {
    return kind == GeometryKind::entropy ? v.lpNorm<Eigen::Infinity>() : v.norm();
  }

  bool is_interior(const Vec& y) const { return y.minCoeff() >= floor; }

  // Floors coordinates and renormalizes to the simplex. The second pass keeps
  // coordinates at or above the floor after renormalization; the induced sum
  // error is O(dim^2 * floor^2).
  void snap_to_simplex(Vec& y) const {
    y /= y.sum();
    y = y.cwiseMax(floor);
    y /= y.sum();
    y = y.cwiseMax(floor);
  }
};

// Bregman divergence V(y, y_ref) = d(y) - d(y_ref) - <grad d(y_ref), y - y_ref>.
inline double bregman_divergence(const BregmanGeometry& geom, const Vec& y, const Vec& y_ref) {
  require(y.size() == y_ref.size() && y.size() == geom.dim,
          "bregman_divergence: dimension mismatch");
  if (geom.kind == GeometryKind::entropy && y_ref.minCoeff() < geom.floor) {
    throw std::domain_error("bregman_divergence: reference point on simplex boundary");
  }
  double v = geom.dgf(y) - geom.dgf(y_ref) - geom.dgf_grad(y_ref).dot(y - y_ref);
  return std::max(v, 0.0);
}

// ---------------------------------------------------------------------------
// Primal constraint set, encoding g(x) as an indicator.
// ---------------------------------------------------------------------------

enum class ConstraintKind { free, l2_ball, box };

struct PrimalConstraint {
  ConstraintKind kind = ConstraintKind::free;
  double radius = 0.0;  // l2_ball
  Vec lo, hi;           // box

  static PrimalConstraint unconstrained() { return PrimalConstraint{}; }

  static PrimalConstraint ball(double r) {
    require(r > 0.0, "PrimalConstraint: ball radius must be positive");
    PrimalConstraint c;
    c.kind = ConstraintKind::l2_ball;
    c.radius = r;
    return c;
  }

  static PrimalConstraint box_bounds(Vec lo, Vec hi) {
    require(lo.size() == hi.size(), "PrimalConstraint: box bound sizes differ");
    require((hi - lo).minCoeff() >= 0.0, "PrimalConstraint: box requires lo <= hi");
    PrimalConstraint c;
    c.kind = ConstraintKind::box;
    c.lo = std::move(lo);
    c.hi = std::move(hi);
    return c;
  }

  static PrimalConstraint cube(int p, double lo, double hi) {
    return box_bounds(Vec::Constant(p, lo), Vec::Constant(p, hi));
  }

  double diameter() const {
    switch (kind) {
      case ConstraintKind::free: return kInf;
      case ConstraintKind::l2_ball: return 2.0 * radius;
      case ConstraintKind::box: return (hi - lo).norm();
    }
    return kInf;
  }

  Vec project(const Vec& x) const {
    switch (kind) {
      case ConstraintKind::free: return x;
      case ConstraintKind::l2_ball: {
        double nrm = x.norm();
        if (nrm <= radius) return x;
        return x * (radius / nrm);
      }
      case ConstraintKind::box: return x.cwiseMax(lo).cwiseMin(hi);
    }
    return x;
  }

  void project_in_place(Vec& x) const {
    switch (kind) {
      case ConstraintKind::free: return;
      case ConstraintKind::l2_ball: {
        double nrm = x.norm();
        if (nrm > radius) x *= radius / nrm;
        return;
      }
      case ConstraintKind::box:
        x = x.cwiseMax(lo).cwiseMin(hi);
        return;
    }
  }

  bool contains(const Vec& x, double tol = 1e-12) const {
    return (x - project(x)).norm() <= tol;
  }
};

inline Vec project(const PrimalConstraint& constraint, const Vec& x) {
  return constraint.project(x);
}

// ---------------------------------------------------------------------------
// Dual regularizer r(y): simplex indicator or theta * KL(y, 1/n).
// ---------------------------------------------------------------------------

enum class RegularizerKind { simplex_indicator, kl_to_uniform };

struct DualRegularizer {
  RegularizerKind kind = RegularizerKind::simplex_indicator;
  double theta = 0.0;

  static DualRegularizer simplex_indicator() { return DualRegularizer{}; }

  static DualRegularizer kl_to_uniform(double theta) {
    require(theta > 0.0, "DualRegularizer: kl-to-uniform needs theta > 0");
    return DualRegularizer{RegularizerKind::kl_to_uniform, theta};
  }

  // Strong convexity modulus with respect to V under the entropy geometry.
  double mu() const { return kind == RegularizerKind::kl_to_uniform ? theta : 0.0; }

  double value(const Vec& y) const {
    if (kind == RegularizerKind::simplex_indicator) return 0.0;
    const double n = static_cast<double>(y.size());
    double s = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      if (y[i] > 0.0) s += y[i] * std::log(y[i] * n);
    }
    return theta * s;
  }

  // Oscillation max r - min r over the simplex.
  double oscillation(int q) const {
    return kind == RegularizerKind::kl_to_uniform ? theta * std::log(static_cast<double>(q)) : 0.0;
  }
};

// ---------------------------------------------------------------------------
// Composite steps.
// ---------------------------------------------------------------------------

// Euclidean projection onto the probability simplex (sort-based).
inline Vec project_simplex(const Vec& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      k = i + 1;
      tau = t;
    }
  }
  (void)k;
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

// One anchor term a_k * V(y, y_k) added to the mirror-step subobjective.
struct MirrorAnchor {
  double weight;
  Vec point;
};

// Solves  argmin_y { -<y, g> + (1/eta) V(y, y0) + sum_k a_k V(y, y_k) + r(y) }
// over the simplex. Entropy geometry has the closed form
//   y_i  propto  exp([g_i + (1/eta) log y0_i + sum_k a_k log y_ki + theta log(1/n)] / A)
// with A = 1/eta + sum_k a_k + theta, evaluated in log-domain with max-shift.
// Euclidean geometry is an averaging step followed by simplex projection.
inline Vec composite_mirror_step(const BregmanGeometry& geom, const Vec& y0, const Vec& g,
                                 double eta, const std::vector<MirrorAnchor>& anchors,
                                 const DualRegularizer& reg) {
  require(eta > 0.0, "composite_mirror_step: eta must be positive");
  require(y0.size() == geom.dim && g.size() == geom.dim,
          "composite_mirror_step: dimension mismatch");
  require(geom.is_interior(y0), "composite_mirror_step: y0 must be interior");
  for (const auto& a : anchors) {
    require(a.weight >= 0.0, "composite_mirror_step: anchor weight must be nonnegative");
    require(a.point.size() == geom.dim && geom.is_interior(a.point),
            "composite_mirror_step: anchor must be interior");
  }
  if (reg.kind == RegularizerKind::kl_to_uniform) {
    require(geom.kind == GeometryKind::entropy,
            "composite_mirror_step: kl-to-uniform requires entropy geometry");
  }

  const int q = geom.dim;
  Vec y(q);
  if (geom.kind == GeometryKind::entropy) {
    double total = 1.0 / eta + reg.theta;
    for (const auto& a : anchors) total += a.weight;
    Vec z = g;
    for (int i = 0; i < q; ++i) z[i] += std::log(y0[i]) / eta;
    for (const auto& a : anchors) {
      for (int i = 0; i < q; ++i) z[i] += a.weight * std::log(a.point[i]);
    }
    if (reg.theta > 0.0) z.array() += reg.theta * std::log(1.0 / q);
    z /= total;
    const double shift = z.maxCoeff();
    y = (z.array() - shift).exp();
  } else {
    double total = 1.0 / eta;
    Vec num = y0 / eta + g;
    for (const auto& a : anchors) {
      total += a.weight;
      num += a.weight * a.point;
    }
    y = project_simplex(num / total);
  }
  geom.snap_to_simplex(y);
  return y;
}

// Solves  argmin_x { <x, g> + (1/2 eta_x)||x - x_j||^2 + (1/2 gamma)||x - x_bar||^2 + g(x) }.
// Both quadratics are isotropic, so averaging followed by projection is exact.
inline Vec primal_prox_step(const PrimalConstraint& constraint, const Vec& x_j, const Vec& g,
                            double eta_x, double gamma, const Vec& x_bar) {
  require(eta_x > 0.0, "primal_prox_step: eta_x must be positive");
  require(gamma > 0.0, "primal_prox_step: gamma must be positive");
  require(x_j.size() == g.size() && x_j.size() == x_bar.size(),
          "primal_prox_step: dimension mismatch");
  const double w = 1.0 / eta_x + 1.0 / gamma;
  Vec x = (x_j / eta_x + x_bar / gamma - g) / w;
  return constraint.project(x);
}

}  // namespace wcc

#endif  // WCC_GEOMETRY_HPP
