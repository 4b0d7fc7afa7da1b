#ifndef WCC_TESTS_SUPPORT_TEST_PROBLEMS_HPP
#define WCC_TESTS_SUPPORT_TEST_PROBLEMS_HPP

// Crafted problem instances and independent oracles shared by the unit and
// acceptance suites. Everything here is test scaffolding: oracles are kept
// separate from the library code paths they check.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "wcc/geometry.hpp"
#include "wcc/inner_solvers.hpp"
#include "wcc/problem.hpp"

namespace wcc_tests {

using wcc::Mat;
using wcc::Vec;

// ---------------------------------------------------------------------------
// Linear-in-y problem with quadratic payoff components
//   c_i(x) = 0.5 x'Q_i x + b_i'x + d_i.
// Uses the library's default q == n sampling and finite-sum decomposition.
// ---------------------------------------------------------------------------
class PolyPayoffProblem : public wcc::WccProblem {
 public:
  PolyPayoffProblem(std::vector<Mat> Q, std::vector<Vec> b, Vec d, double theta,
                    wcc::PrimalConstraint constraint, double declared_rho = 0.0)
      : Q_(std::move(Q)),
        b_(std::move(b)),
        d_(std::move(d)),
        constraint_(std::move(constraint)),
        reg_(theta > 0.0 ? wcc::DualRegularizer::kl_to_uniform(theta)
                         : wcc::DualRegularizer::simplex_indicator()),
        geom_(wcc::BregmanGeometry::entropy_on_simplex(static_cast<int>(b_.size()))) {
    p_ = static_cast<int>(b_.front().size());
    q_ = static_cast<int>(b_.size());
    derive_constants(declared_rho);
  }

  int primal_dim() const override { return p_; }
  int dual_dim() const override { return q_; }
  const wcc::PrimalConstraint& constraint() const override { return constraint_; }
  const wcc::DualRegularizer& dual_reg() const override { return reg_; }
  const wcc::BregmanGeometry& geom() const override { return geom_; }
  const wcc::ProblemConstants& constants() const override { return constants_; }
  int num_sum_components() const override { return q_; }

  void payoff_component(int k, const Vec& x, double& value, Vec& grad) const override {
    if (Q_[k].size() > 0) {
      Vec qx = Q_[k] * x;
      value = 0.5 * x.dot(qx) + b_[k].dot(x) + d_[k];
      grad = qx + b_[k];
    } else {
      value = b_[k].dot(x) + d_[k];
      grad = b_[k];
    }
  }

  double psi_smoothness() const override {
    if (reg_.theta <= 0.0) return wcc::kInf;
    return curvature_ + 2.0 * grad_bound_ * grad_bound_ / reg_.theta;
  }

  wcc::ProblemConstants& mutable_constants() { return constants_; }

 private:
  void derive_constants(double declared_rho) {
    const double xmax = constraint_.kind == wcc::ConstraintKind::l2_ball ? constraint_.radius
                        : constraint_.kind == wcc::ConstraintKind::box
                            ? constraint_.lo.cwiseAbs().cwiseMax(constraint_.hi.cwiseAbs()).norm()
                            : wcc::kInf;
    double G = 0.0, H = 0.0, C = 0.0;
    for (int k = 0; k < q_; ++k) {
      const double qn = Q_[k].size() > 0 ? Q_[k].norm() : 0.0;  // Frobenius >= spectral
      H = std::max(H, qn);
      if (std::isfinite(xmax)) {
        G = std::max(G, qn * xmax + b_[k].norm());
        C = std::max(C, 0.5 * qn * xmax * xmax + b_[k].norm() * xmax + std::abs(d_[k]));
      } else {
        G = C = wcc::kInf;
      }
    }
    constants_.rho = declared_rho;
    constants_.mu = reg_.mu();
    constants_.M_x = std::isfinite(G) ? std::sqrt(static_cast<double>(q_)) * G : wcc::kInf;
    constants_.M_y = std::isfinite(C) ? q_ * C : wcc::kInf;
    constants_.M_c = G;
    constants_.L_x = std::isfinite(G) ? q_ * (H + G) : wcc::kInf;
    constants_.L_y = std::isfinite(G) ? q_ * G : wcc::kInf;
    constants_.D_x = constraint_.diameter();
    constants_.D_y = geom_.dual_diameter();
    constants_.Q_g = 0.0;
    constants_.Q_r = reg_.oscillation(q_);
    grad_bound_ = G;
    curvature_ = H;
  }

  std::vector<Mat> Q_;
  std::vector<Vec> b_;
  Vec d_;
  wcc::PrimalConstraint constraint_;
  wcc::DualRegularizer reg_;
  wcc::BregmanGeometry geom_;
  wcc::ProblemConstants constants_;
  int p_ = 0, q_ = 0;
  double grad_bound_ = 0.0, curvature_ = 0.0;
};

inline PolyPayoffProblem zero_problem(int p, int q, double theta = 0.0) {
  std::vector<Mat> Q(q);
  std::vector<Vec> b(q, Vec::Zero(p));
  return PolyPayoffProblem(std::move(Q), std::move(b), Vec::Zero(q), theta,
                           wcc::PrimalConstraint::cube(p, -1.0, 1.0));
}

// ---------------------------------------------------------------------------
// Saddle built by construction: pick the target saddle (x*, y*) of
//   phi(x, y) = y'c(x) - theta KL(y, 1/q) + (1/2 gamma)||x - x_bar||^2
// and back out x_bar and the offsets d so that first-order conditions hold:
//   x_bar = x* + gamma sum_i y*_i grad c_i(x*),   c_i(x*) = theta log y*_i.
// ---------------------------------------------------------------------------
struct ConstructedSaddle {
  std::unique_ptr<PolyPayoffProblem> problem;
  Vec x_star, y_star, x_bar;
  double gamma = 0.0, theta = 0.0;

  // max_y phi(x, y) for this subproblem, exactly evaluable
  double primal_value(const Vec& x) const {
    const Vec c = problem->full_dual_payoff(x);
    return wcc::inner_max_closed_form(c, theta).value +
           (x - x_bar).squaredNorm() / (2.0 * gamma);
  }
  double primal_gap(const Vec& x) const { return primal_value(x) - primal_value(x_star); }
};

inline ConstructedSaddle make_constructed_saddle(std::vector<Mat> Q, std::vector<Vec> b,
                                                 Vec x_star, Vec y_star, double theta,
                                                 double gamma,
                                                 wcc::PrimalConstraint constraint) {
  const int q = static_cast<int>(b.size());
  Vec d(q);
  Vec pull = Vec::Zero(x_star.size());
  for (int i = 0; i < q; ++i) {
    Vec grad = b[i];
    double quad = b[i].dot(x_star);
    if (Q[i].size() > 0) {
      Vec qx = Q[i] * x_star;
      grad += qx;
      quad += 0.5 * x_star.dot(qx);
    }
    pull += y_star[i] * grad;
    d[i] = theta * std::log(y_star[i]) - quad;
  }
  ConstructedSaddle s;
  s.x_bar = x_star + gamma * pull;
  s.x_star = std::move(x_star);
  s.y_star = std::move(y_star);
  s.gamma = gamma;
  s.theta = theta;
  s.problem = std::make_unique<PolyPayoffProblem>(std::move(Q), std::move(b), std::move(d), theta,
                                                  std::move(constraint));
  return s;
}

// ---------------------------------------------------------------------------
// Independent oracles.
// ---------------------------------------------------------------------------

// Central finite differences of a scalar function.
inline Vec central_diff(const std::function<double(const Vec&)>& f, const Vec& x,
                        double h = 1e-5) {
  Vec g(x.size());
  Vec e = x;
  for (int i = 0; i < x.size(); ++i) {
    e[i] = x[i] + h;
    const double fp = f(e);
    e[i] = x[i] - h;
    const double fm = f(e);
    e[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Dense grid search of a function over the simplex (q = 2 or 3), with local
// refinement around the best point. Returns (best value, best point).
inline std::pair<double, Vec> simplex_grid_max(const std::function<double(const Vec&)>& f, int q,
                                               double coarse = 1e-2, int refinements = 3) {
  auto eval_grid = [&](const Vec& center, double radius, double step, double& best_val,
                       Vec& best_y) {
    if (q == 2) {
      for (double u = std::max(0.0, center[0] - radius); u <= std::min(1.0, center[0] + radius);
           u += step) {
        Vec y(2);
        y << u, 1.0 - u;
        const double v = f(y);
        if (v > best_val) {
          best_val = v;
          best_y = y;
        }
      }
    } else {
      for (double u = std::max(0.0, center[0] - radius); u <= std::min(1.0, center[0] + radius);
           u += step) {
        for (double v2 = std::max(0.0, center[1] - radius);
             v2 <= std::min(1.0 - u, center[1] + radius); v2 += step) {
          Vec y(3);
          y << u, v2, 1.0 - u - v2;
          if (y[2] < 0.0) continue;
          const double v = f(y);
          if (v > best_val) {
            best_val = v;
            best_y = y;
          }
        }
      }
    }
  };

  double best_val = -wcc::kInf;
  Vec best_y = Vec::Constant(q, 1.0 / q);
  eval_grid(Vec::Constant(q, 0.5), 1.0, coarse, best_val, best_y);
  double step = coarse;
  for (int r = 0; r < refinements; ++r) {
    const double radius = 2.0 * step;
    step /= 10.0;
    eval_grid(best_y, radius, step, best_val, best_y);
  }
  return {best_val, best_y};
}

// Minimizes a convex scalar-argument subobjective over the simplex by grid
// (used against composite_mirror_step).
inline std::pair<double, Vec> simplex_grid_min(const std::function<double(const Vec&)>& f, int q,
                                               double coarse = 1e-3, int refinements = 2) {
  auto res = simplex_grid_max([&](const Vec& y) { return -f(y); }, q, coarse, refinements);
  return {-res.first, res.second};
}

// Evaluated right-hand side of the averaged-iterate gap bound for the mirror
// descent inner solver: transcribed independently from the statement.
inline double prop1_rhs(double eta_x, double eta_y, double J, double M_x, double M_y, double rho,
                        double dist2, double v_bar, double Q_g, double Q_r) {
  return 2.5 * eta_x * M_x * M_x + 2.5 * eta_y * M_y * M_y +
         (1.0 / J) * ((1.0 / eta_x + rho / 2.0) * dist2 + (2.0 / eta_y) * v_bar + Q_g + Q_r);
}

}  // namespace wcc_tests

#endif  // WCC_TESTS_SUPPORT_TEST_PROBLEMS_HPP
