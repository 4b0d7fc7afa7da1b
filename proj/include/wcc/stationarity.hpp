#ifndef WCC_STATIONARITY_HPP
#define WCC_STATIONARITY_HPP

#include <cmath>
#include <utility>

#include "wcc/common.hpp"
#include "wcc/problem.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// psi(x) = max_y [f(x,y) - r(y)] + g(x), evaluated exactly through the
// closed-form inner maximum for linear-in-y instances. Infeasible x (g = +inf)
// returns the +inf sentinel.
// ---------------------------------------------------------------------------
inline double psi_value(const WccProblem& problem, const Vec& x) {
  require(problem.linear_in_y(), "psi_value: needs a linear-in-y instance");
  if (!problem.constraint().contains(x, 1e-9)) return kInf;
  return inner_max_closed_form(problem.full_dual_payoff(x), problem.dual_reg().theta).value;
}

// Value of psi together with a subgradient: Danskin gradient
// sum_i y*_i grad f_i(z) for theta > 0 (y* unique), a maximizer's gradient for
// theta = 0. Costs one full payoff pass.
namespace detail {
struct PsiWorkspace {
  Vec c;
  Mat grads;
  Vec gi;
  void resize(int q, int p) {
    c.resize(q);
    grads.resize(q, p);
    gi.resize(p);
  }
};

inline double psi_subgrad_ws(const WccProblem& problem, const Vec& z, Vec& grad,
                             PsiWorkspace& w) {
  const int q = problem.dual_dim();
  for (int k = 0; k < q; ++k) {
    double v;
    problem.payoff_component(k, z, v, w.gi);
    w.c[k] = v;
    w.grads.row(k) = w.gi.transpose();
  }
  const auto inner = inner_max_closed_form(w.c, problem.dual_reg().theta);
  grad.noalias() = w.grads.transpose() * inner.y_star;
  return inner.value;
}
}  // namespace detail

inline double psi_subgrad(const WccProblem& problem, const Vec& z, Vec& grad) {
  require(problem.linear_in_y(), "psi_subgrad: needs a linear-in-y instance");
  detail::PsiWorkspace w;
  w.resize(problem.dual_dim(), problem.primal_dim());
  return detail::psi_subgrad_ws(problem, z, grad, w);
}

// ---------------------------------------------------------------------------
// Moreau proximal point  prox_{gamma psi}(x_bar)  and the stationarity
// certificate built on it.
// ---------------------------------------------------------------------------
struct StationarityReport {
  double gamma = 0.0;
  Vec prox_point;
  double grad_norm = 0.0;  // ||x_bar - z||_2 / gamma
  double psi_at_xbar = 0.0;
  double psi_at_z = 0.0;
  double envelope = 0.0;  // psi(z) + (1/2 gamma)||z - x_bar||^2
  std::int64_t iterations = 0;
  double residual = 0.0;  // projected-gradient residual, or gap estimate when theta = 0
};

namespace detail {
inline void finalize_report(const WccProblem& problem, const Vec& x_bar,
                            StationarityReport& report) {
  report.grad_norm = (x_bar - report.prox_point).norm() / report.gamma;
  report.psi_at_xbar = psi_value(problem, x_bar);
  report.psi_at_z = psi_value(problem, report.prox_point);
  report.envelope =
      report.psi_at_z + (x_bar - report.prox_point).squaredNorm() / (2.0 * report.gamma);
}
}  // namespace detail

// Deterministic solve of min_z psi(z) + (1/2 gamma)||z - x_bar||^2, strongly
// convex with modulus 1/gamma - rho. Smooth instances (theta > 0) use
// projected gradient descent with the constant step 1/(L_psi + 1/gamma) and a
// projected-gradient stopping residual. theta = 0 instances use subgradient
// descent with 1/k decay and weighted iterate averaging; there tol bounds the
// objective-gap estimate 2 G^2 / (mu (k+1)). Non-convergence within max_iters
// raises, never returns a silent approximation.
inline StationarityReport moreau_prox(const WccProblem& problem, const Vec& x_bar, double gamma,
                                      double tol = 1e-8, std::int64_t max_iters = 100000,
                                      const Vec* z0 = nullptr,
                                      const std::function<void(const Vec&)>& observer = {}) {
  require(gamma > 0.0, "moreau_prox: gamma must be positive");
  const double rho = problem.constants().rho;
  require(1.0 / gamma > rho, "moreau_prox: need gamma < 1/rho");
  require(tol > 0.0, "moreau_prox: tol must be positive");
  const PrimalConstraint& constraint = problem.constraint();
  const double theta = problem.dual_reg().theta;

  StationarityReport report;
  report.gamma = gamma;
  Vec z = constraint.project(z0 ? *z0 : x_bar);
  if (observer) observer(z);
  Vec grad(problem.primal_dim());
  detail::PsiWorkspace work;
  work.resize(problem.dual_dim(), problem.primal_dim());

  if (theta > 0.0) {
    const double L_psi = problem.psi_smoothness();
    if (!std::isfinite(L_psi))
      throw config_error("moreau_prox: psi smoothness bound unavailable for this instance");
    const double step = 1.0 / (L_psi + 1.0 / gamma);
    Vec z_next(problem.primal_dim());
    for (std::int64_t it = 0; it < max_iters; ++it) {
      detail::psi_subgrad_ws(problem, z, grad, work);
      z_next = z - step * (grad + (z - x_bar) / gamma);
      constraint.project_in_place(z_next);
      const double residual = (z - z_next).norm() / step;
      z.swap(z_next);
      if (observer) observer(z);
      if (residual <= tol) {
        report.iterations = it + 1;
        report.residual = residual;
        report.prox_point = std::move(z);
        detail::finalize_report(problem, x_bar, report);
        return report;
      }
    }
    throw numeric_error("moreau_prox: no convergence within max_iters", max_iters);
  }

  // theta = 0: psi is a max of smooth pieces, only subdifferentiable.
  const double mu_f = 1.0 / gamma - rho;
  Vec z_avg = Vec::Zero(problem.primal_dim());
  Vec g_total(problem.primal_dim());
  double weight_sum = 0.0;
  double grad_bound_sq = 0.0;
  for (std::int64_t it = 0; it < max_iters; ++it) {
    const double w = static_cast<double>(it + 1);
    z_avg += w * z;
    weight_sum += w;
    detail::psi_subgrad_ws(problem, z, grad, work);
    g_total = grad + (z - x_bar) / gamma;
    grad_bound_sq = std::max(grad_bound_sq, g_total.squaredNorm());
    const double gap_bound = 2.0 * grad_bound_sq / (mu_f * static_cast<double>(it + 1));
    if (gap_bound <= tol) {
      report.iterations = it + 1;
      report.residual = gap_bound;
      report.prox_point = z_avg / weight_sum;
      detail::finalize_report(problem, x_bar, report);
      return report;
    }
    z -= (2.0 / (mu_f * w)) * g_total;
    constraint.project_in_place(z);
  }
  throw numeric_error("moreau_prox: no convergence within max_iters", max_iters);
}

inline double moreau_grad_norm(const WccProblem& problem, const Vec& x_bar, double gamma,
                               double tol = 1e-8, std::int64_t max_iters = 100000) {
  return moreau_prox(problem, x_bar, gamma, tol, max_iters).grad_norm;
}

}  // namespace wcc

#endif  // WCC_STATIONARITY_HPP
