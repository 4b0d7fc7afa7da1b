#ifndef WCC_INNER_SOLVERS_HPP
#define WCC_INNER_SOLVERS_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "wcc/common.hpp"
#include "wcc/geometry.hpp"
#include "wcc/problem.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// The proximal saddle subproblem
//   min_x max_y f(x,y) - r(y) + g(x) + (1/2 gamma)||x - x_bar||^2 - (1/lambda) V(y, y_bar)
// with lambda = +inf meaning the dual proximal term is absent.
// ---------------------------------------------------------------------------
struct SaddleSubproblem {
  Vec x_bar;
  Vec y_bar;
  double gamma = 1.0;
  double lambda = kInf;
};

// Oracle accounting in stochastic-subgradient equivalents: one full payoff or
// full gradient evaluation costs n stochastic calls.
class OracleCounter {
 public:
  explicit OracleCounter(int calls_per_pass) : n_(calls_per_pass) {
    require(calls_per_pass >= 1, "OracleCounter: calls_per_pass must be positive");
  }

  void add_stochastic(std::int64_t k) { stochastic_grad_calls_ += k; }
  void add_full_pass() { ++full_evaluations_; }

  std::int64_t stochastic_grad_calls() const { return stochastic_grad_calls_; }
  std::int64_t full_evaluations() const { return full_evaluations_; }
  double full_pass_equivalents() const {
    return static_cast<double>(stochastic_grad_calls_) / n_ +
           static_cast<double>(full_evaluations_);
  }

 private:
  int n_;
  std::int64_t stochastic_grad_calls_ = 0;
  std::int64_t full_evaluations_ = 0;
};

namespace detail {
inline void guard_finite(const Vec& x, const Vec& y, std::int64_t iteration, const char* who) {
  if (!x.allFinite() || !y.allFinite())
    throw numeric_error(std::string(who) + ": iterate turned non-finite", iteration);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Stochastic mirror descent on the subproblem (lambda must be +inf). Runs
// J - 1 primal-dual steps from (x_bar, y_bar) and returns the uniform average
// of the J primal iterates together with the final dual iterate.
// ---------------------------------------------------------------------------
struct SmdResult {
  Vec x_hat;
  Vec y_last;
};

inline SmdResult smd_solve(const WccProblem& problem, const SaddleSubproblem& sub, double eta_x,
                           double eta_y, std::int64_t J, int batch, Rng& rng,
                           OracleCounter& counter) {
  require(std::isinf(sub.lambda), "smd_solve: dual proximal term not supported (lambda = +inf)");
  require(eta_x > 0.0 && eta_y > 0.0, "smd_solve: step sizes must be positive");
  require(J >= 2, "smd_solve: J must be at least 2");
  require(sub.x_bar.size() == problem.primal_dim() && sub.y_bar.size() == problem.dual_dim(),
          "smd_solve: anchor dimension mismatch");

  Vec x = sub.x_bar;
  Vec y = sub.y_bar;
  Vec x_sum = x;
  Vec g_x, g_y;
  for (std::int64_t j = 0; j + 1 < J; ++j) {
    problem.stoch_subgrad(x, y, batch, rng, g_x, g_y);
    counter.add_stochastic(batch);
    x = primal_prox_step(problem.constraint(), x, g_x, eta_x, sub.gamma, sub.x_bar);
    y = composite_mirror_step(problem.geom(), y, g_y, eta_y, {}, problem.dual_reg());
    detail::guard_finite(x, y, j, "smd_solve");
    x_sum += x;
  }
  return {x_sum / static_cast<double>(J), std::move(y)};
}

// ---------------------------------------------------------------------------
// Stage-wise variance-reduced solver for the doubly-regularized subproblem.
// Step sizes and the inner length follow the stated schedule:
//   Lambda = 52 max{L_x^2, L_y^2} / min{mu_x^2, mu_y^2}
//   eta_x = 1/(mu_x Lambda), eta_y = 1/(mu_y Lambda), J = ceil(1 + (3/2 + 3 Lambda) ln 4)
// ---------------------------------------------------------------------------
struct SvrgPlan {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double Lambda = 0.0;
  double eta_x = 0.0;
  double eta_y = 0.0;
  std::int64_t J = 0;
};

inline SvrgPlan svrg_plan(const ProblemConstants& c, double gamma, double lambda) {
  require(gamma > 0.0, "svrg_plan: gamma must be positive");
  require(lambda > 0.0, "svrg_plan: lambda must be positive");
  if (!std::isfinite(c.L_x) || !std::isfinite(c.L_y))
    throw config_error("svrg_plan: missing smoothness constants L_x, L_y");
  SvrgPlan plan;
  plan.mu_x = 1.0 / gamma - c.rho;
  plan.mu_y = (std::isinf(lambda) ? 0.0 : 1.0 / lambda) + c.mu;
  require(plan.mu_x > 0.0, "svrg_plan: need 1/gamma > rho");
  require(plan.mu_y > 0.0, "svrg_plan: need 1/lambda + mu > 0");
  const double Lmax2 = std::max(c.L_x * c.L_x, c.L_y * c.L_y);
  const double mumin2 = std::min(plan.mu_x * plan.mu_x, plan.mu_y * plan.mu_y);
  plan.Lambda = 52.0 * Lmax2 / mumin2;
  plan.eta_x = 1.0 / (plan.mu_x * plan.Lambda);
  plan.eta_y = 1.0 / (plan.mu_y * plan.Lambda);
  plan.J = static_cast<std::int64_t>(std::ceil(1.0 + (1.5 + 3.0 * plan.Lambda) * std::log(4.0)));
  return plan;
}

using SvrgStageHook = std::function<void(int stage, const Vec& x_hat, const Vec& y_hat)>;

// Manual replacements for the schedule-derived step sizes and inner length,
// zero meaning "use the formula". The stated schedules are safe but very
// conservative on instances whose component Lipschitz constants carry an n
// factor; tuned values are selected from a grid in practice.
struct SvrgOverrides {
  double eta_x = 0.0;
  double eta_y = 0.0;
  std::int64_t J = 0;
};

inline SvrgPlan svrg_plan(const ProblemConstants& c, double gamma, double lambda,
                          const SvrgOverrides& overrides) {
  SvrgPlan plan = svrg_plan(c, gamma, lambda);
  if (overrides.eta_x > 0.0) plan.eta_x = overrides.eta_x;
  if (overrides.eta_y > 0.0) plan.eta_y = overrides.eta_y;
  if (overrides.J > 0) {
    require(overrides.J >= 2, "svrg overrides: J must be at least 2");
    plan.J = overrides.J;
  }
  return plan;
}

inline Vec svrg_solve(const WccProblem& problem, const SaddleSubproblem& sub, std::int64_t K,
                      OracleCounter& counter, Rng& rng, const SvrgStageHook& stage_hook = {},
                      const SvrgOverrides& overrides = {}) {
  require(K >= 2, "svrg_solve: K must be at least 2");
  require(problem.smooth(), "svrg_solve: requires a smooth finite-sum instance");
  require(sub.x_bar.size() == problem.primal_dim(), "svrg_solve: anchor dimension mismatch");
  const SvrgPlan plan = svrg_plan(problem.constants(), sub.gamma, sub.lambda, overrides);

  const int n = problem.num_sum_components();
  std::vector<MirrorAnchor> anchors;
  if (!std::isinf(sub.lambda)) anchors.push_back({1.0 / sub.lambda, sub.y_bar});

  Vec x_hat = sub.x_bar;
  Vec y_hat = problem.geom().argmin_dgf();
  if (stage_hook) stage_hook(0, x_hat, y_hat);

  Vec gx_ref, gy_ref, gx_cur, gy_cur;
  Vec hat_gx, hat_gy;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (std::int64_t k = 0; k + 1 < K; ++k) {
    problem.full_grad(x_hat, y_hat, hat_gx, hat_gy);
    counter.add_full_pass();
    Vec x = x_hat;
    Vec y = y_hat;
    for (std::int64_t j = 0; j + 1 < plan.J; ++j) {
      const int l = pick(rng);
      problem.sum_component_grad(l, x_hat, y_hat, gx_ref, gy_ref);
      problem.sum_component_grad(l, x, y, gx_cur, gy_cur);
      counter.add_stochastic(1);
      const Vec g_x = hat_gx - gx_ref + gx_cur;
      const Vec g_y = hat_gy - gy_ref + gy_cur;
      x = primal_prox_step(problem.constraint(), x, g_x, plan.eta_x, sub.gamma, sub.x_bar);
      y = composite_mirror_step(problem.geom(), y, g_y, plan.eta_y, anchors, problem.dual_reg());
      detail::guard_finite(x, y, j, "svrg_solve");
    }
    x_hat = std::move(x);
    y_hat = std::move(y);
    if (stage_hook) stage_hook(static_cast<int>(k) + 1, x_hat, y_hat);
  }
  return x_hat;
}

}  // namespace wcc

#endif  // WCC_INNER_SOLVERS_HPP
