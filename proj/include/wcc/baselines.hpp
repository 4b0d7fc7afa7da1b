#ifndef WCC_BASELINES_HPP
#define WCC_BASELINES_HPP

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "wcc/common.hpp"
#include "wcc/inner_solvers.hpp"
#include "wcc/outer_solvers.hpp"
#include "wcc/problem.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// Linearized payoff model for the prox-linear baseline:
//   c~_i(x) = c_i(x_t) + grad c_i(x_t)' (x - x_t),
// with the frozen values and gradients computed lazily per sampled index and
// memoized for the lifetime of one outer step. The full Jacobian is never
// materialized eagerly.
// ---------------------------------------------------------------------------
class LinearizedProblem : public WccProblem {
 public:
  LinearizedProblem(const WccProblem& base, Vec anchor)
      : base_(base), anchor_(std::move(anchor)) {
    require(base.linear_in_y(), "LinearizedProblem: base must be linear in y");
    require(base.dual_dim() == base.num_sum_components(),
            "LinearizedProblem: needs the q == n payoff shape");
    const int n = base.dual_dim();
    computed_.assign(n, 0);
    frozen_values_.resize(n);
    frozen_grads_.resize(n, base.primal_dim());
    constants_ = base.constants();
    constants_.rho = 0.0;  // the model is linear in x
    constants_.L_x = n * constants_.M_c;
    constants_.L_y = n * constants_.M_c;
    if (std::isfinite(constants_.M_y) && std::isfinite(constants_.D_x))
      constants_.M_y += n * constants_.M_c * constants_.D_x;
    else
      constants_.M_y = kInf;
  }

  int primal_dim() const override { return base_.primal_dim(); }
  int dual_dim() const override { return base_.dual_dim(); }
  const PrimalConstraint& constraint() const override { return base_.constraint(); }
  const DualRegularizer& dual_reg() const override { return base_.dual_reg(); }
  const BregmanGeometry& geom() const override { return base_.geom(); }
  const ProblemConstants& constants() const override { return constants_; }
  int num_sum_components() const override { return base_.num_sum_components(); }

  void payoff_component(int k, const Vec& x, double& value, Vec& grad) const override {
    freeze(k);
    grad = frozen_grads_.row(k).transpose();
    value = frozen_values_[k] + grad.dot(x - anchor_);
  }

  double psi_smoothness() const override {
    const double theta = base_.dual_reg().theta;
    if (theta <= 0.0) return kInf;
    return 2.0 * constants_.M_c * constants_.M_c / theta;
  }

  const Vec& anchor() const { return anchor_; }

 private:
  void freeze(int k) const {
    if (computed_[k]) return;
    double v;
    Vec g(base_.primal_dim());
    base_.payoff_component(k, anchor_, v, g);
    frozen_values_[k] = v;
    frozen_grads_.row(k) = g.transpose();
    computed_[k] = 1;
  }

  const WccProblem& base_;
  Vec anchor_;
  ProblemConstants constants_;
  mutable std::vector<char> computed_;
  mutable Vec frozen_values_;
  mutable Mat frozen_grads_;
};

// ---------------------------------------------------------------------------
// Prox-linear baseline: each outer step approximately solves
//   min_x max_y  y'(c(x_t) + grad c(x_t)(x - x_t)) - r(y) + g(x) + (1/2 eta)||x - x_t||^2
// with the chosen stochastic inner solver on the frozen model.
// ---------------------------------------------------------------------------
struct PlConfig {
  enum class Inner { smd, svrg };
  double eta = 0.1;               // prox step length
  Inner inner = Inner::smd;
  std::int64_t inner_iters = 100;  // J for the smd inner
  std::int64_t inner_stages = 3;   // K for the svrg inner
  int batch = 1;
  double eta_x = 0.0;  // 0 = derive from the D1 formula on the frozen model
  double eta_y = 0.0;
  double lambda = kInf;    // dual proximal weight for the svrg inner when mu = 0
  bool warm_dual = false;  // anchor the inner dual at the exact argmax (costs n)
  SvrgOverrides svrg;      // optional grid-tuned steps/length for the svrg inner
  std::int64_t T_outer = 10;
};

inline Vec pl_step(const WccProblem& problem, const Vec& x_t, const PlConfig& cfg, Rng& rng,
                   OracleCounter& counter) {
  require(cfg.eta > 0.0, "pl_step: eta must be positive");
  LinearizedProblem lin(problem, x_t);

  Vec y_bar;
  if (cfg.warm_dual) {
    y_bar = inner_max_closed_form(lin.full_dual_payoff(x_t), problem.dual_reg().theta).y_star;
    problem.geom().snap_to_simplex(y_bar);
    counter.add_full_pass();
  } else {
    y_bar = problem.geom().argmin_dgf();
  }
  SaddleSubproblem sub{x_t, y_bar, cfg.eta, kInf};

  if (cfg.inner == PlConfig::Inner::smd) {
    double eta_x = cfg.eta_x;
    double eta_y = cfg.eta_y;
    const ProblemConstants& c = lin.constants();
    const double root = std::sqrt(static_cast<double>(cfg.inner_iters));
    if (eta_x <= 0.0) {
      if (!std::isfinite(c.D_x) || !std::isfinite(c.M_x))
        throw config_error("pl_step: eta_x not given and D_x/M_x unavailable");
      eta_x = c.D_x / (c.M_x * root);
    }
    if (eta_y <= 0.0) {
      if (!std::isfinite(c.D_y) || !std::isfinite(c.M_y))
        throw config_error("pl_step: eta_y not given and D_y/M_y unavailable");
      eta_y = c.D_y / (c.M_y * root);
    }
    return smd_solve(lin, sub, eta_x, eta_y, cfg.inner_iters, cfg.batch, rng, counter).x_hat;
  }

  if (!problem.smooth())
    throw config_error("pl_step: svrg inner requires a smooth instance");
  if (!(problem.dual_reg().mu() > 0.0)) {
    if (!std::isfinite(cfg.lambda) || cfg.lambda <= 0.0)
      throw config_error("pl_step: svrg inner with mu = 0 needs a finite positive lambda");
    sub.lambda = cfg.lambda;
  }
  return svrg_solve(lin, sub, cfg.inner_stages, counter, rng, {}, cfg.svrg);
}

inline RunTrace pl_run(const WccProblem& problem, const Vec& x0, const PlConfig& cfg, Rng& rng,
                       const TraceHooks& hooks = {}) {
  require(cfg.T_outer >= 1, "pl_run: T_outer must be positive");
  RunTrace trace;
  trace.counter = OracleCounter(problem.num_sum_components());
  trace.schedule.kind = cfg.inner == PlConfig::Inner::smd ? "pl-smd" : "pl-svrg";
  trace.schedule.T = cfg.T_outer;
  trace.schedule.gamma = cfg.eta;
  detail::TraceRecorder recorder(hooks, cfg.T_outer);

  Vec x = problem.constraint().project(x0);
  for (std::int64_t t = 0; t + 1 < cfg.T_outer; ++t) {
    recorder.log(t, x, trace.counter, trace.rows);
    x = pl_step(problem, x, cfg, rng, trace.counter);
  }
  recorder.log(cfg.T_outer - 1, x, trace.counter, trace.rows);
  trace.tau = cfg.T_outer - 1;  // the prox-linear baseline reports its last iterate
  trace.x_out = std::move(x);
  return trace;
}

// ---------------------------------------------------------------------------
// Plain empirical risk minimization of (1/n) sum_i f_i(x) by projected SGD
// with a piecewise-constant step schedule keyed by data passes.
// ---------------------------------------------------------------------------
struct ErmConfig {
  std::int64_t steps = 1000;
  int batch = 1;
  // (step_size, until_pass) segments; the last segment extends to infinity.
  std::vector<std::pair<double, double>> step_schedule = {{0.1, kInf}};
  std::int64_t steps_per_row = 0;  // 0 = one row per data pass
};

inline RunTrace erm_sgd(const WccProblem& problem, const Vec& x0, const ErmConfig& cfg, Rng& rng,
                        const TraceHooks& hooks = {}) {
  require(cfg.steps >= 0, "erm_sgd: steps must be nonnegative");
  require(cfg.batch >= 1, "erm_sgd: batch must be positive");
  require(!cfg.step_schedule.empty(), "erm_sgd: empty step schedule");
  require(problem.dual_dim() == problem.num_sum_components(),
          "erm_sgd: needs the q == n payoff shape");
  const int n = problem.num_sum_components();
  const std::int64_t steps_per_row =
      cfg.steps_per_row > 0 ? cfg.steps_per_row : std::max<std::int64_t>(n / cfg.batch, 1);
  const std::int64_t rows =
      cfg.steps == 0 ? 1 : (cfg.steps + steps_per_row - 1) / steps_per_row + 1;

  RunTrace trace;
  trace.counter = OracleCounter(n);
  trace.schedule.kind = "erm-sgd";
  trace.schedule.T = rows;
  detail::TraceRecorder recorder(hooks, rows);

  auto step_size = [&](double passes) {
    for (const auto& [size, until] : cfg.step_schedule) {
      if (passes < until) return size;
    }
    return cfg.step_schedule.back().first;
  };

  Vec x = problem.constraint().project(x0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  Vec grad(problem.primal_dim()), gi(problem.primal_dim());
  std::int64_t row = 0;
  recorder.log(row++, x, trace.counter, trace.rows);
  for (std::int64_t s = 0; s < cfg.steps; ++s) {
    grad.setZero();
    for (int b = 0; b < cfg.batch; ++b) {
      double v;
      problem.payoff_component(pick(rng), x, v, gi);
      grad += gi;
    }
    grad /= cfg.batch;
    trace.counter.add_stochastic(cfg.batch);
    x = problem.constraint().project(x -
                                     step_size(trace.counter.full_pass_equivalents()) * grad);
    if (!x.allFinite()) throw numeric_error("erm_sgd: iterate turned non-finite", s);
    if ((s + 1) % steps_per_row == 0 || s + 1 == cfg.steps)
      recorder.log(row++, x, trace.counter, trace.rows);
  }
  trace.schedule.T = static_cast<std::int64_t>(trace.rows.size());
  trace.tau = trace.schedule.T - 1;
  trace.x_out = std::move(x);
  return trace;
}

}  // namespace wcc

#endif  // WCC_BASELINES_HPP
