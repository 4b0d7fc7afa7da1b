#ifndef WCC_OUTER_SOLVERS_HPP
#define WCC_OUTER_SOLVERS_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wcc/common.hpp"
#include "wcc/data_io.hpp"
#include "wcc/inner_solvers.hpp"
#include "wcc/problem.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// Outer-loop schedules. Every per-t quantity comes from the stated formulas;
// these functions are the single source the solvers, the trace, and the
// golden-table tests all read.
// ---------------------------------------------------------------------------
enum class PgCase { D1, D2 };

struct SmdScheduleEntry {
  std::int64_t j = 0;
  double eta_x = 0.0;
  double eta_y = 0.0;
};

inline SmdScheduleEntry pg_smd_schedule(PgCase pg_case, std::int64_t t, const ProblemConstants& c,
                                        double gamma) {
  SmdScheduleEntry e;
  if (pg_case == PgCase::D1) {
    e.j = (t + 2) * (t + 2);
    const double root = std::sqrt(static_cast<double>(e.j));
    e.eta_x = c.D_x / (c.M_x * root);
    e.eta_y = c.D_y / (c.M_y * root);
  } else {
    e.j = t + 32;
    e.eta_x = 60.0 / (c.rho * static_cast<double>(e.j - 30));
    e.eta_y = 8.0 * c.M_c * c.M_c * gamma / (c.mu * c.mu * static_cast<double>(e.j));
  }
  return e;
}

struct SvrgScheduleEntry {
  double lambda = kInf;
  double mu_y = 0.0;
  double Lambda = 0.0;
  std::int64_t k = 0;
};

inline SvrgScheduleEntry pg_svrg_schedule(std::int64_t t, const ProblemConstants& c, double gamma,
                                          double c_k) {
  SvrgScheduleEntry e;
  const double mu_x = 1.0 / gamma - c.rho;
  e.lambda = c.mu > 0.0 ? kInf : static_cast<double>(t + 2);
  e.mu_y = (c.mu > 0.0 ? 0.0 : 1.0 / static_cast<double>(t + 2)) + c.mu;
  const double Lmax2 = std::max(c.L_x * c.L_x, c.L_y * c.L_y);
  e.Lambda = 52.0 * Lmax2 / std::min(mu_x * mu_x, e.mu_y * e.mu_y);
  const double arg = static_cast<double>((t + 1) * (t + 1)) * (4.0 / (gamma * mu_x) + 1.0) *
                     (0.25 + e.Lambda / 2.0) * (mu_x * c.D_x * c.D_x + e.mu_y * c.D_y * c.D_y);
  e.k = static_cast<std::int64_t>(std::ceil(1.0 + c_k * std::log(arg)));
  if (e.k < 2) e.k = 2;
  return e;
}

struct PgSchedule {
  std::string kind;
  std::int64_t T = 0;
  double gamma = 0.0;
  double c_k = 0.0;                      // only meaningful for pg-svrg
  std::vector<SmdScheduleEntry> smd;     // per t, size max(T-1, 0)
  std::vector<SvrgScheduleEntry> svrg;   // per t, size max(T-1, 0)
};

// ---------------------------------------------------------------------------
// Per-iteration diagnostics. Hooks are evaluated on their own strides and are
// forbidden to touch the algorithm RNG stream, so enabling or disabling them
// never changes the iterate sequence. The final row always gets a full
// evaluation.
// ---------------------------------------------------------------------------
struct TraceHooks {
  std::int64_t psi_stride = 1;      // 0 disables
  std::int64_t moreau_stride = 10;  // 0 disables
  std::int64_t metrics_stride = 1;  // 0 disables
  bool wall_clock = true;
  std::function<double(const Vec&)> psi;
  std::function<double(const Vec&)> moreau_grad_sq;
  std::function<Metrics(const Vec&)> test_metrics;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::int64_t tau = 0;
  Vec x_out;
  OracleCounter counter{1};
  PgSchedule schedule;
  std::uint64_t seed = 0;
};

inline std::int64_t sample_output_index(std::int64_t T, Rng& rng) {
  require(T >= 1, "sample_output_index: T must be positive");
  std::uniform_int_distribution<std::int64_t> pick(0, T - 1);
  return pick(rng);
}

namespace detail {

class TraceRecorder {
 public:
  TraceRecorder(const TraceHooks& hooks, std::int64_t T)
      : hooks_(hooks), T_(T), start_(std::chrono::steady_clock::now()) {}

  void log(std::int64_t t, const Vec& x, const OracleCounter& counter,
           std::vector<TraceRow>& rows) const {
    TraceRow row;
    row.t = t;
    row.data_passes = counter.full_pass_equivalents();
    const bool last = (t == T_ - 1);
    if (hooks_.psi && due(hooks_.psi_stride, t, last)) row.psi = hooks_.psi(x);
    if (hooks_.moreau_grad_sq && due(hooks_.moreau_stride, t, last))
      row.moreau_grad_sq = hooks_.moreau_grad_sq(x);
    if (hooks_.test_metrics && due(hooks_.metrics_stride, t, last)) {
      const Metrics m = hooks_.test_metrics(x);
      row.test_error = m.error_rate;
      row.f_score = m.f_score;
    }
    if (hooks_.wall_clock) {
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    }
    rows.push_back(row);
  }

 private:
  static bool due(std::int64_t stride, std::int64_t t, bool last) {
    return stride > 0 && (last || t % stride == 0);
  }
  const TraceHooks& hooks_;
  std::int64_t T_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

struct PgSmdOptions {
  PgCase pg_case = PgCase::D2;
  int batch = 1;
  double gamma_override = 0.0;  // 0 = use 1/(2 rho)
};

// ---------------------------------------------------------------------------
// Proximally guided stochastic mirror descent. Each outer iteration rebuilds
// the dual anchor (argmin d for D1, the exact regularized argmax for D2,
// charged n equivalents), derives the (eta_x, eta_y, j) schedule, and hands
// the subproblem to smd_solve. The output index tau is drawn from the
// algorithm stream after the loop.
// ---------------------------------------------------------------------------
inline RunTrace pg_smd(const WccProblem& problem, const Vec& x0, std::int64_t T,
                       const PgSmdOptions& opts, Rng& rng, const TraceHooks& hooks = {}) {
  require(T >= 1, "pg_smd: T must be positive");
  const ProblemConstants& c = problem.constants();
  const double gamma = opts.gamma_override > 0.0 ? opts.gamma_override : 1.0 / (2.0 * c.rho);
  if (!(gamma > 0.0) || !std::isfinite(gamma) || !(1.0 / gamma > c.rho))
    throw config_error("pg_smd: gamma must be positive, finite, with 1/gamma > rho");
  if (opts.pg_case == PgCase::D1) {
    if (!std::isfinite(c.D_x) || !std::isfinite(c.D_y) || !std::isfinite(c.M_x) ||
        !std::isfinite(c.M_y))
      throw config_error("pg_smd: case D1 needs finite D_x, D_y, M_x, M_y");
  } else {
    if (!(c.mu > 0.0)) throw config_error("pg_smd: case D2 needs mu > 0");
    if (!problem.linear_in_y()) throw config_error("pg_smd: case D2 needs linear-in-y structure");
    if (!std::isfinite(c.M_c)) throw config_error("pg_smd: case D2 needs finite M_c");
  }

  RunTrace trace;
  trace.counter = OracleCounter(problem.num_sum_components());
  trace.schedule.kind = opts.pg_case == PgCase::D1 ? "pg-smd-d1" : "pg-smd-d2";
  trace.schedule.T = T;
  trace.schedule.gamma = gamma;
  detail::TraceRecorder recorder(hooks, T);

  std::vector<Vec> iterates;
  iterates.reserve(T);
  Vec x_bar = problem.constraint().project(x0);
  for (std::int64_t t = 0; t + 1 < T; ++t) {
    iterates.push_back(x_bar);
    recorder.log(t, x_bar, trace.counter, trace.rows);

    Vec y_bar;
    if (opts.pg_case == PgCase::D1) {
      y_bar = problem.geom().argmin_dgf();
    } else {
      const Vec payoff = problem.full_dual_payoff(x_bar);
      trace.counter.add_full_pass();
      y_bar = inner_max_closed_form(payoff, problem.dual_reg().theta).y_star;
      problem.geom().snap_to_simplex(y_bar);
    }
    const SmdScheduleEntry entry = pg_smd_schedule(opts.pg_case, t, c, gamma);
    trace.schedule.smd.push_back(entry);

    SaddleSubproblem sub{x_bar, y_bar, gamma, kInf};
    SmdResult res =
        smd_solve(problem, sub, entry.eta_x, entry.eta_y, entry.j, opts.batch, rng, trace.counter);
    x_bar = std::move(res.x_hat);
  }
  iterates.push_back(x_bar);
  recorder.log(T - 1, x_bar, trace.counter, trace.rows);

  trace.tau = sample_output_index(T, rng);
  trace.x_out = iterates[trace.tau];
  return trace;
}

struct PgSvrgOptions {
  double gamma_override = 0.0;  // 0 = use 1/(2 rho)
  double c_k = 4.0;             // constant in the k_t formula
  SvrgOverrides inner;          // optional grid-tuned inner steps/length
};

// ---------------------------------------------------------------------------
// Proximally guided stochastic variance-reduced gradient. Branches on mu to
// pick the dual proximal weight lambda_t, then runs svrg_solve for k_t stages
// on the doubly-regularized subproblem anchored at (x_bar_t, argmin d).
// ---------------------------------------------------------------------------
inline RunTrace pg_svrg(const WccProblem& problem, const Vec& x0, std::int64_t T,
                        const PgSvrgOptions& opts, Rng& rng, const TraceHooks& hooks = {}) {
  require(T >= 1, "pg_svrg: T must be positive");
  require(opts.c_k > 0.0, "pg_svrg: c_k must be positive");
  if (!problem.smooth()) throw config_error("pg_svrg: needs a smooth finite-sum instance");
  const ProblemConstants& c = problem.constants();
  const double gamma = opts.gamma_override > 0.0 ? opts.gamma_override : 1.0 / (2.0 * c.rho);
  if (!(gamma > 0.0) || !std::isfinite(gamma) || !(1.0 / gamma > c.rho))
    throw config_error("pg_svrg: gamma must be positive, finite, with 1/gamma > rho");
  if (!std::isfinite(c.L_x) || !std::isfinite(c.L_y))
    throw config_error("pg_svrg: needs finite L_x, L_y");
  if (!std::isfinite(c.D_x) || !std::isfinite(c.D_y))
    throw config_error("pg_svrg: needs finite D_x, D_y");

  RunTrace trace;
  trace.counter = OracleCounter(problem.num_sum_components());
  trace.schedule.kind = "pg-svrg";
  trace.schedule.T = T;
  trace.schedule.gamma = gamma;
  trace.schedule.c_k = opts.c_k;
  detail::TraceRecorder recorder(hooks, T);

  std::vector<Vec> iterates;
  iterates.reserve(T);
  Vec x_bar = problem.constraint().project(x0);
  for (std::int64_t t = 0; t + 1 < T; ++t) {
    iterates.push_back(x_bar);
    recorder.log(t, x_bar, trace.counter, trace.rows);

    const SvrgScheduleEntry entry = pg_svrg_schedule(t, c, gamma, opts.c_k);
    trace.schedule.svrg.push_back(entry);

    SaddleSubproblem sub{x_bar, problem.geom().argmin_dgf(), gamma, entry.lambda};
    x_bar = svrg_solve(problem, sub, entry.k, trace.counter, rng, {}, opts.inner);
  }
  iterates.push_back(x_bar);
  recorder.log(T - 1, x_bar, trace.counter, trace.rows);

  trace.tau = sample_output_index(T, rng);
  trace.x_out = iterates[trace.tau];
  return trace;
}

// ---------------------------------------------------------------------------
// Advisory outer-iteration counts from the explicit worst-case expressions.
// ---------------------------------------------------------------------------
enum class TheoremMode { D1, D2, Svrg };

inline double theorem_T(const ProblemConstants& c, double psi0, double psi_star, double epsilon,
                        TheoremMode mode) {
  require(epsilon > 0.0, "theorem_T: epsilon must be positive");
  std::string absent;
  auto need = [&](double v, const char* name) {
    if (!std::isfinite(v)) absent += absent.empty() ? name : std::string(", ") + name;
  };
  const double eps2 = epsilon * epsilon;
  switch (mode) {
    case TheoremMode::D1: {
      need(c.rho, "rho");
      need(c.D_x, "D_x");
      need(c.D_y, "D_y");
      need(c.M_x, "M_x");
      need(c.M_y, "M_y");
      need(c.Q_g, "Q_g");
      need(c.Q_r, "Q_r");
      if (!absent.empty()) throw config_error("theorem_T(D1): missing constants: " + absent);
      const double a =
          12.0 * c.rho * (psi0 - psi_star + 8.0 * c.rho * c.D_x * c.D_x + 16.0 * c.Q_g +
                          16.0 * c.Q_r) /
          eps2;
      const double b = 336.0 * c.rho * (c.M_x * c.D_x + c.M_y * c.D_y) / eps2;
      return std::max(a, b * std::log(b));
    }
    case TheoremMode::D2: {
      need(c.rho, "rho");
      need(c.M_x, "M_x");
      need(c.M_y, "M_y");
      need(c.M_c, "M_c");
      need(c.Q_g, "Q_g");
      need(c.Q_r, "Q_r");
      if (!(c.mu > 0.0)) absent += absent.empty() ? "mu" : ", mu";
      if (!absent.empty()) throw config_error("theorem_T(D2): missing constants: " + absent);
      const double gamma = 1.0 / (2.0 * c.rho);
      const double a = 400.0 * c.rho * (psi0 - psi_star) / eps2;
      const double inner = 300.0 * c.M_x * c.M_x / c.rho +
                           20.0 * c.M_c * c.M_c * c.M_y * c.M_y * gamma / (c.mu * c.mu) + c.Q_g +
                           c.Q_r;
      const double b = 720.0 * c.rho * inner / eps2;
      return std::max(a, b * std::log(b));
    }
    case TheoremMode::Svrg: {
      need(c.rho, "rho");
      const double pi2_6 = 1.6449340668482264;  // pi^2 / 6
      if (c.mu > 0.0) {
        if (!absent.empty()) throw config_error("theorem_T(svrg): missing constants: " + absent);
        return 6.0 * c.rho * (psi0 - psi_star + pi2_6) / eps2;
      }
      need(c.D_y, "D_y");
      if (!absent.empty()) throw config_error("theorem_T(svrg): missing constants: " + absent);
      const double a = 12.0 * c.rho * (psi0 - psi_star + pi2_6) / eps2;
      const double b = 54.0 * c.rho * c.D_y * c.D_y / eps2;
      return std::max(a, b * std::log(b));
    }
  }
  return 0.0;
}

}  // namespace wcc

#endif  // WCC_OUTER_SOLVERS_HPP
