#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support/test_problems.hpp"
#include "wcc/baselines.hpp"

using namespace wcc;
using Catch::Approx;

namespace {

wcc_tests::PolyPayoffProblem linear_instance(Rng& rng, int p, int q, double theta) {
  std::normal_distribution<double> normal(0.0, 0.8);
  std::vector<Mat> Q(q);
  std::vector<Vec> b(q);
  Vec d(q);
  for (int i = 0; i < q; ++i) {
    b[i] = Vec(p);
    for (int j = 0; j < p; ++j) b[i][j] = normal(rng);
    d[i] = normal(rng);
  }
  return wcc_tests::PolyPayoffProblem(std::move(Q), std::move(b), std::move(d), theta,
                                      PrimalConstraint::cube(p, -2.0, 2.0));
}

wcc_tests::PolyPayoffProblem quadratic_instance(Rng& rng, int p, int q, double theta) {
  std::normal_distribution<double> normal(0.0, 0.6);
  std::vector<Mat> Q(q);
  std::vector<Vec> b(q);
  Vec d(q);
  for (int i = 0; i < q; ++i) {
    Q[i] = Mat::Identity(p, p) * (0.2 + 0.1 * i);
    b[i] = Vec(p);
    for (int j = 0; j < p; ++j) b[i][j] = normal(rng);
    d[i] = normal(rng);
  }
  return wcc_tests::PolyPayoffProblem(std::move(Q), std::move(b), std::move(d), theta,
                                      PrimalConstraint::cube(p, -2.0, 2.0));
}

}  // namespace

TEST_CASE("linearized payoff equals the exact payoff at the anchor") {
  Rng rng(1);
  auto problem = quadratic_instance(rng, 3, 4, 1.0);
  Vec x_t = Vec::Constant(3, 0.4);
  LinearizedProblem lin(problem, x_t);
  const Vec exact = problem.full_dual_payoff(x_t);
  const Vec model = lin.full_dual_payoff(x_t);
  CHECK((exact - model).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(lin.constants().rho == 0.0);
}

TEST_CASE("linearized payoff slope matches finite differences of the payoff") {
  Rng rng(2);
  // one-dimensional quadratic payoffs: the model slope must be c_i'(x_t)
  std::vector<Mat> Q(2, Mat::Identity(1, 1) * 0.8);
  std::vector<Vec> b(2, Vec::Constant(1, 0.3));
  b[1][0] = -0.5;
  Vec d(2);
  d << 0.1, -0.2;
  wcc_tests::PolyPayoffProblem problem(std::move(Q), std::move(b), std::move(d), 1.0,
                                       PrimalConstraint::cube(1, -2.0, 2.0));
  Vec x_t = Vec::Constant(1, 0.7);
  LinearizedProblem lin(problem, x_t);
  for (int i = 0; i < 2; ++i) {
    double v0, v1;
    Vec g(1);
    lin.payoff_component(i, x_t, v0, g);
    lin.payoff_component(i, x_t + Vec::Constant(1, 1.0), v1, g);
    const double slope = v1 - v0;
    const Vec fd = wcc_tests::central_diff(
        [&](const Vec& z) {
          double v;
          Vec gg(1);
          problem.payoff_component(i, z, v, gg);
          return v;
        },
        x_t, 1e-5);
    CHECK(slope == Approx(fd[0]).margin(1e-6));
  }
}

TEST_CASE("prox-linear step is a fixed point at a model minimizer") {
  // constant payoffs: the model gradient vanishes everywhere
  std::vector<Mat> Q(3);
  std::vector<Vec> b(3, Vec::Zero(2));
  Vec d(3);
  d << 0.4, 0.1, 0.7;
  wcc_tests::PolyPayoffProblem problem(std::move(Q), std::move(b), std::move(d), 0.9,
                                       PrimalConstraint::cube(2, -1.0, 1.0));
  Vec x_t = Vec::Constant(2, 0.3);
  PlConfig cfg;
  cfg.eta = 0.5;
  cfg.inner = PlConfig::Inner::smd;
  cfg.inner_iters = 64;
  OracleCounter counter(problem.num_sum_components());
  Rng rng = make_rng(3, kStreamAlgorithm);
  Vec next = pl_step(problem, x_t, cfg, rng, counter);
  CHECK((next - x_t).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("prox-linear on an affine payoff matches the direct subproblem solver") {
  Rng rng_data(4);
  auto problem = linear_instance(rng_data, 2, 3, 1.0);
  Vec x_t = Vec::Constant(2, 0.2);

  PlConfig cfg;
  cfg.eta = 0.7;
  cfg.inner = PlConfig::Inner::svrg;
  cfg.inner_stages = 3;
  OracleCounter c1(problem.num_sum_components());
  Rng r1 = make_rng(11, kStreamAlgorithm);
  Vec via_pl = pl_step(problem, x_t, cfg, r1, c1);

  SaddleSubproblem sub;
  sub.x_bar = x_t;
  sub.y_bar = problem.geom().argmin_dgf();
  sub.gamma = cfg.eta;
  OracleCounter c2(problem.num_sum_components());
  Rng r2 = make_rng(11, kStreamAlgorithm);
  Vec direct = svrg_solve(problem, sub, cfg.inner_stages, c2, r2);

  CHECK((via_pl - direct).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK(c1.stochastic_grad_calls() == c2.stochastic_grad_calls());
}

TEST_CASE("prox-linear step contracts as eta goes to zero") {
  Rng rng_data(5);
  auto problem = quadratic_instance(rng_data, 2, 3, 0.8);
  Vec x_t = Vec::Constant(2, 0.5);
  PlConfig cfg;
  cfg.eta = 1e-8;
  cfg.inner = PlConfig::Inner::smd;
  cfg.inner_iters = 128;
  OracleCounter counter(problem.num_sum_components());
  Rng rng = make_rng(7, kStreamAlgorithm);
  Vec next = pl_step(problem, x_t, cfg, rng, counter);
  CHECK((next - x_t).norm() < 1e-5);
}

TEST_CASE("prox-linear accounting") {
  Rng rng_data(6);
  auto problem = linear_instance(rng_data, 2, 4, 1.0);
  Vec x_t = Vec::Zero(2);
  PlConfig cfg;
  cfg.eta = 0.4;
  cfg.inner = PlConfig::Inner::smd;
  cfg.inner_iters = 50;
  cfg.batch = 3;

  SECTION("inner iterations times batch") {
    OracleCounter counter(problem.num_sum_components());
    Rng rng = make_rng(8, kStreamAlgorithm);
    pl_step(problem, x_t, cfg, rng, counter);
    CHECK(counter.stochastic_grad_calls() == (cfg.inner_iters - 1) * cfg.batch);
    CHECK(counter.full_evaluations() == 0);
  }
  SECTION("warm dual anchor charges one full pass") {
    PlConfig warm = cfg;
    warm.warm_dual = true;
    OracleCounter counter(problem.num_sum_components());
    Rng rng = make_rng(8, kStreamAlgorithm);
    pl_step(problem, x_t, warm, rng, counter);
    CHECK(counter.stochastic_grad_calls() == (cfg.inner_iters - 1) * cfg.batch);
    CHECK(counter.full_evaluations() == 1);
  }
}

TEST_CASE("pl_run produces a monotone-passes trace") {
  Rng rng_data(7);
  auto problem = linear_instance(rng_data, 2, 3, 0.6);
  PlConfig cfg;
  cfg.eta = 0.5;
  cfg.inner = PlConfig::Inner::smd;
  cfg.inner_iters = 32;
  cfg.T_outer = 5;
  TraceHooks hooks;
  hooks.wall_clock = false;
  Rng rng = make_rng(9, kStreamAlgorithm);
  auto trace = pl_run(problem, Vec::Zero(2), cfg, rng, hooks);
  REQUIRE(trace.rows.size() == 5);
  CHECK(trace.schedule.kind == "pl-smd");
  double prev = -1.0;
  for (const auto& r : trace.rows) {
    CHECK(r.data_passes > prev);
    prev = r.data_passes;
  }
}

TEST_CASE("erm sgd") {
  SECTION("zero loss keeps the iterate constant") {
    auto problem = wcc_tests::zero_problem(3, 4);
    ErmConfig cfg;
    cfg.steps = 40;
    Rng rng = make_rng(10, kStreamAlgorithm);
    auto trace = erm_sgd(problem, Vec::Constant(3, 0.2), cfg, rng);
    CHECK((trace.x_out - Vec::Constant(3, 0.2)).norm() == 0.0);
  }
  SECTION("approaches the minimizer of a convex quadratic mean") {
    Rng rng_data(11);
    auto problem = quadratic_instance(rng_data, 2, 5, 0.0);
    // mean objective: average of 0.5 s_i ||x||^2 + b_i.x + d_i; minimizer solves
    // (mean s_i) x = -mean b_i
    double mean_s = 0.0;
    Vec mean_b = Vec::Zero(2);
    Vec g(2);
    for (int i = 0; i < 5; ++i) {
      double v;
      problem.payoff_component(i, Vec::Zero(2), v, g);
      mean_b += g / 5.0;
      mean_s += (0.2 + 0.1 * i) / 5.0;
    }
    const Vec x_min = -mean_b / mean_s;
    ErmConfig cfg;
    cfg.steps = 20000;
    cfg.step_schedule = {{0.5, 2000.0}, {0.05, kInf}};
    Rng rng = make_rng(12, kStreamAlgorithm);
    auto trace = erm_sgd(problem, Vec::Constant(2, 1.5), cfg, rng);
    CHECK((trace.x_out - x_min).norm() < 0.25);
    CHECK((trace.x_out - x_min).norm() < (Vec::Constant(2, 1.5) - x_min).norm());
  }
  SECTION("gradient estimator is unbiased by enumeration") {
    Rng rng_data(13);
    auto problem = quadratic_instance(rng_data, 2, 4, 0.0);
    Vec x = Vec::Constant(2, 0.3);
    Vec mean = Vec::Zero(2), g(2);
    for (int i = 0; i < 4; ++i) {
      double v;
      problem.payoff_component(i, x, v, g);
      mean += g / 4.0;
    }
    // the ERM step direction is the mean payoff gradient; enumerate all indices
    Vec acc = Vec::Zero(2);
    for (int i = 0; i < 4; ++i) {
      double v;
      problem.payoff_component(i, x, v, g);
      acc += g;
    }
    CHECK((acc / 4.0 - mean).lpNorm<Eigen::Infinity>() < 1e-15);
  }
  SECTION("accounting equals steps times batch") {
    auto problem = wcc_tests::zero_problem(2, 3);
    ErmConfig cfg;
    cfg.steps = 17;
    cfg.batch = 2;
    Rng rng = make_rng(14, kStreamAlgorithm);
    auto trace = erm_sgd(problem, Vec::Zero(2), cfg, rng);
    CHECK(trace.counter.stochastic_grad_calls() == 34);
    CHECK(trace.counter.full_evaluations() == 0);
  }
  SECTION("empty schedule is rejected") {
    auto problem = wcc_tests::zero_problem(2, 3);
    ErmConfig cfg;
    cfg.step_schedule.clear();
    Rng rng = make_rng(15, kStreamAlgorithm);
    CHECK_THROWS_AS(erm_sgd(problem, Vec::Zero(2), cfg, rng), std::invalid_argument);
  }
}
