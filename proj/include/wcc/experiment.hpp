#ifndef WCC_EXPERIMENT_HPP
#define WCC_EXPERIMENT_HPP

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wcc/baselines.hpp"
#include "wcc/common.hpp"
#include "wcc/data_io.hpp"
#include "wcc/outer_solvers.hpp"
#include "wcc/problem.hpp"
#include "wcc/stationarity.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// Declarative experiment configuration: a flat key-value file with dotted
// section names, '#' comments, one "key = value" per line. Unknown keys are
// rejected. A summary file embeds the fully resolved config after the marker
// line below; the parser skips everything before the marker when present, so
// a summary can be re-run directly.
// ---------------------------------------------------------------------------
inline constexpr const char* kResolvedConfigMarker = "# --- resolved config ---";

struct ExperimentConfig {
  // dataset
  std::string dataset_path;  // empty = synthetic
  std::int64_t syn_n = 0;
  std::int64_t syn_d = 0;
  double syn_separation = 2.0;
  double syn_pos_fraction = 0.5;
  // split
  double neg_keep_fraction = 1.0;
  double test_fraction = 0.2;
  double flip_fraction = 0.0;
  std::uint64_t split_seed = 1;
  // problem
  double alpha = 2.0;
  double theta = 10.0;
  std::string constraint = "ball";  // free | ball | box
  double radius = 100.0;
  double box_lo = -1.0;
  double box_hi = 1.0;
  // solver
  std::string solver;  // pg-smd-d1 | pg-smd-d2 | pg-svrg | pl-smd | pl-svrg | erm-sgd
  std::int64_t T = 10;
  int batch = 1;
  double gamma = 0.0;  // 0 = 1/(2 rho), resolved before running
  double c_k = 4.0;
  double svrg_eta_x = 0.0;  // 0 = schedule formula
  double svrg_eta_y = 0.0;
  std::int64_t svrg_j = 0;
  double pl_eta = 0.1;
  std::int64_t pl_inner_iters = 200;
  std::int64_t pl_inner_stages = 3;
  double pl_eta_x = 0.0;
  double pl_eta_y = 0.0;
  double pl_lambda = kInf;
  bool pl_warm_dual = false;
  std::int64_t erm_steps = 1000;
  std::string erm_step_schedule = "0.1:inf";
  // run + diagnostics
  std::uint64_t run_seed = 0;
  std::int64_t psi_stride = 1;
  std::int64_t moreau_stride = 10;
  std::int64_t metrics_stride = 1;
  bool wall_clock = true;
  double moreau_tol = 1e-8;
  std::int64_t moreau_max_iters = 200000;
  std::string output_dir = ".";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return kInf;
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: bad numeric value for " + key + ": '" + v + "'");
  }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const std::int64_t x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw config_error("config: bad integer value for " + key + ": '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw config_error("config: bad boolean value for " + key + ": '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  // honor only the content after the last resolved-config marker, if any
  std::vector<std::string> lines;
  std::size_t start_at = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line) == kResolvedConfigMarker) start_at = lines.size() + 1;
    lines.push_back(line);
  }
  std::map<std::string, std::string> kv;
  for (std::size_t li = start_at; li < lines.size(); ++li) {
    std::string raw = lines[li];
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    raw = detail::trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw config_error("config: expected 'key = value', got '" + raw + "'");
    const std::string key = detail::trim(raw.substr(0, eq));
    const std::string val = detail::trim(raw.substr(eq + 1));
    if (key.empty()) throw config_error("config: empty key");
    if (kv.count(key)) throw config_error("config: duplicate key " + key);
    kv[key] = val;
  }

  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto dbl = [&](const char* key, double& slot) {
    if (auto v = take(key)) slot = detail::parse_double(key, *v);
  };
  auto i64 = [&](const char* key, std::int64_t& slot) {
    if (auto v = take(key)) slot = detail::parse_int(key, *v);
  };
  auto u64 = [&](const char* key, std::uint64_t& slot) {
    if (auto v = take(key)) slot = static_cast<std::uint64_t>(detail::parse_int(key, *v));
  };
  auto str = [&](const char* key, std::string& slot) {
    if (auto v = take(key)) slot = *v;
  };
  auto bol = [&](const char* key, bool& slot) {
    if (auto v = take(key)) slot = detail::parse_bool(key, *v);
  };
  auto intslot = [&](const char* key, int& slot) {
    std::int64_t v64 = slot;
    i64(key, v64);
    slot = static_cast<int>(v64);
  };

  str("dataset.path", cfg.dataset_path);
  i64("dataset.synthetic.n", cfg.syn_n);
  i64("dataset.synthetic.d", cfg.syn_d);
  dbl("dataset.synthetic.separation", cfg.syn_separation);
  dbl("dataset.synthetic.pos_fraction", cfg.syn_pos_fraction);
  dbl("split.neg_keep_fraction", cfg.neg_keep_fraction);
  dbl("split.test_fraction", cfg.test_fraction);
  dbl("split.flip_fraction", cfg.flip_fraction);
  u64("split.seed", cfg.split_seed);
  dbl("problem.alpha", cfg.alpha);
  dbl("problem.theta", cfg.theta);
  str("problem.constraint", cfg.constraint);
  dbl("problem.radius", cfg.radius);
  dbl("problem.box_lo", cfg.box_lo);
  dbl("problem.box_hi", cfg.box_hi);
  str("solver.kind", cfg.solver);
  i64("solver.T", cfg.T);
  intslot("solver.batch", cfg.batch);
  dbl("solver.gamma", cfg.gamma);
  dbl("solver.c_k", cfg.c_k);
  dbl("solver.svrg_eta_x", cfg.svrg_eta_x);
  dbl("solver.svrg_eta_y", cfg.svrg_eta_y);
  i64("solver.svrg_j", cfg.svrg_j);
  dbl("solver.pl_eta", cfg.pl_eta);
  i64("solver.pl_inner_iters", cfg.pl_inner_iters);
  i64("solver.pl_inner_stages", cfg.pl_inner_stages);
  dbl("solver.pl_eta_x", cfg.pl_eta_x);
  dbl("solver.pl_eta_y", cfg.pl_eta_y);
  dbl("solver.pl_lambda", cfg.pl_lambda);
  bol("solver.pl_warm_dual", cfg.pl_warm_dual);
  i64("solver.erm_steps", cfg.erm_steps);
  str("solver.erm_step_schedule", cfg.erm_step_schedule);
  u64("run.seed", cfg.run_seed);
  i64("diagnostics.psi_stride", cfg.psi_stride);
  i64("diagnostics.moreau_stride", cfg.moreau_stride);
  i64("diagnostics.metrics_stride", cfg.metrics_stride);
  bol("diagnostics.wall_clock", cfg.wall_clock);
  dbl("diagnostics.moreau_tol", cfg.moreau_tol);
  i64("diagnostics.moreau_max_iters", cfg.moreau_max_iters);
  str("output.dir", cfg.output_dir);

  if (!kv.empty()) throw config_error("config: unknown key " + kv.begin()->first);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline void validate_config(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw config_error("config: " + key + " " + why);
  };
  const bool synthetic = cfg.dataset_path.empty();
  if (synthetic) {
    if (cfg.syn_n < 4) fail("dataset.synthetic.n", "must be at least 4");
    if (cfg.syn_d < 1) fail("dataset.synthetic.d", "must be positive");
    if (!(cfg.syn_pos_fraction > 0.0 && cfg.syn_pos_fraction < 1.0))
      fail("dataset.synthetic.pos_fraction", "must be in (0,1)");
    if (!(cfg.syn_separation >= 0.0)) fail("dataset.synthetic.separation", "must be nonnegative");
  } else if (cfg.syn_n > 0 || cfg.syn_d > 0) {
    fail("dataset.path", "and dataset.synthetic.* are mutually exclusive");
  }
  if (!(cfg.neg_keep_fraction > 0.0 && cfg.neg_keep_fraction <= 1.0))
    fail("split.neg_keep_fraction", "must be in (0,1]");
  if (!(cfg.test_fraction >= 0.0 && cfg.test_fraction < 1.0))
    fail("split.test_fraction", "must be in [0,1)");
  if (!(cfg.flip_fraction >= 0.0 && cfg.flip_fraction <= 1.0))
    fail("split.flip_fraction", "must be in [0,1]");
  if (!(cfg.alpha > 0.0)) fail("problem.alpha", "must be positive");
  if (!(cfg.theta >= 0.0)) fail("problem.theta", "must be nonnegative");
  if (cfg.constraint != "free" && cfg.constraint != "ball" && cfg.constraint != "box")
    fail("problem.constraint", "must be free, ball, or box");
  if (cfg.constraint == "ball" && !(cfg.radius > 0.0)) fail("problem.radius", "must be positive");
  if (cfg.constraint == "box" && !(cfg.box_hi >= cfg.box_lo))
    fail("problem.box_hi", "must be at least problem.box_lo");
  static const char* kSolvers[] = {"pg-smd-d1", "pg-smd-d2", "pg-svrg",
                                   "pl-smd",    "pl-svrg",   "erm-sgd"};
  bool known = false;
  for (const char* s : kSolvers) known = known || cfg.solver == s;
  if (!known) fail("solver.kind", "must be one of pg-smd-d1, pg-smd-d2, pg-svrg, pl-smd, pl-svrg, erm-sgd");
  if (cfg.T < 1) fail("solver.T", "must be positive");
  if (cfg.batch < 1) fail("solver.batch", "must be positive");
  if (cfg.gamma < 0.0) fail("solver.gamma", "must be nonnegative (0 = default)");
  if (!(cfg.c_k > 0.0)) fail("solver.c_k", "must be positive");
  if (cfg.svrg_eta_x < 0.0) fail("solver.svrg_eta_x", "must be nonnegative (0 = formula)");
  if (cfg.svrg_eta_y < 0.0) fail("solver.svrg_eta_y", "must be nonnegative (0 = formula)");
  if (cfg.svrg_j != 0 && cfg.svrg_j < 2) fail("solver.svrg_j", "must be 0 or at least 2");
  if (!(cfg.pl_eta > 0.0)) fail("solver.pl_eta", "must be positive");
  if (cfg.pl_inner_iters < 2) fail("solver.pl_inner_iters", "must be at least 2");
  if (cfg.pl_inner_stages < 2) fail("solver.pl_inner_stages", "must be at least 2");
  if (cfg.erm_steps < 0) fail("solver.erm_steps", "must be nonnegative");
  if (cfg.psi_stride < 0) fail("diagnostics.psi_stride", "must be nonnegative");
  if (cfg.moreau_stride < 0) fail("diagnostics.moreau_stride", "must be nonnegative");
  if (cfg.metrics_stride < 0) fail("diagnostics.metrics_stride", "must be nonnegative");
  if (!(cfg.moreau_tol > 0.0)) fail("diagnostics.moreau_tol", "must be positive");
  if (cfg.moreau_max_iters < 1) fail("diagnostics.moreau_max_iters", "must be positive");
  if (cfg.solver == "pg-smd-d2" && !(cfg.theta > 0.0))
    fail("problem.theta", "must be positive for pg-smd-d2 (mu > 0)");
}

// (step:until_pass,...) with the last segment open-ended.
inline std::vector<std::pair<double, double>> parse_step_schedule(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(text);
  std::string seg;
  while (std::getline(in, seg, ',')) {
    seg = detail::trim(seg);
    const auto colon = seg.find(':');
    if (colon == std::string::npos)
      throw config_error("config: bad solver.erm_step_schedule segment '" + seg + "'");
    const double step = detail::parse_double("solver.erm_step_schedule", seg.substr(0, colon));
    const double until = detail::parse_double("solver.erm_step_schedule", seg.substr(colon + 1));
    if (!(step > 0.0))
      throw config_error("config: solver.erm_step_schedule steps must be positive");
    out.emplace_back(step, until);
  }
  if (out.empty()) throw config_error("config: solver.erm_step_schedule is empty");
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic two-class Gaussian generator: class centers at +- separation/2
// along a random unit direction.
// ---------------------------------------------------------------------------
inline Dataset make_synthetic(std::int64_t n, std::int64_t d, double separation,
                              double pos_fraction, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec w(d);
  for (std::int64_t j = 0; j < d; ++j) w[j] = normal(rng);
  w.normalize();
  Dataset ds;
  ds.name = "synthetic";
  ds.features.resize(n, d);
  ds.labels.resize(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double label = unit(rng) < pos_fraction ? 1.0 : -1.0;
    ds.labels[i] = label;
    for (std::int64_t j = 0; j < d; ++j)
      ds.features(i, j) = normal(rng) + label * (separation / 2.0) * w[j];
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Experiment runner.
// ---------------------------------------------------------------------------
struct ExperimentResult {
  ExperimentConfig resolved;
  RunTrace trace;
  std::shared_ptr<DroTruncatedLogistic> problem;
  Dataset train, test;
  std::string trace_path, summary_path, iterate_path;
  double final_psi = kNaN;
  double final_moreau_grad_sq = kNaN;
  double best_test_error = kNaN;
  double best_f_score = kNaN;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline PrimalConstraint build_constraint(const ExperimentConfig& cfg, int d) {
  if (cfg.constraint == "free") return PrimalConstraint::unconstrained();
  if (cfg.constraint == "ball") return PrimalConstraint::ball(cfg.radius);
  return PrimalConstraint::cube(d, cfg.box_lo, cfg.box_hi);
}

inline void build_data(const ExperimentConfig& cfg, Dataset& train, Dataset& test) {
  Rng split_rng = make_rng(cfg.split_seed, kStreamSplit);
  Dataset full = cfg.dataset_path.empty()
                     ? make_synthetic(cfg.syn_n, cfg.syn_d, cfg.syn_separation,
                                      cfg.syn_pos_fraction, split_rng)
                     : parse_libsvm(cfg.dataset_path);
  std::tie(train, test) = imbalance_split(full, cfg.neg_keep_fraction, cfg.test_fraction,
                                          split_rng);
  flip_labels(train, cfg.flip_fraction, split_rng);
}

}  // namespace detail

inline std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& v) { out << key << " = " << v << '\n'; };
  auto kvd = [&](const char* key, double v) { kv(key, detail::fmt(v)); };
  auto kvi = [&](const char* key, std::int64_t v) { kv(key, std::to_string(v)); };
  if (!cfg.dataset_path.empty()) {
    kv("dataset.path", cfg.dataset_path);
  } else {
    kvi("dataset.synthetic.n", cfg.syn_n);
    kvi("dataset.synthetic.d", cfg.syn_d);
    kvd("dataset.synthetic.separation", cfg.syn_separation);
    kvd("dataset.synthetic.pos_fraction", cfg.syn_pos_fraction);
  }
  kvd("split.neg_keep_fraction", cfg.neg_keep_fraction);
  kvd("split.test_fraction", cfg.test_fraction);
  kvd("split.flip_fraction", cfg.flip_fraction);
  kvi("split.seed", static_cast<std::int64_t>(cfg.split_seed));
  kvd("problem.alpha", cfg.alpha);
  kvd("problem.theta", cfg.theta);
  kv("problem.constraint", cfg.constraint);
  if (cfg.constraint == "ball") kvd("problem.radius", cfg.radius);
  if (cfg.constraint == "box") {
    kvd("problem.box_lo", cfg.box_lo);
    kvd("problem.box_hi", cfg.box_hi);
  }
  kv("solver.kind", cfg.solver);
  kvi("solver.T", cfg.T);
  kvi("solver.batch", cfg.batch);
  kvd("solver.gamma", cfg.gamma);
  kvd("solver.c_k", cfg.c_k);
  if (cfg.solver == "pg-svrg" || cfg.solver == "pl-svrg") {
    kvd("solver.svrg_eta_x", cfg.svrg_eta_x);
    kvd("solver.svrg_eta_y", cfg.svrg_eta_y);
    kvi("solver.svrg_j", cfg.svrg_j);
  }
  if (cfg.solver == "pl-smd" || cfg.solver == "pl-svrg") {
    kvd("solver.pl_eta", cfg.pl_eta);
    kvi("solver.pl_inner_iters", cfg.pl_inner_iters);
    kvi("solver.pl_inner_stages", cfg.pl_inner_stages);
    kvd("solver.pl_eta_x", cfg.pl_eta_x);
    kvd("solver.pl_eta_y", cfg.pl_eta_y);
    kvd("solver.pl_lambda", cfg.pl_lambda);
    kv("solver.pl_warm_dual", cfg.pl_warm_dual ? "on" : "off");
  }
  if (cfg.solver == "erm-sgd") {
    kvi("solver.erm_steps", cfg.erm_steps);
    kv("solver.erm_step_schedule", cfg.erm_step_schedule);
  }
  kvi("run.seed", static_cast<std::int64_t>(cfg.run_seed));
  kvi("diagnostics.psi_stride", cfg.psi_stride);
  kvi("diagnostics.moreau_stride", cfg.moreau_stride);
  kvi("diagnostics.metrics_stride", cfg.metrics_stride);
  kv("diagnostics.wall_clock", cfg.wall_clock ? "on" : "off");
  kvd("diagnostics.moreau_tol", cfg.moreau_tol);
  kvi("diagnostics.moreau_max_iters", cfg.moreau_max_iters);
  kv("output.dir", cfg.output_dir);
  return out.str();
}

inline ExperimentResult run_experiment(ExperimentConfig cfg) {
  validate_config(cfg);
  if (const char* env = std::getenv("WCC_OUTPUT_DIR")) cfg.output_dir = env;

  ExperimentResult res;
  detail::build_data(cfg, res.train, res.test);
  const int d = res.train.dim();
  res.problem = std::make_shared<DroTruncatedLogistic>(
      res.train.features, res.train.labels, cfg.alpha, cfg.theta,
      detail::build_constraint(cfg, d));
  const DroTruncatedLogistic& problem = *res.problem;

  if (cfg.gamma == 0.0) cfg.gamma = 1.0 / (2.0 * problem.constants().rho);
  res.resolved = cfg;

  TraceHooks hooks;
  hooks.psi_stride = cfg.psi_stride;
  hooks.moreau_stride = cfg.moreau_stride;
  hooks.metrics_stride = cfg.metrics_stride;
  hooks.wall_clock = cfg.wall_clock;
  hooks.psi = [&problem](const Vec& x) { return psi_value(problem, x); };
  if (cfg.theta > 0.0) {
    hooks.moreau_grad_sq = [&problem, &cfg](const Vec& x) {
      const double g = moreau_grad_norm(problem, x, cfg.gamma, cfg.moreau_tol,
                                        cfg.moreau_max_iters);
      return g * g;
    };
  }
  const Dataset& test = res.test;
  hooks.test_metrics = [&problem, &test](const Vec& x) {
    return metrics(test.features * x, test.labels);
  };

  const Vec x0 = Vec::Zero(d);
  Rng rng = make_rng(cfg.run_seed, kStreamAlgorithm);
  if (cfg.solver == "pg-smd-d1" || cfg.solver == "pg-smd-d2") {
    PgSmdOptions opts;
    opts.pg_case = cfg.solver == "pg-smd-d1" ? PgCase::D1 : PgCase::D2;
    opts.batch = cfg.batch;
    opts.gamma_override = cfg.gamma;
    res.trace = pg_smd(problem, x0, cfg.T, opts, rng, hooks);
  } else if (cfg.solver == "pg-svrg") {
    PgSvrgOptions opts;
    opts.gamma_override = cfg.gamma;
    opts.c_k = cfg.c_k;
    opts.inner = SvrgOverrides{cfg.svrg_eta_x, cfg.svrg_eta_y, cfg.svrg_j};
    res.trace = pg_svrg(problem, x0, cfg.T, opts, rng, hooks);
  } else if (cfg.solver == "pl-smd" || cfg.solver == "pl-svrg") {
    PlConfig pl;
    pl.inner = cfg.solver == "pl-smd" ? PlConfig::Inner::smd : PlConfig::Inner::svrg;
    pl.eta = cfg.pl_eta;
    pl.inner_iters = cfg.pl_inner_iters;
    pl.inner_stages = cfg.pl_inner_stages;
    pl.batch = cfg.batch;
    pl.eta_x = cfg.pl_eta_x;
    pl.eta_y = cfg.pl_eta_y;
    pl.lambda = cfg.pl_lambda;
    pl.warm_dual = cfg.pl_warm_dual;
    pl.svrg = SvrgOverrides{cfg.svrg_eta_x, cfg.svrg_eta_y, cfg.svrg_j};
    pl.T_outer = cfg.T;
    res.trace = pl_run(problem, x0, pl, rng, hooks);
  } else {  // erm-sgd
    ErmConfig erm;
    erm.steps = cfg.erm_steps;
    erm.batch = cfg.batch;
    erm.step_schedule = parse_step_schedule(cfg.erm_step_schedule);
    res.trace = erm_sgd(problem, x0, erm, rng, hooks);
  }
  res.trace.seed = cfg.run_seed;

  for (const auto& row : res.trace.rows) {
    if (!std::isnan(row.psi)) res.final_psi = row.psi;
    if (!std::isnan(row.moreau_grad_sq)) res.final_moreau_grad_sq = row.moreau_grad_sq;
    if (!std::isnan(row.test_error) &&
        (std::isnan(res.best_test_error) || row.test_error < res.best_test_error))
      res.best_test_error = row.test_error;
    if (!std::isnan(row.f_score) && (std::isnan(res.best_f_score) || row.f_score > res.best_f_score))
      res.best_f_score = row.f_score;
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  res.trace_path = (fs::path(cfg.output_dir) / "trace.csv").string();
  res.summary_path = (fs::path(cfg.output_dir) / "summary.txt").string();
  res.iterate_path = (fs::path(cfg.output_dir) / "x_out.txt").string();
  write_trace_csv(res.trace.rows, res.trace_path);

  {
    std::ofstream out(res.iterate_path);
    if (!out) throw std::runtime_error("run_experiment: cannot open " + res.iterate_path);
    for (int i = 0; i < res.trace.x_out.size(); ++i)
      out << detail::fmt(res.trace.x_out[i]) << '\n';
  }

  std::ofstream out(res.summary_path);
  if (!out) throw std::runtime_error("run_experiment: cannot open " + res.summary_path);
  out << "result.solver = " << cfg.solver << '\n';
  out << "result.final_psi = " << detail::fmt(res.final_psi) << '\n';
  out << "result.final_moreau_grad_sq = " << detail::fmt(res.final_moreau_grad_sq) << '\n';
  out << "result.best_test_error = " << detail::fmt(res.best_test_error) << '\n';
  out << "result.best_f_score = " << detail::fmt(res.best_f_score) << '\n';
  out << "result.total_data_passes = " << detail::fmt(res.trace.counter.full_pass_equivalents())
      << '\n';
  out << "result.stochastic_grad_calls = " << res.trace.counter.stochastic_grad_calls() << '\n';
  out << "result.full_evaluations = " << res.trace.counter.full_evaluations() << '\n';
  out << "result.tau = " << res.trace.tau << '\n';
  const ProblemConstants& pc = problem.constants();
  out << "constants.note = derived conservative bounds, not paper-supplied\n";
  out << "constants.rho = " << detail::fmt(pc.rho) << '\n';
  out << "constants.mu = " << detail::fmt(pc.mu) << '\n';
  out << "constants.M_x = " << detail::fmt(pc.M_x) << '\n';
  out << "constants.M_y = " << detail::fmt(pc.M_y) << '\n';
  out << "constants.M_c = " << detail::fmt(pc.M_c) << '\n';
  out << "constants.L_x = " << detail::fmt(pc.L_x) << '\n';
  out << "constants.L_y = " << detail::fmt(pc.L_y) << '\n';
  out << "constants.D_x = " << detail::fmt(pc.D_x) << '\n';
  out << "constants.D_y = " << detail::fmt(pc.D_y) << '\n';
  out << "constants.Q_g = " << detail::fmt(pc.Q_g) << '\n';
  out << "constants.Q_r = " << detail::fmt(pc.Q_r) << '\n';
  out << "schedule.kind = " << res.trace.schedule.kind << '\n';
  out << "schedule.gamma = " << detail::fmt(res.trace.schedule.gamma) << '\n';
  for (std::size_t t = 0; t < res.trace.schedule.smd.size(); ++t) {
    const auto& e = res.trace.schedule.smd[t];
    out << "schedule." << t << " = j=" << e.j << " eta_x=" << detail::fmt(e.eta_x)
        << " eta_y=" << detail::fmt(e.eta_y) << '\n';
  }
  for (std::size_t t = 0; t < res.trace.schedule.svrg.size(); ++t) {
    const auto& e = res.trace.schedule.svrg[t];
    out << "schedule." << t << " = lambda=" << detail::fmt(e.lambda)
        << " mu_y=" << detail::fmt(e.mu_y) << " Lambda=" << detail::fmt(e.Lambda)
        << " k=" << e.k << '\n';
  }
  out << kResolvedConfigMarker << '\n';
  out << render_config(res.resolved);
  if (!out) throw std::runtime_error("run_experiment: write failed for " + res.summary_path);
  return res;
}

inline ExperimentResult run_experiment_file(const std::string& path) {
  return run_experiment(load_config(path));
}

// ---------------------------------------------------------------------------
// Multi-solver comparison over a shared dataset and split: one long-format
// CSV keyed by data passes, suitable for external plotting.
// ---------------------------------------------------------------------------
inline std::string compare_solvers(const std::vector<std::string>& config_paths,
                                   const std::string& out_path) {
  require(!config_paths.empty(), "compare_solvers: no configs");
  std::vector<ExperimentConfig> cfgs;
  for (const auto& p : config_paths) cfgs.push_back(load_config(p));
  auto data_key = [](const ExperimentConfig& c) {
    std::ostringstream k;
    k << c.dataset_path << '|' << c.syn_n << '|' << c.syn_d << '|' << c.syn_separation << '|'
      << c.syn_pos_fraction << '|' << c.neg_keep_fraction << '|' << c.test_fraction << '|'
      << c.flip_fraction << '|' << c.split_seed;
    return k.str();
  };
  for (const auto& c : cfgs) {
    if (data_key(c) != data_key(cfgs.front()))
      throw config_error("compare_solvers: configs must share dataset and split spec");
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("compare_solvers: cannot open " + out_path);
  out << "solver,data_passes,psi,test_error,f_score\n";
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    ExperimentResult res = run_experiment(cfgs[i]);
    double prev = -1.0;
    for (const auto& row : res.trace.rows) {
      if (!(row.data_passes > prev))
        throw std::runtime_error("compare_solvers: data_passes not strictly increasing for " +
                                 cfgs[i].solver);
      prev = row.data_passes;
      out << cfgs[i].solver << ',' << detail::fmt(row.data_passes) << ','
          << detail::format_field(row.psi) << ',' << detail::format_field(row.test_error) << ','
          << detail::format_field(row.f_score) << '\n';
    }
  }
  if (!out) throw std::runtime_error("compare_solvers: write failed for " + out_path);
  return out_path;
}

// Builds the problem described by a config (dataset, split, corruption) and
// reports near-stationarity of a given iterate.
inline StationarityReport stationarity_at(const std::string& config_path,
                                          const std::string& iterate_path) {
  ExperimentConfig cfg = load_config(config_path);
  validate_config(cfg);
  Dataset train, test;
  detail::build_data(cfg, train, test);
  DroTruncatedLogistic problem(train.features, train.labels, cfg.alpha, cfg.theta,
                               detail::build_constraint(cfg, train.dim()));
  if (cfg.gamma == 0.0) cfg.gamma = 1.0 / (2.0 * problem.constants().rho);

  std::ifstream in(iterate_path);
  if (!in) throw config_error("stationarity: cannot open iterate file " + iterate_path);
  std::vector<double> vals;
  double v;
  while (in >> v) vals.push_back(v);
  if (static_cast<int>(vals.size()) != train.dim())
    throw config_error("stationarity: iterate has " + std::to_string(vals.size()) +
                       " coordinates, problem needs " + std::to_string(train.dim()));
  Vec x = Eigen::Map<Vec>(vals.data(), static_cast<int>(vals.size()));
  return moreau_prox(problem, x, cfg.gamma, cfg.moreau_tol, cfg.moreau_max_iters);
}

}  // namespace wcc

#endif  // WCC_EXPERIMENT_HPP
