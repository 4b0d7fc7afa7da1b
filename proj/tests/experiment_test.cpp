#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wcc/experiment.hpp"

using namespace wcc;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

std::string unique_dir(const std::string& stem) {
  static int counter = 0;
  auto p = fs::temp_directory_path() / ("wcc_exp_" + stem + "_" + std::to_string(counter++));
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string base_config(const std::string& outdir, const std::string& extra = "") {
  std::ostringstream cfg;
  cfg << "dataset.synthetic.n = 80\n"
      << "dataset.synthetic.d = 3\n"
      << "split.test_fraction = 0.25\n"
      << "split.seed = 3\n"
      << "problem.theta = 1\n"
      << "problem.constraint = ball\n"
      << "problem.radius = 5\n"
      << "solver.kind = pg-smd-d2\n"
      << "solver.T = 4\n"
      << "run.seed = 9\n"
      << "diagnostics.moreau_stride = 2\n"
      << "diagnostics.wall_clock = off\n"
      << "output.dir = " << outdir << "\n"
      << extra;
  return cfg.str();
}

std::string write_config(const std::string& text, const std::string& stem) {
  auto path = fs::temp_directory_path() / (stem + ".cfg");
  std::ofstream out(path);
  out << text;
  return path.string();
}

}  // namespace

TEST_CASE("config parsing") {
  SECTION("unknown keys are rejected by name") {
    CHECK_THROWS_WITH(parse_config_text("solver.kind = pg-svrg\nsolver.bogus = 1\n"),
                      Catch::Matchers::ContainsSubstring("solver.bogus"));
  }
  SECTION("duplicate keys are rejected") {
    CHECK_THROWS_AS(parse_config_text("solver.T = 1\nsolver.T = 2\n"), config_error);
  }
  SECTION("bad values name the key") {
    CHECK_THROWS_WITH(parse_config_text("solver.T = soon\n"),
                      Catch::Matchers::ContainsSubstring("solver.T"));
  }
  SECTION("comments and blank lines are ignored") {
    auto cfg = parse_config_text("# a comment\n\nsolver.kind = erm-sgd # trailing\n");
    CHECK(cfg.solver == "erm-sgd");
  }
  SECTION("validation rejects bad ranges before any computation") {
    auto cfg = parse_config_text(base_config("/tmp/x", "problem.alpha = -1\n"));
    CHECK_THROWS_WITH(validate_config(cfg), Catch::Matchers::ContainsSubstring("problem.alpha"));
    auto cfg2 = parse_config_text(base_config("/tmp/x", "solver.batch = 0\n"));
    CHECK_THROWS_AS(validate_config(cfg2), config_error);
    auto cfg3 = parse_config_text("solver.kind = nope\ndataset.synthetic.n = 10\n"
                                  "dataset.synthetic.d = 2\n");
    CHECK_THROWS_WITH(validate_config(cfg3), Catch::Matchers::ContainsSubstring("solver.kind"));
  }
  SECTION("D2 with theta zero is rejected") {
    auto cfg = parse_config_text(base_config("/tmp/x"));
    cfg.theta = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), config_error);
  }
}

TEST_CASE("run experiment determinism and defaults") {
  const std::string dir1 = unique_dir("det1");
  const std::string dir2 = unique_dir("det2");
  auto res1 = run_experiment(parse_config_text(base_config(dir1)));
  auto res2 = run_experiment(parse_config_text(base_config(dir2)));

  SECTION("byte-identical traces under identical config and seeds") {
    CHECK(slurp(res1.trace_path) == slurp(res2.trace_path));
    CHECK(slurp(res1.iterate_path) == slurp(res2.iterate_path));
  }
  SECTION("gamma default materializes as 1/(2 rho)") {
    CHECK(res1.resolved.gamma ==
          Approx(1.0 / (2.0 * res1.problem->constants().rho)).epsilon(1e-15));
    const std::string summary = slurp(res1.summary_path);
    CHECK(summary.find("schedule.gamma = ") != std::string::npos);
    CHECK(summary.find(kResolvedConfigMarker) != std::string::npos);
  }
  SECTION("theta default is ten when unset") {
    ExperimentConfig cfg;
    CHECK(cfg.theta == 10.0);
  }
  SECTION("summary re-runs to the same trace") {
    const std::string dir3 = unique_dir("rerun");
    ExperimentConfig cfg = load_config(res1.summary_path);
    cfg.output_dir = dir3;
    auto res3 = run_experiment(cfg);
    CHECK(slurp(res3.trace_path) == slurp(res1.trace_path));
  }
}

TEST_CASE("trace rows and strides") {
  SECTION("T = 1 emits a single row") {
    const std::string dir = unique_dir("t1");
    std::string text = base_config(dir);
    text.replace(text.find("solver.T = 4"), std::string("solver.T = 4").size(), "solver.T = 1");
    auto res = run_experiment(parse_config_text(text));
    CHECK(res.trace.rows.size() == 1);
    auto rows = read_trace_csv(res.trace_path);
    CHECK(rows.size() == 1);
  }
  SECTION("moreau stride leaves gaps as empty fields, final row complete") {
    const std::string dir = unique_dir("stride");
    std::string text = base_config(dir);
    text.replace(text.find("diagnostics.moreau_stride = 2"),
                 std::string("diagnostics.moreau_stride = 2").size(),
                 "diagnostics.moreau_stride = 3");
    auto res = run_experiment(parse_config_text(text));
    auto rows = read_trace_csv(res.trace_path);
    REQUIRE(rows.size() == 4);
    CHECK_FALSE(std::isnan(rows[0].moreau_grad_sq));
    CHECK(std::isnan(rows[1].moreau_grad_sq));
    CHECK_FALSE(std::isnan(rows[3].moreau_grad_sq));  // last row always evaluated
  }
  SECTION("diagnostics stride never changes the output iterate") {
    const std::string dir1 = unique_dir("s1");
    const std::string dir2 = unique_dir("s2");
    std::string text1 = base_config(dir1);
    text1.replace(text1.find("diagnostics.moreau_stride = 2"),
                  std::string("diagnostics.moreau_stride = 2").size(),
                  "diagnostics.moreau_stride = 1");
    std::string text2 = base_config(dir2, "diagnostics.psi_stride = 0\n"
                                          "diagnostics.metrics_stride = 0\n");
    text2.replace(text2.find("diagnostics.moreau_stride = 2"),
                  std::string("diagnostics.moreau_stride = 2").size(),
                  "diagnostics.moreau_stride = 0");
    auto r1 = run_experiment(parse_config_text(text1));
    auto r2 = run_experiment(parse_config_text(text2));
    CHECK(slurp(r1.iterate_path) == slurp(r2.iterate_path));
    CHECK(r1.trace.tau == r2.trace.tau);
  }
}

TEST_CASE("all solver kinds run end to end") {
  for (const std::string kind : {"pg-smd-d1", "pg-smd-d2", "pg-svrg", "pl-smd", "pl-svrg",
                                 "erm-sgd"}) {
    const std::string dir = unique_dir("kind_" + kind);
    std::ostringstream extra;
    extra << "solver.kind = " << kind << "\n";
    // the schedule-formula inner length is astronomically conservative on DRO
    // instances; the smoke runs use grid-style overrides like the experiments do
    if (kind == "pg-svrg")
      extra << "solver.T = 2\nsolver.svrg_j = 24\nsolver.svrg_eta_x = 0.01\n"
            << "solver.svrg_eta_y = 0.01\n";
    if (kind == "pl-smd" || kind == "pl-svrg")
      extra << "solver.pl_eta = 0.3\nsolver.pl_inner_iters = 16\nsolver.pl_inner_stages = 2\n"
            << "solver.svrg_j = 24\nsolver.svrg_eta_x = 0.01\nsolver.svrg_eta_y = 0.01\n";
    if (kind == "erm-sgd") extra << "solver.erm_steps = 50\n";
    std::string cfg_text = base_config(dir, extra.str());
    cfg_text.replace(cfg_text.find("solver.kind = pg-smd-d2\nsolver.T = 4\n"),
                     std::string("solver.kind = pg-smd-d2\nsolver.T = 4\n").size(), "");
    cfg_text += "dataset.synthetic.separation = 1\n";
    INFO(kind);
    auto res = run_experiment(parse_config_text(cfg_text));
    CHECK(fs::exists(res.trace_path));
    CHECK(fs::exists(res.summary_path));
    CHECK(res.trace.rows.size() >= 1);
  }
}

TEST_CASE("compare solvers") {
  const std::string dir1 = unique_dir("cmp1");
  const std::string dir2 = unique_dir("cmp2");
  const std::string p1 = write_config(base_config(dir1), "cmp_a");
  std::string text2 = base_config(dir2, "solver.batch = 2\n");
  text2.replace(text2.find("solver.T = 4"), std::string("solver.T = 4").size(), "solver.T = 3");
  const std::string p2 = write_config(text2, "cmp_b");

  SECTION("combined long CSV with summed row counts") {
    const std::string out = unique_dir("cmp_out") + "/compare.csv";
    compare_solvers({p1, p2}, out);
    std::ifstream in(out);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "solver,data_passes,psi,test_error,f_score");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4 + 3);
  }
  SECTION("mismatched split specs are rejected") {
    std::string text = base_config(unique_dir("cmp4"));
    const auto pos = text.find("split.seed = 3");
    text.replace(pos, std::string("split.seed = 3").size(), "split.seed = 4");
    const std::string p4 = write_config(text, "cmp_d");
    CHECK_THROWS_AS(compare_solvers({p1, p4}, unique_dir("cmp_out2") + "/c.csv"), config_error);
  }
}

TEST_CASE("stationarity entry point") {
  const std::string dir = unique_dir("stat");
  auto res = run_experiment(parse_config_text(base_config(dir)));
  const std::string cfg_path = write_config(base_config(dir), "stat_cfg");
  auto rep = stationarity_at(cfg_path, res.iterate_path);
  CHECK(rep.gamma == Approx(res.resolved.gamma));
  CHECK(rep.grad_norm >= 0.0);
  CHECK(rep.envelope <= rep.psi_at_xbar + 1e-12);

  SECTION("wrong iterate length is a config error") {
    const std::string bad = dir + "/bad_iterate.txt";
    std::ofstream out(bad);
    out << "0.5\n";
    out.close();
    CHECK_THROWS_AS(stationarity_at(cfg_path, bad), config_error);
  }
}

TEST_CASE("output directory override via the environment") {
  const std::string dir = unique_dir("envdir");
  const std::string target = unique_dir("envtarget");
  setenv("WCC_OUTPUT_DIR", target.c_str(), 1);
  auto res = run_experiment(parse_config_text(base_config(dir)));
  unsetenv("WCC_OUTPUT_DIR");
  CHECK(res.trace_path.find(target) == 0);
  CHECK(fs::exists(res.trace_path));
}

TEST_CASE("command line interface") {
  const std::string dir = unique_dir("cli");
  const std::string cfg_path = write_config(base_config(dir), "cli_cfg");

  SECTION("run succeeds with exit code zero") {
    const std::string cmd = std::string(WCCMM_BIN) + " run " + cfg_path + " > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
  }
  SECTION("config errors exit with code one") {
    const std::string bad = write_config("solver.kind = nope\n", "cli_bad");
    const std::string cmd = std::string(WCCMM_BIN) + " run " + bad + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 1);
  }
  SECTION("stationarity subcommand prints a report") {
    auto res = run_experiment(parse_config_text(base_config(dir)));
    const std::string out_file = dir + "/stat_out.txt";
    const std::string cmd = std::string(WCCMM_BIN) + " stationarity " + cfg_path + " --at " +
                            res.iterate_path + " > " + out_file + " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(slurp(out_file).find("stationarity.grad_norm") != std::string::npos);
  }
}
