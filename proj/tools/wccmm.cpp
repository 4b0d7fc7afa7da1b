// Command-line experiment runner for the WCC min-max solvers.
//
// Subcommands:
//   run <config>                      run one experiment, write trace + summary
//   compare <config>... [-o out.csv]  run several configs sharing a dataset/split
//   stationarity <config> --at <file> certify near-stationarity of an iterate
//
// Exit codes: 0 success, 1 configuration error, 2 numeric failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wcc/experiment.hpp"

namespace {

int run_command(const std::string& config_path) {
  wcc::ExperimentResult res = wcc::run_experiment_file(config_path);
  std::cout << "trace:   " << res.trace_path << "\n"
            << "summary: " << res.summary_path << "\n"
            << "iterate: " << res.iterate_path << "\n"
            << "final psi = " << res.final_psi
            << ", data passes = " << res.trace.counter.full_pass_equivalents() << "\n";
  return 0;
}

int compare_command(const std::vector<std::string>& configs, std::string out_path) {
  if (out_path.empty()) {
    wcc::ExperimentConfig first = wcc::load_config(configs.front());
    out_path = (std::filesystem::path(first.output_dir) / "compare.csv").string();
  }
  wcc::compare_solvers(configs, out_path);
  std::cout << "compare: " << out_path << "\n";
  return 0;
}

int stationarity_command(const std::string& config_path, const std::string& iterate_path) {
  const wcc::StationarityReport rep = wcc::stationarity_at(config_path, iterate_path);
  auto line = [](const char* k, double v) { std::printf("stationarity.%s = %.17g\n", k, v); };
  line("gamma", rep.gamma);
  line("grad_norm", rep.grad_norm);
  line("grad_norm_sq", rep.grad_norm * rep.grad_norm);
  line("psi_at_xbar", rep.psi_at_xbar);
  line("psi_at_z", rep.psi_at_z);
  line("envelope", rep.envelope);
  std::printf("stationarity.iterations = %lld\n", static_cast<long long>(rep.iterations));
  line("residual", rep.residual);
  std::puts("stationarity.constants_note = derived conservative bounds, not paper-supplied");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for weakly-convex-concave min-max problems"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", run_config, "config file path")->required();

  std::vector<std::string> cmp_configs;
  std::string cmp_out;
  CLI::App* cmp = app.add_subcommand("compare", "Run several configs sharing a dataset/split");
  cmp->add_option("configs", cmp_configs, "config file paths")->required()->expected(-1);
  cmp->add_option("-o,--out", cmp_out, "combined CSV path (default: first config's output dir)");

  std::string st_config, st_iterate;
  CLI::App* st = app.add_subcommand("stationarity", "Certify near-stationarity of an iterate");
  st->add_option("config", st_config, "config file path")->required();
  st->add_option("--at", st_iterate, "iterate file (whitespace-separated floats)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return run_command(run_config);
    if (cmp->parsed()) return compare_command(cmp_configs, cmp_out);
    return stationarity_command(st_config, st_iterate);
  } catch (const wcc::numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const wcc::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
