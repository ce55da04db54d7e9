// tools/bss_bench.cpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Benchmark CLI. Subcommands:
//   run <config> --out <dir>   simulate/separate/evaluate, emit results.csv
//                              plus one manifest per run
//   verify-identities          run the analytical identity suite
//   summarize <results.csv>    five-number summary per (room, algorithm)
//
// Exit codes: 0 success, 1 identity failure, 2 invalid configuration/input.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbss/bench/config.hpp"
#include "cbss/bench/identities.hpp"
#include "cbss/bench/runner.hpp"
#include "cbss/bench/summary.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, std::size_t jobs,
            std::uint64_t seed_offset) {
  cbss::bench::ExperimentConfig cfg;
  try {
    cfg = cbss::bench::resolve_experiment_config(cbss::bench::parse_config_file(config_path));
  } catch (const std::exception& ex) {
    std::cerr << "config error: " << config_path << ": " << ex.what() << "\n";
    return 2;
  }

  std::filesystem::create_directories(out_dir);
  std::vector<cbss::bench::RunKey> keys = cbss::bench::enumerate_runs(cfg, seed_offset);
  std::cout << "running " << keys.size() << " jobs (" << cfg.scenario.t60_list.size()
            << " rooms x " << cfg.scenario.seeds.size() << " seeds x "
            << cfg.algorithms.size() << " algorithms)\n";
  std::vector<cbss::bench::RunResult> results = cbss::bench::execute_all(cfg, keys, jobs);

  std::size_t warnings = 0;
  for (const auto& r : results) {
    if (r.failed) {
      ++warnings;
      std::cerr << "warning: run " << r.run_id << " failed: " << r.failure << "\n";
    }
    cbss::bench::write_manifest(out_dir + "/manifests", cfg, r);
  }
  cbss::bench::write_results_csv(out_dir + "/results.csv", results);
  std::cout << "wrote " << out_dir << "/results.csv";
  if (warnings) std::cout << " (" << warnings << " runs flagged)";
  std::cout << "\n";
  return 0;
}

int cmd_verify(std::size_t trials, bool tol_report, bool inject_failure) {
  cbss::bench::IdentityTolerances tol;
  if (inject_failure) tol.determinant = 0.0;  // testing hook: force a failure
  std::vector<cbss::bench::IdentityResult> results =
      cbss::bench::run_all_identities(trials, tol);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("%-28s %s", r.name.c_str(), r.pass() ? "PASS" : "FAIL");
    if (tol_report)
      std::printf("  (max_dev=%.3e tol=%.3e trials=%zu)", r.max_deviation, r.tolerance,
                  r.trials);
    else
      std::printf("  (max deviation %.3e)", r.max_deviation);
    std::printf("\n");
    all_pass = all_pass && r.pass();
  }
  return all_pass ? 0 : 1;
}

int cmd_summarize(const std::string& results_path, const std::string& out_path) {
  try {
    auto rows = cbss::bench::read_results_csv(results_path);
    auto cells = cbss::bench::summarize_rows(rows);
    cbss::bench::write_summary_csv(out_path, cells);
    std::cout << "wrote " << out_path << " (" << cells.size() << " cells)\n";
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "summarize error: " << ex.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convolutive blind source separation benchmark"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "bench-out";
  std::size_t jobs = 1;
  std::uint64_t seed_offset = 0;
  CLI::App* run = app.add_subcommand("run", "execute an experiment configuration");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "parallel worker count");
  run->add_option("--seed-offset", seed_offset, "offset added to every seed");

  std::size_t trials = 0;
  bool tol_report = false, inject_failure = false;
  CLI::App* verify = app.add_subcommand("verify-identities",
                                        "numerically verify the analytical identities");
  verify->add_option("--trials", trials, "instances per identity (0 = defaults)");
  verify->add_flag("--tol-report", tol_report, "report deviations against tolerances");
  verify->add_flag("--inject-failure", inject_failure,
                   "testing hook: break a tolerance to exercise the failure path");

  std::string results_path, summary_out = "summary.csv";
  CLI::App* summarize = app.add_subcommand("summarize", "five-number summary of results.csv");
  summarize->add_option("results", results_path, "results.csv produced by run")->required();
  summarize->add_option("--out", summary_out, "summary output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, jobs, seed_offset);
  if (verify->parsed()) return cmd_verify(trials, tol_report, inject_failure);
  if (summarize->parsed()) return cmd_summarize(results_path, summary_out);
  return 2;
}
