/*
 * Copyright 2026 The fedval-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: run, compare, prob.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedval/cli.h"
#include "fedval/common.h"
#include "fedval/orchestrator.h"
#include "fedval/parallel.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning simulator with validation-score aggregation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fedval::kToolVersion);

  int workers = 0;

  std::string run_config;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", run_config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--workers", workers,
                  "Worker threads (default: FEDVAL_WORKERS or logical cores)");

  std::string cmp_config;
  std::string cmp_out;
  std::vector<std::string> strategies;
  auto* compare = app.add_subcommand("compare", "Run several strategies");
  compare->add_option("config", cmp_config, "Base experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  compare
      ->add_option("--strategies", strategies,
                   "Comma-separated strategies, e.g. fedavg,fedval,lfr:0.4")
      ->delimiter(',')
      ->required();
  compare->add_option("--out", cmp_out, "Output directory")->required();
  compare->add_option("--workers", workers, "Worker threads");

  int n = 30;
  double p = 0.1;
  std::optional<double> threshold;
  std::optional<int> k0;
  std::vector<long long> rounds = {1};
  auto* prob = app.add_subcommand(
      "prob", "Probability that too many selected clients are malicious");
  prob->add_option("--n", n, "Clients selected per round")->required();
  prob->add_option("--p", p, "Fraction of malicious clients in the population")
      ->required();
  auto* thr_opt = prob->add_option("--threshold", threshold,
                                   "Protected fraction; k0 = ceil(0.75*t*n)");
  auto* k0_opt = prob->add_option("--k0", k0, "Explicit malicious-count cutoff");
  thr_opt->excludes(k0_opt);
  prob->add_option("--rounds", rounds, "Comma-separated round counts")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (workers <= 0) workers = fedval::DefaultWorkerCount();

  try {
    if (*run) {
      const auto m = fedval::CmdRun(run_config, run_out, workers);
      std::cout << m.ToJson().dump(2) << '\n';
    } else if (*compare) {
      if (strategies.empty()) {
        std::cerr << "compare: --strategies must list at least one strategy\n";
        return kExitValidation;
      }
      for (const auto& m :
           fedval::CmdCompare(cmp_config, strategies, cmp_out, workers))
        std::cout << m.ToJson().dump() << '\n';
    } else if (*prob) {
      if (!threshold && !k0) {
        std::cerr << "prob: one of --threshold or --k0 is required\n";
        return kExitValidation;
      }
      if (!(p >= 0.0 && p <= 1.0) || n < 0) {
        std::cerr << "prob: --p must be in [0, 1] and --n >= 0\n";
        return kExitValidation;
      }
      const int cutoff = k0 ? *k0 : fedval::DefaultK0(n, *threshold);
      fedval::CmdProb(std::cout, n, p, cutoff, rounds);
    }
  } catch (const fedval::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
