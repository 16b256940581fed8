// Copyright 2026 The dbmpc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dbmpc: closed-loop rendezvous experiments from a config file.
//
//   dbmpc run <config>       single run of the base scenario
//   dbmpc sweep <config>     sweep values x solvers, one repetition each
//   dbmpc timing <config>    sweep values x solvers x repetitions
//   dbmpc validate <config>  parse and check only; prints the resolved config
//
// DBMPC_OUTPUT_ROOT, when set, replaces the configured output directory.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dbmpc/config_io.hpp"
#include "dbmpc/experiment.hpp"

namespace {

using namespace dbmpc;

void print_summary(const ExperimentOutcome& outcome) {
  std::printf("%-8s %-8s %-10s %12s %12s %14s %10s %10s %10s\n", "axis", "value", "solver",
              "fuel[s]", "mission[s]", "acc_solve[s]", "mean[ms]", "p95[ms]", "p99[ms]");
  for (const auto& row : outcome.summary) {
    const std::string mission = row.mission_time ? format_double(*row.mission_time) : "none";
    std::printf("%-8s %-8s %-10s %12.2f %12s %14.3f %10.3f %10.3f %10.3f%s\n",
                std::string(to_string(row.axis)).c_str(), format_double(row.value).c_str(),
                std::string(to_string(row.solver)).c_str(), row.fuel, mission.c_str(),
                row.accumulated_solve_time, 1e3 * row.timing.mean, 1e3 * row.timing.p95,
                1e3 * row.timing.p99, row.all_runs_ok ? "" : "  (run failed)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deadband-constrained MPC rendezvous experiments"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for batch runs")
      ->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Single closed-loop run of the base scenario");
  auto* sweep = app.add_subcommand("sweep", "Sweep values x solvers, one repetition each");
  auto* timing = app.add_subcommand("timing", "Sweep values x solvers x repetitions");
  auto* validate = app.add_subcommand("validate", "Parse and check a config file");
  for (auto* sub : {run, sweep, timing, validate}) {
    sub->add_option("config", config_path, "Config file")->required();
  }

  CLI11_PARSE(app, argc, argv);

  ExperimentSpec spec;
  try {
    spec = load_config(config_path);
    if (const char* root = std::getenv("DBMPC_OUTPUT_ROOT"); root && *root) {
      spec.output_dir = root;
    }
    if (*run) {
      spec.axis = SweepAxis::kNone;
      spec.values.clear();
      spec.solvers = {spec.base.solver};
      spec.repetitions = 1;
    } else if (*sweep) {
      spec.repetitions = 1;
    }
    spec.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  if (*validate) {
    std::cout << format_config(spec);
    return kExitOk;
  }

  try {
    ExperimentOptions options;
    options.threads = threads;
    const ExperimentOutcome outcome = run_experiment(spec, options);
    print_summary(outcome);
    std::cout << "results written to " << spec.output_dir.string() << "\n";
    if (outcome.failed_runs > 0) {
      std::cerr << outcome.failed_runs << " run(s) failed; see runs.csv\n";
    }
    return outcome.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return kExitRunFatal;
  }
}
