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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dbmpc/config_io.hpp"
#include "dbmpc/sim_loop.hpp"

namespace dbmpc {

// Process exit codes shared by the CLI and scripted runs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRunFatal = 3;

struct TimingStats {
  double mean = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Nearest-rank percentiles. Throws std::invalid_argument on empty input.
TimingStats summarize_timing(std::span<const double> samples);

// CSV layouts (header line first, '\n' endings, doubles with 17 significant
// digits):
//   trajectory  t,rx,ry,rz,vx,vy,vz
//   actuation   k,s1..sM,solve_time,iterations,status
//   summary     axis,value,solver,fuel_s,mission_time_s,acc_solve_time_s,
//               mean_ms,p95_ms,p99_ms
//   runs        axis,value,solver,rep,status,fuel_s,mission_time_s,message
// A mission time that was never reached is written as "none".
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectorySample>& trajectory);
void write_actuation_csv(const std::filesystem::path& path,
                         const std::vector<ActuationRecord>& log, int thrusters);

struct TrajectoryRow {
  double t;
  LvlhState state;
};
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

struct ActuationRow {
  int step;
  PulseVector command;
  double solve_time;
  int iterations;
  std::string status;
};
std::vector<ActuationRow> read_actuation_csv(const std::filesystem::path& path);

// "run_<axis>=<value>_<solver>_<rep>.csv"
std::string run_file_name(SweepAxis axis, double value, SolverId solver, int rep);

struct ExperimentOptions {
  int threads = 1;
  bool write_runs = true;  // per-run trajectory/actuation CSVs
};

struct SummaryRow {
  SweepAxis axis;
  double value;
  SolverId solver;
  double fuel;
  std::optional<double> mission_time;
  double accumulated_solve_time;
  TimingStats timing;
  bool all_runs_ok;
};

struct ExperimentOutcome {
  std::vector<SummaryRow> summary;
  int failed_runs = 0;
  int exit_code = kExitOk;
};

// Every (sweep value x solver x repetition) run, then
//   <out>/trajectory/run_*.csv, <out>/actuation/run_*.csv,
//   <out>/summary.csv, <out>/runs.csv, <out>/config_echo.txt.
// Summary fuel / mission / accumulated time come from repetition 0; the
// timing columns pool the per-step samples of all repetitions. A failed run
// is reported in runs.csv and does not stop the batch.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const ExperimentOptions& options = {});

}  // namespace dbmpc
