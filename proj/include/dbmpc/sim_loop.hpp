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

#include <optional>
#include <string>
#include <vector>

#include "dbmpc/mpc_solvers.hpp"
#include "dbmpc/orbital_dynamics.hpp"
#include "dbmpc/scenario.hpp"

namespace dbmpc {

// Chaser-target distance that defines mission completion [m].
inline constexpr double kMissionRadius = 1000.0;

struct TrajectorySample {
  double t;
  LvlhState state;
  bool on_grid;  // a sampling instant k h, as opposed to an RK4 sub-step
};

struct ActuationRecord {
  int step;
  PulseVector command;
  double solve_time;  // [s]
  int iterations;
  SolveStatus status;
  int exhausted_lock_loops = 0;
};

struct SimResult {
  std::vector<TrajectorySample> trajectory;
  std::vector<ActuationRecord> actuation_log;
  double fuel_consumption = 0.0;      // [s]
  std::optional<double> mission_time; // [s]; empty if never achieved
  std::vector<double> solve_times;    // [s], one per step
  // Set when a solver or the integrator failed; the log holds every step
  // completed before the failure.
  std::optional<std::string> fatal_error;

  double accumulated_solve_time() const;
  std::vector<TrajectorySample> grid_samples() const;
};

struct Metrics {
  double fuel;
  std::optional<double> mission_time;
};

// Fuel is the plain sum of every logged duration; mission time is the first
// grid instant after which every grid sample stays within kMissionRadius.
Metrics compute_metrics(const std::vector<TrajectorySample>& trajectory,
                        const std::vector<ActuationRecord>& log);

struct IntegrationOptions {
  double max_step = 0.5;  // [s] upper bound on an RK4 step
};

// Propagates the full nonlinear plant over [t0, t0 + h] under rectangular
// pulses starting at t0. The interval is split at every pulse end so the
// force is constant on each segment. Sub-step states are appended to
// `substeps` when given. Throws NumericError on a non-finite state.
LvlhState integrate_step(const ScenarioConfig& cfg, const TargetOrbit& orbit, double t0,
                         const LvlhState& x, const PulseVector& s,
                         const IntegrationOptions& options = {},
                         std::vector<TrajectorySample>* substeps = nullptr);

// Runs the closed loop for floor(T_sim / h) steps with the configured solver.
SimResult run_closed_loop(const ScenarioConfig& cfg);

// Runs independent scenarios on `threads` workers; results are in input order.
std::vector<SimResult> run_batch(const std::vector<ScenarioConfig>& configs, int threads);

}  // namespace dbmpc
