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
#include <string>
#include <string_view>
#include <vector>

#include "dbmpc/scenario.hpp"

// Flat `key = value` experiment files. `#` starts a comment, arrays are comma
// separated, all quantities are SI. Unset keys keep the reference scenario
// defaults. Recognised keys:
//
//   gravitational_constant earth_mass target_orbit_radius chaser_mass
//   thruster_count thrust_forces (3 M values) state_weight (6 diagonal or
//   36 row-major values) min_activation sampling_period sim_duration
//   linearization_point (defaults to h / 2) initial_state (6 values) horizon
//   solver qp_tolerance qp_max_iterations qp_regularization
//   bnb_gap_tolerance bnb_node_budget rng_seed initial_state_perturbation
//   sweep_axis (none | h_min | horizon | solver) sweep_values solvers
//   repetitions output_dir
namespace dbmpc {

enum class SweepAxis { kNone, kMinActivation, kHorizon, kSolverCrossProduct };

std::string_view to_string(SweepAxis axis);

struct ExperimentSpec {
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::kNone;
  std::vector<double> values;
  std::vector<SolverId> solvers;  // defaults to {base.solver}
  int repetitions = 1;
  std::filesystem::path output_dir = "results";

  // Scenario for one sweep value with `solver` substituted in.
  ScenarioConfig scenario_for(double value, SolverId solver) const;
  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Throws ConfigError (message names the key) on unknown keys, malformed
// values or invariant violations.
ExperimentSpec parse_config(std::string_view text);
ExperimentSpec load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(format_config(s)) reproduces s.
std::string format_config(const ExperimentSpec& spec);

// Shortest round-trippable decimal form of a double.
std::string format_double(double value);

}  // namespace dbmpc
