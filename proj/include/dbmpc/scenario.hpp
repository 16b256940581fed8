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

#include <cstdint>
#include <vector>

#include "dbmpc/types.hpp"

namespace dbmpc {

// Everything that defines one closed-loop run. SI units throughout.
// Default-constructed values are the reference rendezvous scenario: a
// 2000 kg chaser 100 km below a target on a 7171 km circular orbit, six
// 1 kN thrusters along +-x, +-y, +-z of LVLH.
struct ScenarioConfig {
  double gravitational_constant = 6.674e-11;  // m^3 kg^-1 s^-2
  double earth_mass = 5.972e24;               // kg
  double target_orbit_radius = 7171e3;        // m
  double chaser_mass = 2000.0;                // kg
  std::vector<Vec3> thrust_forces = default_thrust_forces();  // N, LVLH
  Mat6 state_weight = Mat6::Identity();
  double min_activation = 5.0;       // h_min [s]
  double sampling_period = 10.0;     // h [s]
  double sim_duration = 3600.0;      // [s]
  double linearization_point = 5.0;  // s0 [s]
  LvlhState initial_state{Vec3(0.0, 0.0, 100e3), Vec3::Zero()};
  int horizon = 10;
  SolverId solver = SolverId::kRelaxed;

  double qp_tolerance = 1e-8;
  int qp_max_iterations = 20000;
  // Relative Tikhonov weight: eps = qp_regularization * (1 + max|H_ij|).
  double qp_regularization = 1e-9;
  double bnb_gap_tolerance = 1e-6;
  int bnb_node_budget = 10000;

  std::uint64_t rng_seed = 0;
  // Std-dev of a Gaussian offset added to the initial position [m] (and
  // scaled by 1e-3 for velocity) before a run. Zero keeps runs identical.
  double initial_state_perturbation = 0.0;

  int thruster_count() const { return static_cast<int>(thrust_forces.size()); }
  double omega() const;

  // Throws ConfigError naming the first violated invariant.
  void validate() const;

  static std::vector<Vec3> default_thrust_forces();
};

}  // namespace dbmpc
