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

#include <span>
#include <vector>

#include "dbmpc/scenario.hpp"
#include "dbmpc/types.hpp"

// Relative orbital motion of a chaser about a target on a circular orbit.
//
// Frames: ECI is inertial with the target orbit in its zx-plane. LVLH is
// centred on the target with z towards the Earth, x along the target
// velocity and y normal to the orbit plane.
//
// Two models live here: the full two-body relative dynamics (used as the
// simulation plant) and the Clohessy-Wiltshire linearization together with
// its exact discretization for rectangular thruster pulses and the affine
// model the controller predicts with.
namespace dbmpc {

struct TargetOrbit {
  double omega;        // mean motion [rad/s]
  Vec3 omega_vector;   // angular velocity of LVLH w.r.t. ECI, in LVLH [rad/s]
  double radius;       // [m]
  double mu;           // G * m_E [m^3/s^2]

  // omega is derived from (G, m_E, R_T) every time, never stored in config.
  static TargetOrbit from_config(const ScenarioConfig& cfg);
};

struct TargetPose {
  Vec3 position;  // r_T in ECI [m]
  Mat3 rotation;  // LVLH -> ECI
};

TargetPose target_pose(const TargetOrbit& orbit, double t);

// d/dt [r; v] of the full nonlinear relative dynamics with LVLH force `u` [N].
// Throws NumericError when the chaser sits at the Earth's centre.
Vec6 full_dynamics_rhs(const ScenarioConfig& cfg, const TargetOrbit& orbit, double t,
                       const LvlhState& x, const Vec3& u);

struct CwModel {
  Mat6 a;
  Mat63 b;
  double omega;
  double chaser_mass;

  static CwModel from_config(const ScenarioConfig& cfg);
};

// Closed-form e^{A t} of the CW model.
Mat6 transition_closed_form(double omega, double t);

// G(s) = int_0^s e^{-A tau} d tau, from the augmented exponential
// exp([[-A, I], [0, 0]] s).
Mat6 grammian(const CwModel& model, double s);

// Exact CW step over one period h for pulses of duration s_i starting at the
// beginning of the period. No deadband check: any 0 <= s_i <= h is valid.
LvlhState exact_step(const CwModel& model, std::span<const Vec3> thrust_forces,
                     const LvlhState& x, const PulseVector& s, double h);

// x+ = phi x + gamma s + d, exact at s = s0 * 1.
struct AffineModel {
  Mat6 phi;
  Eigen::MatrixXd gamma;              // 6 x M
  Vec6 d;
  double s0;
  double h;
  std::vector<Vec6> impulse_columns;  // B f_i

  int thruster_count() const { return static_cast<int>(gamma.cols()); }
  Vec6 step(const Vec6& x, const PulseVector& s) const { return phi * x + gamma * s + d; }
};

AffineModel linearize_actuation(const CwModel& model, const ScenarioConfig& cfg);

}  // namespace dbmpc
