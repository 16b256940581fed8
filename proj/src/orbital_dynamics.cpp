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

#include "dbmpc/orbital_dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "dbmpc/matrix_exponential.hpp"

namespace dbmpc {

TargetOrbit TargetOrbit::from_config(const ScenarioConfig& cfg) {
  TargetOrbit orbit;
  orbit.mu = cfg.gravitational_constant * cfg.earth_mass;
  orbit.radius = cfg.target_orbit_radius;
  orbit.omega = cfg.omega();
  // R(t) below satisfies dR/dt = R [w]x with w = (0, -omega, 0): the orbit
  // normal r x v points along -y of LVLH.
  orbit.omega_vector = Vec3(0.0, -orbit.omega, 0.0);
  return orbit;
}

TargetPose target_pose(const TargetOrbit& orbit, double t) {
  const double c = std::cos(orbit.omega * t);
  const double s = std::sin(orbit.omega * t);
  TargetPose pose;
  pose.position = Vec3(orbit.radius * c, 0.0, orbit.radius * s);
  pose.rotation << -s, 0.0, -c,
                   0.0, 1.0, 0.0,
                   c, 0.0, -s;
  return pose;
}

Vec6 full_dynamics_rhs(const ScenarioConfig& cfg, const TargetOrbit& orbit, double t,
                       const LvlhState& x, const Vec3& u) {
  const TargetPose pose = target_pose(orbit, t);
  const Vec3 r = x.position();
  const Vec3 v = x.velocity();
  const Vec3 chaser_eci = pose.rotation * r + pose.position;
  const double chaser_norm = chaser_eci.norm();
  if (!(chaser_norm > 0.0) || !std::isfinite(chaser_norm)) {
    throw NumericError("full_dynamics_rhs: singular gravity (chaser at Earth centre)");
  }
  const double target_norm = pose.position.norm();
  const Vec3 gravity_chaser = -orbit.mu / (chaser_norm * chaser_norm * chaser_norm) * chaser_eci;
  const Vec3 gravity_target =
      -orbit.mu / (target_norm * target_norm * target_norm) * pose.position;

  const Vec3& w = orbit.omega_vector;
  const Vec3 accel = -2.0 * w.cross(v) - w.cross(w.cross(r)) +
                     pose.rotation.transpose() * (gravity_chaser - gravity_target) +
                     u / cfg.chaser_mass;
  Vec6 dx;
  dx << v, accel;
  return dx;
}

CwModel CwModel::from_config(const ScenarioConfig& cfg) {
  CwModel m;
  m.omega = cfg.omega();
  m.chaser_mass = cfg.chaser_mass;
  const double w = m.omega;
  m.a.setZero();
  m.a(0, 3) = 1.0;
  m.a(1, 4) = 1.0;
  m.a(2, 5) = 1.0;
  m.a(3, 5) = 2.0 * w;
  m.a(4, 1) = -w * w;
  m.a(5, 2) = 3.0 * w * w;
  m.a(5, 3) = -2.0 * w;
  m.b.setZero();
  m.b.bottomRows<3>() = Mat3::Identity() / cfg.chaser_mass;
  return m;
}

Mat6 transition_closed_form(double omega, double t) {
  const double wt = omega * t;
  const double s = std::sin(wt);
  const double c = std::cos(wt);
  Mat6 phi;
  // clang-format off
  phi << 1, 0, 6 * (wt - s),     4 / omega * s - 3 * t, 0,         2 / omega * (1 - c),
         0, c, 0,                0,                     s / omega, 0,
         0, 0, 4 - 3 * c,        2 / omega * (c - 1),   0,         s / omega,
         0, 0, 6 * omega * (1 - c), 4 * c - 3,          0,         2 * s,
         0, -omega * s, 0,       0,                     c,         0,
         0, 0, 3 * omega * s,    -2 * s,                0,         c;
  // clang-format on
  return phi;
}

Mat6 grammian(const CwModel& model, double s) {
  Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(12, 12);
  augmented.topLeftCorner(6, 6) = -model.a * s;
  augmented.topRightCorner(6, 6) = Mat6::Identity() * s;
  return matrix_exponential(augmented).topRightCorner(6, 6);
}

LvlhState exact_step(const CwModel& model, std::span<const Vec3> thrust_forces,
                     const LvlhState& x, const PulseVector& s, double h) {
  if (static_cast<std::size_t>(s.size()) != thrust_forces.size()) {
    throw std::invalid_argument("exact_step: pulse vector and thruster count differ");
  }
  const Mat6 phi = matrix_exponential(model.a * h);
  Vec6 forced = Vec6::Zero();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) continue;
    forced += grammian(model, s[i]) * (model.b * thrust_forces[i]);
  }
  return LvlhState(Vec6(phi * (x.vector() + forced)));
}

AffineModel linearize_actuation(const CwModel& model, const ScenarioConfig& cfg) {
  const double h = cfg.sampling_period;
  const double s0 = cfg.linearization_point;
  const int m = cfg.thruster_count();

  AffineModel aff;
  aff.h = h;
  aff.s0 = s0;
  aff.phi = matrix_exponential(model.a * h);
  const Mat6 late = matrix_exponential(model.a * (h - s0));

  aff.gamma.resize(6, m);
  Vec6 impulse_sum = Vec6::Zero();
  for (int i = 0; i < m; ++i) {
    const Vec6 column = model.b * cfg.thrust_forces[i];
    aff.impulse_columns.push_back(column);
    aff.gamma.col(i) = late * column;
    impulse_sum += column;
  }
  // G(s) ~ G(s0) + e^{-A s0} (s - s0), summed over thrusters.
  const Mat6 early_inverse = matrix_exponential(-model.a * s0);
  aff.d = aff.phi * (grammian(model, s0) - s0 * early_inverse) * impulse_sum;
  return aff;
}

}  // namespace dbmpc
