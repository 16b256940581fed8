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

#include "dbmpc/scenario.hpp"

#include <cmath>
#include <string>

namespace dbmpc {

std::string_view to_string(SolverId id) {
  switch (id) {
    case SolverId::kStandard: return "standard";
    case SolverId::kProjected: return "projected";
    case SolverId::kRelaxed: return "relaxed";
    case SolverId::kOracle: return "oracle";
  }
  return "unknown";
}

SolverId parse_solver_id(std::string_view name) {
  if (name == "standard") return SolverId::kStandard;
  if (name == "projected") return SolverId::kProjected;
  if (name == "relaxed") return SolverId::kRelaxed;
  if (name == "oracle") return SolverId::kOracle;
  throw ConfigError("solver", "unknown solver '" + std::string(name) +
                                  "' (expected standard, projected, relaxed or oracle)");
}

std::vector<Vec3> ScenarioConfig::default_thrust_forces() {
  return {Vec3(1000, 0, 0),  Vec3(0, 1000, 0),  Vec3(0, 0, 1000),
          Vec3(-1000, 0, 0), Vec3(0, -1000, 0), Vec3(0, 0, -1000)};
}

double ScenarioConfig::omega() const {
  return std::sqrt(gravitational_constant * earth_mass /
                   (target_orbit_radius * target_orbit_radius * target_orbit_radius));
}

namespace {

void require_positive(const char* key, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(key, "must be positive and finite");
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  require_positive("gravitational_constant", gravitational_constant);
  require_positive("earth_mass", earth_mass);
  require_positive("target_orbit_radius", target_orbit_radius);
  require_positive("chaser_mass", chaser_mass);
  require_positive("sampling_period", sampling_period);
  if (!(sim_duration >= 0.0) || !std::isfinite(sim_duration)) {
    throw ConfigError("sim_duration", "must be non-negative and finite");
  }
  if (!(min_activation >= 0.0)) {
    throw ConfigError("min_activation", "must be non-negative");
  }
  if (min_activation > sampling_period) {
    throw ConfigError("min_activation", "h_min exceeds h");
  }
  if (!(linearization_point >= 0.0) || linearization_point > sampling_period) {
    throw ConfigError("linearization_point", "must lie in [0, h]");
  }
  if (thrust_forces.empty()) {
    throw ConfigError("thrust_forces", "at least one thruster is required");
  }
  for (const auto& f : thrust_forces) {
    if (!f.allFinite() || f.isZero(0.0)) {
      throw ConfigError("thrust_forces", "every thrust force must be finite and nonzero");
    }
  }
  if (horizon < 1) throw ConfigError("horizon", "must be at least 1");
  if (!state_weight.allFinite() ||
      (state_weight - state_weight.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("state_weight", "must be symmetric");
  }
  if (Eigen::LLT<Mat6>(state_weight).info() != Eigen::Success) {
    throw ConfigError("state_weight", "must be positive definite");
  }
  if (!initial_state.all_finite()) {
    throw ConfigError("initial_state", "must be finite");
  }
  require_positive("qp_tolerance", qp_tolerance);
  if (qp_max_iterations < 1) throw ConfigError("qp_max_iterations", "must be at least 1");
  if (!(qp_regularization >= 0.0)) throw ConfigError("qp_regularization", "must be non-negative");
  if (!(bnb_gap_tolerance >= 0.0) || bnb_gap_tolerance >= 1.0) {
    throw ConfigError("bnb_gap_tolerance", "must lie in [0, 1)");
  }
  if (bnb_node_budget < 1) throw ConfigError("bnb_node_budget", "must be at least 1");
  if (!(initial_state_perturbation >= 0.0)) {
    throw ConfigError("initial_state_perturbation", "must be non-negative");
  }
}

}  // namespace dbmpc
