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

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace dbmpc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

// Per-thruster activation durations [s] for one sampling step. Each entry is
// either 0 or inside [h_min, h] once a solver has produced it.
using PulseVector = Eigen::VectorXd;

// Raised when a computation leaves the finite domain (singular gravity,
// overflow in the matrix exponential, a diverging integrator).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for invalid scenario or experiment configuration. `key` names the
// offending configuration entry when one is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class SolverId { kStandard, kProjected, kRelaxed, kOracle };

std::string_view to_string(SolverId id);
// Throws ConfigError for unknown names.
SolverId parse_solver_id(std::string_view name);

// Position/velocity of the chaser relative to the target, in LVLH [m, m/s].
class LvlhState {
 public:
  LvlhState() : x_(Vec6::Zero()) {}
  explicit LvlhState(const Vec6& x) : x_(x) {}
  LvlhState(const Vec3& r, const Vec3& v) { x_ << r, v; }

  Vec3 position() const { return x_.head<3>(); }
  Vec3 velocity() const { return x_.tail<3>(); }
  const Vec6& vector() const { return x_; }
  bool all_finite() const { return x_.allFinite(); }

  friend bool operator==(const LvlhState& a, const LvlhState& b) {
    return a.x_ == b.x_;
  }

 private:
  Vec6 x_;
};

}  // namespace dbmpc
