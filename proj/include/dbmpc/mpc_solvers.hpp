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
#include <string_view>
#include <vector>

#include "dbmpc/orbital_dynamics.hpp"
#include "dbmpc/qp_core.hpp"
#include "dbmpc/scenario.hpp"

// Deadband-constrained MPC controllers. Each thruster duration must lie in
// {0} u [h_min, h]; the controllers differ in how they handle that
// non-convex set:
//
//   relaxed    one QP over [0, h], first step projected onto the set.
//   projected  repeated QPs, locking each offending first-step duration to
//              {0} or [h_min, h] until the first step is feasible (at most
//              M + 1 QPs).
//   standard   best-first branch and bound over on/off patterns of the whole
//              horizon; globally optimal up to the gap tolerance.
//   oracle     exhaustive enumeration of all 2^(N M) patterns, for tests.
namespace dbmpc {

enum class SolveStatus { kOptimal, kApproxFeasible, kInfeasible, kTimeout };
std::string_view to_string(SolveStatus status);

// Componentwise nearest point of {0} u [h_min, h]. A tie at h_min / 2 goes
// to 0.
PulseVector project_feasible(const PulseVector& s, double h_min, double h);

// True if every s_i is 0 or inside [h_min, h], allowing `tol` slack.
bool is_feasible(const PulseVector& s, double h_min, double h, double tol = 0.0);

// First-step locks: alpha_i = 1 forces s_i[0] into [h_min, h], beta_i = 1
// forces s_i[0] = 0. Never both.
struct ActivationLock {
  Eigen::VectorXi alpha;
  Eigen::VectorXi beta;

  explicit ActivationLock(int thrusters)
      : alpha(Eigen::VectorXi::Zero(thrusters)), beta(Eigen::VectorXi::Zero(thrusters)) {}

  int locked_count() const { return (alpha + beta).sum(); }
  bool complementary() const { return (alpha.array() * beta.array()).sum() == 0; }
  PulseBounds bounds(int i, double h_min, double h) const {
    return {alpha[i] * h_min, (1 - beta[i]) * h};
  }
};

struct BranchAndBoundStats {
  int nodes = 0;
  double root_bound = 0.0;
  double initial_incumbent = 0.0;
  std::vector<double> incumbent_history;  // after every improvement
  bool budget_exhausted = false;
};

struct SolveReport {
  PulseVector command;                         // first step, applied to the plant
  std::vector<PulseVector> planned_sequence;   // whole horizon, informational
  double objective = 0.0;
  double wall_time = 0.0;  // [s]
  // Lock iterations (projected), explored nodes (standard), 1 (relaxed),
  // visited patterns (oracle).
  int iterations = 0;
  SolveStatus status = SolveStatus::kOptimal;

  int qp_solves = 0;
  long qp_iterations = 0;
  // Projected only: the locks after every update, and how many calls ran
  // out of iterations without reaching a feasible first step.
  std::vector<ActivationLock> lock_history;
  int exhausted_lock_loops = 0;
  std::optional<BranchAndBoundStats> bnb;
};

// x[N]'Q x[N] + sum of all durations, rolling the affine model forward.
double evaluate_objective(const AffineModel& aff, const LvlhState& x,
                          const std::vector<PulseVector>& sequence, const Mat6& state_weight);

std::vector<PulseVector> split_horizon(const Eigen::VectorXd& z, int thrusters);

// Stateful controller for a closed loop: holds the condensed horizon (the
// Hessian never changes within a run) and the previous plan used for warm
// starts. Not thread-safe; one instance per run.
class MpcController {
 public:
  MpcController(const ScenarioConfig& cfg, const AffineModel& aff);

  SolveReport solve(const LvlhState& x) { return solve(x, cfg_.solver); }
  SolveReport solve(const LvlhState& x, SolverId solver);

  void set_warm_start(bool enabled) { warm_start_enabled_ = enabled; }
  void reset() { previous_plan_.reset(); }

  const Condenser& condenser() const { return condenser_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  SolveReport relaxed(const LvlhState& x);
  SolveReport projected(const LvlhState& x);
  SolveReport standard(const LvlhState& x);
  SolveReport oracle(const LvlhState& x);

  Eigen::VectorXd relaxed_lower() const;
  Eigen::VectorXd relaxed_upper() const;
  std::optional<Eigen::VectorXd> shifted_plan() const;
  void remember(const Eigen::VectorXd& plan);

  ScenarioConfig cfg_;
  AffineModel aff_;
  Condenser condenser_;
  BoxQpSolver qp_solver_;
  bool warm_start_enabled_ = true;
  std::optional<Eigen::VectorXd> previous_plan_;
};

// One-shot (cold-start) entry points.
SolveReport solve_relaxed(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg);
SolveReport solve_projected(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg);
SolveReport solve_standard(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg);
// Throws std::invalid_argument when N * M > 16, before doing any work.
SolveReport solve_oracle(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg);

}  // namespace dbmpc
