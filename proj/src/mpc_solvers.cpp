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

#include "dbmpc/mpc_solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace dbmpc {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

// Slack used when classifying raw QP output as on/off/inside the deadband.
constexpr double kFeasibilityTol = 1e-12;

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool in_deadband(double s, double h_min) {
  return s > kFeasibilityTol && s < h_min - kFeasibilityTol;
}

QpSettings settings_from(const ScenarioConfig& cfg, double lipschitz) {
  QpSettings settings;
  settings.tolerance = cfg.qp_tolerance;
  settings.max_iterations = cfg.qp_max_iterations;
  settings.regularization = cfg.qp_regularization;
  settings.lipschitz = lipschitz;
  return settings;
}

}  // namespace

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kApproxFeasible: return "approx_feasible";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kTimeout: return "timeout";
  }
  return "unknown";
}

PulseVector project_feasible(const PulseVector& s, double h_min, double h) {
  PulseVector out(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    const double v = s[i];
    if (v <= 0.5 * h_min) {
      out[i] = 0.0;
    } else if (v < h_min) {
      out[i] = h_min;
    } else if (v > h) {
      out[i] = h;
    } else {
      out[i] = v;
    }
  }
  return out;
}

bool is_feasible(const PulseVector& s, double h_min, double h, double tol) {
  for (Index i = 0; i < s.size(); ++i) {
    const double v = s[i];
    const bool off = std::abs(v) <= tol;
    const bool on = v >= h_min - tol && v <= h + tol;
    if (!off && !on) return false;
  }
  return true;
}

double evaluate_objective(const AffineModel& aff, const LvlhState& x,
                          const std::vector<PulseVector>& sequence, const Mat6& state_weight) {
  Vec6 state = x.vector();
  double fuel = 0.0;
  for (const auto& s : sequence) {
    state = aff.step(state, s);
    fuel += s.sum();
  }
  return state.dot(state_weight * state) + fuel;
}

std::vector<PulseVector> split_horizon(const VectorXd& z, int thrusters) {
  std::vector<PulseVector> steps;
  for (Index k = 0; k + thrusters <= z.size(); k += thrusters) {
    steps.emplace_back(z.segment(k, thrusters));
  }
  return steps;
}

MpcController::MpcController(const ScenarioConfig& cfg, const AffineModel& aff)
    : cfg_(cfg), aff_(aff), condenser_(aff, cfg.state_weight, cfg.horizon) {
  qp_solver_.settings() =
      settings_from(cfg_, estimate_lipschitz(condenser_.hessian(), QpSettings{}.power_iterations) *
                              1.05);
}

VectorXd MpcController::relaxed_lower() const { return VectorXd::Zero(condenser_.size()); }

VectorXd MpcController::relaxed_upper() const {
  return VectorXd::Constant(condenser_.size(), cfg_.sampling_period);
}

std::optional<VectorXd> MpcController::shifted_plan() const {
  if (!warm_start_enabled_ || !previous_plan_) return std::nullopt;
  const Index m = condenser_.thruster_count();
  const Index n = condenser_.size();
  VectorXd shifted(n);
  shifted.head(n - m) = previous_plan_->tail(n - m);
  shifted.tail(m).setConstant(cfg_.linearization_point);
  return shifted;
}

void MpcController::remember(const VectorXd& plan) {
  if (warm_start_enabled_) previous_plan_ = plan;
}

SolveReport MpcController::solve(const LvlhState& x, SolverId solver) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  switch (solver) {
    case SolverId::kRelaxed: report = relaxed(x); break;
    case SolverId::kProjected: report = projected(x); break;
    case SolverId::kStandard: report = standard(x); break;
    case SolverId::kOracle: report = oracle(x); break;
  }
  report.wall_time = elapsed_since(start);
  return report;
}

SolveReport MpcController::relaxed(const LvlhState& x) {
  const int m = condenser_.thruster_count();
  const BoxQp qp = condenser_.build(x, relaxed_lower(), relaxed_upper());
  const auto warm = shifted_plan();
  const QpSolution sol = qp_solver_.solve(qp, warm ? &*warm : nullptr);

  SolveReport report;
  report.qp_solves = 1;
  report.qp_iterations = sol.iterations;
  report.iterations = 1;
  report.objective = sol.objective;
  report.command = project_feasible(sol.z.head(m), cfg_.min_activation, cfg_.sampling_period);
  report.planned_sequence = split_horizon(sol.z, m);
  report.planned_sequence.front() = report.command;
  report.status = sol.converged ? SolveStatus::kOptimal : SolveStatus::kTimeout;
  remember(sol.z);
  return report;
}

SolveReport MpcController::projected(const LvlhState& x) {
  const int m = condenser_.thruster_count();
  const double h_min = cfg_.min_activation;
  const double h = cfg_.sampling_period;
  VectorXd lower = relaxed_lower();
  VectorXd upper = relaxed_upper();
  BoxQp qp = condenser_.build(x, lower, upper);

  SolveReport report;
  ActivationLock lock(m);
  std::optional<VectorXd> warm = shifted_plan();
  QpSolution sol;
  bool all_converged = true;
  bool feasible = false;
  for (int iter = 0; iter <= m; ++iter) {
    for (int i = 0; i < m; ++i) {
      const PulseBounds b = lock.bounds(i, h_min, h);
      lower[i] = b.low;
      upper[i] = b.high;
    }
    sol = qp_solver_.solve(qp, lower, upper, warm ? &*warm : nullptr);
    ++report.qp_solves;
    report.qp_iterations += sol.iterations;
    report.iterations = iter + 1;
    all_converged = all_converged && sol.converged;
    warm = sol.z;

    const VectorXd first = sol.z.head(m);
    if (is_feasible(first, h_min, h, kFeasibilityTol)) {
      feasible = true;
      break;
    }
    const PulseVector projected = project_feasible(first, h_min, h);
    for (int i = 0; i < m; ++i) {
      if (!in_deadband(first[i], h_min)) continue;
      lock.alpha[i] = projected[i] > 0.0 ? 1 : 0;
      lock.beta[i] = std::abs(1 - lock.alpha[i]);
    }
    report.lock_history.push_back(lock);
  }

  report.objective = sol.objective;
  report.command = project_feasible(sol.z.head(m), h_min, h);
  report.planned_sequence = split_horizon(sol.z, m);
  report.planned_sequence.front() = report.command;
  if (!feasible) {
    ++report.exhausted_lock_loops;
    report.status = SolveStatus::kApproxFeasible;
  } else {
    report.status = all_converged ? SolveStatus::kOptimal : SolveStatus::kTimeout;
  }
  remember(sol.z);
  return report;
}

namespace {

struct Node {
  VectorXd lower;
  VectorXd upper;
  VectorXd warm;
  double bound;
  long order;
};

struct NodeAfter {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.order > b.order;
  }
};

}  // namespace

SolveReport MpcController::standard(const LvlhState& x) {
  const int m = condenser_.thruster_count();
  const double h_min = cfg_.min_activation;
  const double h = cfg_.sampling_period;
  const double gap = cfg_.bnb_gap_tolerance;
  const BoxQp qp = condenser_.build(x, relaxed_lower(), relaxed_upper());

  SolveReport report;
  BranchAndBoundStats stats;

  auto prunable = [&](double bound, double incumbent) {
    return bound >= incumbent * (1.0 - gap);
  };

  // Root node: the relaxed QP.
  const auto warm = shifted_plan();
  QpSolution root = qp_solver_.solve(qp, warm ? &*warm : nullptr);
  ++report.qp_solves;
  report.qp_iterations += root.iterations;
  stats.nodes = 1;
  stats.root_bound = root.objective;
  remember(root.z);

  VectorXd incumbent = project_feasible(root.z, h_min, h);
  double incumbent_value = qp.objective(incumbent);
  stats.initial_incumbent = incumbent_value;
  stats.incumbent_history.push_back(incumbent_value);

  auto offer = [&](const VectorXd& candidate) {
    const double value = qp.objective(candidate);
    if (value < incumbent_value) {
      incumbent_value = value;
      incumbent = candidate;
      stats.incumbent_history.push_back(value);
    }
  };

  std::priority_queue<Node, std::vector<Node>, NodeAfter> open;
  long order = 0;
  bool all_converged = root.converged;

  // Branches on the most fractional variable of `sol`; offers a rounded
  // candidate, or the node solution itself when it is already feasible.
  auto expand = [&](const QpSolution& sol, const VectorXd& lower, const VectorXd& upper) {
    if (prunable(sol.objective, incumbent_value)) return;
    Index branch = -1;
    double most = 0.0;
    for (Index j = 0; j < sol.z.size(); ++j) {
      const double v = sol.z[j];
      if (!in_deadband(v, h_min)) continue;
      const double fractionality = std::min(v, h_min - v) / (0.5 * h_min);
      if (fractionality > most) {
        most = fractionality;
        branch = j;
      }
    }
    offer(project_feasible(sol.z, h_min, h));
    if (branch < 0) return;
    Node off{lower, upper, sol.z, sol.objective, order++};
    off.lower[branch] = 0.0;
    off.upper[branch] = 0.0;
    off.warm[branch] = 0.0;
    Node on{lower, upper, sol.z, sol.objective, order++};
    on.lower[branch] = h_min;
    on.warm[branch] = h_min;
    open.push(std::move(off));
    open.push(std::move(on));
  };

  expand(root, qp.lower, qp.upper);
  while (!open.empty()) {
    if (stats.nodes >= cfg_.bnb_node_budget) {
      stats.budget_exhausted = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (prunable(node.bound, incumbent_value)) continue;
    const QpSolution sol = qp_solver_.solve(qp, node.lower, node.upper, &node.warm);
    ++stats.nodes;
    ++report.qp_solves;
    report.qp_iterations += sol.iterations;
    all_converged = all_converged && sol.converged;
    expand(sol, node.lower, node.upper);
  }

  report.iterations = stats.nodes;
  report.objective = incumbent_value;
  report.planned_sequence = split_horizon(incumbent, m);
  report.command = report.planned_sequence.front();
  if (stats.budget_exhausted) {
    report.status = SolveStatus::kTimeout;
  } else {
    report.status = all_converged ? SolveStatus::kOptimal : SolveStatus::kTimeout;
  }
  report.bnb = std::move(stats);
  return report;
}

SolveReport MpcController::oracle(const LvlhState& x) {
  const int m = condenser_.thruster_count();
  const Index n = condenser_.size();
  if (n > 16) {
    throw std::invalid_argument("solve_oracle: N * M exceeds 16");
  }
  const double h_min = cfg_.min_activation;
  const double h = cfg_.sampling_period;
  const BoxQp qp = condenser_.build(x, relaxed_lower(), relaxed_upper());

  SolveReport report;
  double best_value = std::numeric_limits<double>::infinity();
  VectorXd best;
  bool all_converged = true;
  VectorXd lower(n), upper(n);
  const long patterns = 1L << n;
  for (long p = 0; p < patterns; ++p) {
    for (Index j = 0; j < n; ++j) {
      const bool on = (p >> j) & 1L;
      lower[j] = on ? h_min : 0.0;
      upper[j] = on ? h : 0.0;
    }
    const QpSolution sol = qp_solver_.solve(qp, lower, upper);
    ++report.qp_solves;
    report.qp_iterations += sol.iterations;
    all_converged = all_converged && sol.converged;
    if (sol.objective < best_value) {
      best_value = sol.objective;
      best = sol.z;
    }
  }
  report.iterations = static_cast<int>(patterns);
  report.objective = best_value;
  // Patterns with an on-variable at exactly h_min project onto themselves.
  report.planned_sequence = split_horizon(best, m);
  report.command = project_feasible(report.planned_sequence.front(), h_min, h);
  report.status = all_converged ? SolveStatus::kOptimal : SolveStatus::kTimeout;
  return report;
}

namespace {

SolveReport one_shot(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg,
                     SolverId solver) {
  if (solver == SolverId::kOracle && cfg.horizon * aff.thruster_count() > 16) {
    throw std::invalid_argument("solve_oracle: N * M exceeds 16");
  }
  MpcController controller(cfg, aff);
  return controller.solve(x, solver);
}

}  // namespace

SolveReport solve_relaxed(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg) {
  return one_shot(x, aff, cfg, SolverId::kRelaxed);
}

SolveReport solve_projected(const LvlhState& x, const AffineModel& aff,
                            const ScenarioConfig& cfg) {
  return one_shot(x, aff, cfg, SolverId::kProjected);
}

SolveReport solve_standard(const LvlhState& x, const AffineModel& aff,
                           const ScenarioConfig& cfg) {
  return one_shot(x, aff, cfg, SolverId::kStandard);
}

SolveReport solve_oracle(const LvlhState& x, const AffineModel& aff, const ScenarioConfig& cfg) {
  return one_shot(x, aff, cfg, SolverId::kOracle);
}

}  // namespace dbmpc
