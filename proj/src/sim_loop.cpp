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

#include "dbmpc/sim_loop.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

namespace dbmpc {

double SimResult::accumulated_solve_time() const {
  double total = 0.0;
  for (double t : solve_times) total += t;
  return total;
}

std::vector<TrajectorySample> SimResult::grid_samples() const {
  std::vector<TrajectorySample> grid;
  for (const auto& sample : trajectory) {
    if (sample.on_grid) grid.push_back(sample);
  }
  return grid;
}

Metrics compute_metrics(const std::vector<TrajectorySample>& trajectory,
                        const std::vector<ActuationRecord>& log) {
  Metrics metrics{0.0, std::nullopt};
  for (const auto& record : log) {
    for (Eigen::Index i = 0; i < record.command.size(); ++i) metrics.fuel += record.command[i];
  }
  // Scan backwards over the grid for the last excursion beyond the radius.
  std::optional<double> candidate;
  for (auto it = trajectory.rbegin(); it != trajectory.rend(); ++it) {
    if (!it->on_grid) continue;
    if (it->state.position().norm() > kMissionRadius) break;
    candidate = it->t;
  }
  metrics.mission_time = candidate;
  return metrics;
}

namespace {

Vec3 force_at(const ScenarioConfig& cfg, const PulseVector& s, double elapsed) {
  Vec3 u = Vec3::Zero();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (elapsed < s[i]) u += cfg.thrust_forces[static_cast<std::size_t>(i)];
  }
  return u;
}

}  // namespace

LvlhState integrate_step(const ScenarioConfig& cfg, const TargetOrbit& orbit, double t0,
                         const LvlhState& x, const PulseVector& s,
                         const IntegrationOptions& options,
                         std::vector<TrajectorySample>* substeps) {
  const double h = cfg.sampling_period;
  std::vector<double> breaks = {0.0, h};
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > 0.0 && s[i] < h) breaks.push_back(s[i]);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  Vec6 state = x.vector();
  auto rhs = [&](double t, const Vec6& at, const Vec3& u) {
    return full_dynamics_rhs(cfg, orbit, t, LvlhState(at), u);
  };
  for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
    const double a = breaks[seg];
    const double b = breaks[seg + 1];
    const double length = b - a;
    // Constant force on the open segment; sample it at the midpoint.
    const Vec3 u = force_at(cfg, s, 0.5 * (a + b));
    const int steps = std::max(1, static_cast<int>(std::ceil(length / options.max_step)));
    const double dt = length / steps;
    for (int k = 0; k < steps; ++k) {
      const double t = t0 + a + k * dt;
      const Vec6 k1 = rhs(t, state, u);
      const Vec6 k2 = rhs(t + 0.5 * dt, state + 0.5 * dt * k1, u);
      const Vec6 k3 = rhs(t + 0.5 * dt, state + 0.5 * dt * k2, u);
      const Vec6 k4 = rhs(t + dt, state + dt * k3, u);
      state += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!state.allFinite()) {
        std::ostringstream msg;
        msg << "integrate_step: non-finite state at t = " << t + dt << " (segment [" << a << ", "
            << b << "], step " << k << ")";
        throw NumericError(msg.str());
      }
      const bool last = seg + 2 == breaks.size() && k + 1 == steps;
      if (substeps && !last) substeps->push_back({t0 + a + (k + 1) * dt, LvlhState(state), false});
    }
  }
  return LvlhState(state);
}

namespace {

LvlhState perturbed_initial_state(const ScenarioConfig& cfg) {
  if (cfg.initial_state_perturbation <= 0.0) return cfg.initial_state;
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> normal(0.0, cfg.initial_state_perturbation);
  Vec6 x = cfg.initial_state.vector();
  for (int i = 0; i < 3; ++i) x[i] += normal(rng);
  for (int i = 3; i < 6; ++i) x[i] += 1e-3 * normal(rng);
  return LvlhState(x);
}

}  // namespace

SimResult run_closed_loop(const ScenarioConfig& cfg) {
  cfg.validate();
  const TargetOrbit orbit = TargetOrbit::from_config(cfg);
  const CwModel cw = CwModel::from_config(cfg);
  const AffineModel aff = linearize_actuation(cw, cfg);
  MpcController controller(cfg, aff);

  const double h = cfg.sampling_period;
  // Guard against T_sim / h landing a hair below an integer.
  const int steps = static_cast<int>(std::floor(cfg.sim_duration / h + 1e-9));

  SimResult result;
  LvlhState x = perturbed_initial_state(cfg);
  result.trajectory.push_back({0.0, x, true});
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    try {
      const SolveReport report = controller.solve(x);
      result.actuation_log.push_back({k, report.command, report.wall_time, report.iterations,
                                      report.status, report.exhausted_lock_loops});
      result.solve_times.push_back(report.wall_time);
      x = integrate_step(cfg, orbit, t, x, report.command, {}, &result.trajectory);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "step " << k << ": " << e.what();
      result.fatal_error = msg.str();
      break;
    }
    result.trajectory.push_back({(k + 1) * h, x, true});
  }

  const Metrics metrics = compute_metrics(result.trajectory, result.actuation_log);
  result.fuel_consumption = metrics.fuel;
  result.mission_time = metrics.mission_time;
  return result;
}

std::vector<SimResult> run_batch(const std::vector<ScenarioConfig>& configs, int threads) {
  std::vector<SimResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run_closed_loop(configs[i]);
      } catch (const std::exception& e) {
        results[i].fatal_error = e.what();
      }
    }
  };
  const int count = std::max(1, std::min<int>(threads, static_cast<int>(configs.size())));
  if (count == 1) {
    worker();
    return results;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  return results;
}

}  // namespace dbmpc
