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
#include <vector>

#include "dbmpc/orbital_dynamics.hpp"
#include "dbmpc/types.hpp"

namespace dbmpc {

// minimize 0.5 z'Hz + g'z + c0  subject to  l <= z <= u.
struct BoxQp {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double constant = 0.0;

  Eigen::Index size() const { return linear.size(); }
  double objective(const Eigen::VectorXd& z) const;
  // Throws std::invalid_argument on shape mismatch, asymmetric H, or l > u.
  void check() const;
};

struct QpSettings {
  double tolerance = 1e-8;
  int max_iterations = 20000;
  double regularization = 1e-9;
  int power_iterations = 50;
  // Reuse a known Lipschitz constant (largest eigenvalue of H) instead of
  // running power iteration on every call.
  std::optional<double> lipschitz;
  bool record_history = false;
};

struct QpSolution {
  Eigen::VectorXd z;
  double objective = 0.0;  // includes c0, excludes the regularization term
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;  // ||z - P(z - grad)||_inf
  std::vector<double> best_objective_history;
};

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double estimate_lipschitz(const Eigen::MatrixXd& hessian, int iterations);

// Primal active-set iterations on the Tikhonov-regularized objective, backed
// by accelerated projected gradient (FISTA with gradient restart) interleaved
// with Newton steps restricted to the current free face. Every iterate is the exact box projection, so the
// returned point is feasible bitwise. Holds scratch buffers; one instance per
// thread.
class BoxQpSolver {
 public:
  explicit BoxQpSolver(QpSettings settings = {}) : settings_(std::move(settings)) {}

  QpSolution solve(const BoxQp& qp, const Eigen::VectorXd* warm_start = nullptr);

  // Same problem data with the bounds overridden; used by branch and bound.
  QpSolution solve(const BoxQp& qp, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                   const Eigen::VectorXd* warm_start = nullptr);

  QpSettings& settings() { return settings_; }
  const QpSettings& settings() const { return settings_; }

 private:
  // Primal active-set iterations on the regularized problem. Returns true
  // once no bound multiplier has the wrong sign.
  bool active_set_phase(const BoxQp& qp, const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, int budget, Eigen::VectorXd& z,
                        Eigen::VectorXd& grad, int& iterations);
  double regularized_delta(const Eigen::VectorXd& grad, const Eigen::VectorXd& step) const;
  bool newton_face_step(const BoxQp& qp, const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper, Eigen::VectorXd& z, Eigen::VectorXd& grad);

  QpSettings settings_;
  double eps_ = 0.0;
  const Eigen::MatrixXd* hessian_ = nullptr;
  Eigen::VectorXd scratch_;
};

QpSolution solve_box_qp(const BoxQp& qp, double tol, int max_iter);

// Per-thruster duration bounds for one step of the horizon.
struct PulseBounds {
  double low;
  double high;
};

// Eliminates the predicted states of the horizon-N problem
//   min x[N]'Q x[N] + sum_n 1's[n],  x[n+1] = phi x[n] + gamma s[n] + d
// into a dense box QP over z = [s[0]; ...; s[N-1]]. The input-dependent
// pieces are computed once; build() is cheap per initial state.
class Condenser {
 public:
  // Throws std::invalid_argument if Q is not positive definite or N < 1.
  Condenser(const AffineModel& aff, const Mat6& state_weight, int horizon);

  BoxQp build(const LvlhState& x0, const Eigen::VectorXd& lower,
              const Eigen::VectorXd& upper) const;

  // Unforced terminal state phi^N x0 + sum_n phi^(N-1-n) d.
  Vec6 free_terminal_state(const LvlhState& x0) const;
  const Eigen::MatrixXd& prediction() const { return prediction_; }  // 6 x NM
  const Eigen::MatrixXd& hessian() const { return hessian_; }
  int horizon() const { return horizon_; }
  int thruster_count() const { return thrusters_; }
  Eigen::Index size() const { return prediction_.cols(); }

 private:
  int horizon_;
  int thrusters_;
  Mat6 weight_;
  Mat6 phi_power_;   // phi^N
  Vec6 drift_;       // sum_n phi^(N-1-n) d
  Eigen::MatrixXd prediction_;
  Eigen::MatrixXd hessian_;
};

BoxQp condense(const AffineModel& aff, const LvlhState& x0, const Mat6& state_weight,
               int horizon, const std::vector<std::vector<PulseBounds>>& bounds_per_step);

}  // namespace dbmpc
