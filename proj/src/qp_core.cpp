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

#include "dbmpc/qp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dbmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double BoxQp::objective(const VectorXd& z) const {
  return 0.5 * z.dot(hessian * z) + linear.dot(z) + constant;
}

void BoxQp::check() const {
  const Index n = linear.size();
  if (hessian.rows() != n || hessian.cols() != n || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("BoxQp: inconsistent dimensions");
  }
  if (n > 0 && (hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 *
                   std::max(1.0, hessian.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("BoxQp: hessian is not symmetric");
  }
  if (!lower.allFinite() || !upper.allFinite() || (lower.array() > upper.array()).any()) {
    throw std::invalid_argument("BoxQp: bounds must be finite with lower <= upper");
  }
}

double estimate_lipschitz(const MatrixXd& hessian, int iterations) {
  const Index n = hessian.rows();
  if (n == 0) return 0.0;
  VectorXd v = VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const VectorXd w = hessian * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w);
    v = w / norm;
  }
  return std::max(lambda, (hessian * v).norm());
}

namespace {

void clamp_into(VectorXd& z, const VectorXd& lower, const VectorXd& upper) {
  z = z.cwiseMax(lower).cwiseMin(upper);
}

double projected_residual(const VectorXd& z, const VectorXd& grad, const VectorXd& lower,
                          const VectorXd& upper) {
  double worst = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const double moved = std::clamp(z[i] - grad[i], lower[i], upper[i]);
    worst = std::max(worst, std::abs(z[i] - moved));
  }
  return worst;
}

// (H + eps I) z + g with extended-precision accumulation. The condensed
// problems carry gradient terms many orders above the residual tolerance, and
// plain double sums leave a rounding floor near it.
void accurate_gradient(const MatrixXd& hessian, double eps, const VectorXd& linear,
                       const VectorXd& z, VectorXd& grad) {
  const Index n = z.size();
  grad.resize(n);
  for (Index j = 0; j < n; ++j) {
    const double* column = hessian.col(j).data();  // symmetric: column j is row j
    long double sum = static_cast<long double>(linear[j]) +
                      static_cast<long double>(eps) * static_cast<long double>(z[j]);
    for (Index i = 0; i < n; ++i) {
      sum += static_cast<long double>(column[i]) * static_cast<long double>(z[i]);
    }
    grad[j] = static_cast<double>(sum);
  }
}

double accurate_objective(const BoxQp& qp, const VectorXd& z) {
  const Index n = z.size();
  long double quadratic = 0.0L, linear = 0.0L;
  for (Index j = 0; j < n; ++j) {
    const double* column = qp.hessian.col(j).data();
    long double row = 0.0L;
    for (Index i = 0; i < n; ++i) {
      row += static_cast<long double>(column[i]) * static_cast<long double>(z[i]);
    }
    quadratic += row * static_cast<long double>(z[j]);
    linear += static_cast<long double>(qp.linear[j]) * static_cast<long double>(z[j]);
  }
  return static_cast<double>(0.5L * quadratic + linear + static_cast<long double>(qp.constant));
}

enum : char { kFree = 0, kAtLower = 1, kAtUpper = 2 };

void activity(const VectorXd& z, const VectorXd& lower, const VectorXd& upper,
              std::vector<char>& pattern) {
  pattern.resize(static_cast<std::size_t>(z.size()));
  for (Index i = 0; i < z.size(); ++i) {
    pattern[static_cast<std::size_t>(i)] =
        z[i] <= lower[i] ? kAtLower : (z[i] >= upper[i] ? kAtUpper : kFree);
  }
}

// Rounds of (gradient block + Newton) without any progress before giving up.
constexpr int kStallRounds = 8;
// Gradient steps per block before a Newton step is attempted regardless of
// whether the active pattern has settled.
constexpr int kMaxGradientBlock = 50;
constexpr int kSettledSteps = 3;
constexpr double kArmijo = 1e-4;
constexpr int kMinActiveSetBudget = 100;
constexpr int kMaxRefinements = 3;

}  // namespace

double BoxQpSolver::regularized_delta(const VectorXd& grad, const VectorXd& step) const {
  return grad.dot(step) + 0.5 * (step.dot(*hessian_ * step) + eps_ * step.squaredNorm());
}

bool BoxQpSolver::newton_face_step(const BoxQp& qp, const VectorXd& lower, const VectorXd& upper,
                                   VectorXd& z, VectorXd& grad) {
  const Index n = z.size();
  std::vector<Index> free;
  free.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (lower[i] == upper[i]) continue;
    if (z[i] <= lower[i] && grad[i] > 0.0) continue;
    if (z[i] >= upper[i] && grad[i] < 0.0) continue;
    free.push_back(i);
  }
  if (free.empty()) return false;

  const auto nf = static_cast<Index>(free.size());
  MatrixXd reduced(nf, nf);
  VectorXd rhs(nf);
  for (Index a = 0; a < nf; ++a) {
    rhs[a] = -grad[free[a]];
    for (Index b = 0; b < nf; ++b) reduced(a, b) = qp.hessian(free[a], free[b]);
    reduced(a, a) += eps_;
  }
  Eigen::LLT<MatrixXd> llt(reduced);
  if (llt.info() != Eigen::Success) return false;
  const VectorXd direction = llt.solve(rhs);
  if (!direction.allFinite()) return false;

  VectorXd& trial = scratch_;
  double alpha = 1.0;
  for (int k = 0; k < 40; ++k, alpha *= 0.5) {
    trial = z;
    for (Index a = 0; a < nf; ++a) {
      const Index i = free[a];
      trial[i] = std::clamp(z[i] + alpha * direction[a], lower[i], upper[i]);
    }
    const VectorXd step = trial - z;
    const double slope = grad.dot(step);
    if (!(slope < 0.0)) continue;
    if (regularized_delta(grad, step) <= kArmijo * slope) {
      z = trial;
      grad.noalias() = qp.hessian * z;
      grad += eps_ * z + qp.linear;
      return true;
    }
  }
  return false;
}

bool BoxQpSolver::active_set_phase(const BoxQp& qp, const VectorXd& lower, const VectorXd& upper,
                                   int budget, VectorXd& z, VectorXd& grad, int& iterations) {
  const Index n = z.size();
  const MatrixXd& hessian = qp.hessian;
  std::vector<char> state(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    char& st = state[static_cast<std::size_t>(i)];
    if (lower[i] == upper[i]) {
      st = kAtLower;
    } else if (z[i] <= lower[i] && grad[i] >= 0.0) {
      st = kAtLower;
    } else if (z[i] >= upper[i] && grad[i] <= 0.0) {
      st = kAtUpper;
    } else {
      st = kFree;
    }
  }

  std::vector<Index> free;
  MatrixXd reduced;
  VectorXd direction;
  int refinements = 0;
  for (int k = 0; k < budget; ++k) {
    free.clear();
    for (Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == kFree) free.push_back(i);
    }
    const auto nf = static_cast<Index>(free.size());
    ++iterations;

    bool subspace_optimal = true;
    if (nf > 0) {
      reduced.resize(nf, nf);
      direction.resize(nf);
      for (Index a = 0; a < nf; ++a) {
        direction[a] = -grad[free[a]];
        for (Index b = 0; b < nf; ++b) reduced(a, b) = hessian(free[a], free[b]);
        reduced(a, a) += eps_;
      }
      Eigen::LLT<MatrixXd> llt(reduced);
      if (llt.info() != Eigen::Success) return false;
      direction = llt.solve(direction);
      if (!direction.allFinite()) return false;

      double alpha = 1.0;
      Index blocking = -1;
      char blocking_state = kFree;
      for (Index a = 0; a < nf; ++a) {
        const Index i = free[a];
        const double target = z[i] + direction[a];
        if (target > upper[i]) {
          const double ratio = (upper[i] - z[i]) / direction[a];
          if (ratio < alpha) {
            alpha = ratio;
            blocking = a;
            blocking_state = kAtUpper;
          }
        } else if (target < lower[i]) {
          const double ratio = (lower[i] - z[i]) / direction[a];
          if (ratio < alpha) {
            alpha = ratio;
            blocking = a;
            blocking_state = kAtLower;
          }
        }
      }
      alpha = std::max(alpha, 0.0);
      for (Index a = 0; a < nf; ++a) {
        const Index i = free[a];
        const double moved = std::clamp(z[i] + alpha * direction[a], lower[i], upper[i]);
        const double delta = moved - z[i];
        if (delta != 0.0) {
          grad += hessian.col(i) * delta;
          grad[i] += eps_ * delta;
          z[i] = moved;
        }
      }
      if (blocking >= 0) {
        const Index i = free[blocking];
        const double bound = blocking_state == kAtUpper ? upper[i] : lower[i];
        const double delta = bound - z[i];
        if (delta != 0.0) {
          grad += hessian.col(i) * delta;
          grad[i] += eps_ * delta;
          z[i] = bound;
        }
        state[static_cast<std::size_t>(i)] = blocking_state;
        subspace_optimal = false;
      }
    }
    if (!subspace_optimal) continue;

    // Refresh the gradient to shed accumulated rounding, then release the
    // bound whose multiplier is most wrong. Releasing one at a time keeps the
    // next subspace step moving that variable inward.
    accurate_gradient(hessian, eps_, qp.linear, z, grad);
    // Iterative refinement: the reduced systems are ill-conditioned, so a
    // repeated Newton step on the same face recovers digits lost to rounding.
    double face_residual = 0.0;
    for (Index i : free) face_residual = std::max(face_residual, std::abs(grad[i]));
    if (face_residual > 0.1 * settings_.tolerance && refinements < kMaxRefinements) {
      ++refinements;
      continue;
    }
    refinements = 0;
    Index release = -1;
    double worst = 0.1 * settings_.tolerance;
    for (Index i = 0; i < n; ++i) {
      const char st = state[static_cast<std::size_t>(i)];
      if (lower[i] == upper[i]) continue;
      const double wrong = st == kAtLower ? -grad[i] : (st == kAtUpper ? grad[i] : 0.0);
      if (wrong > worst) {
        worst = wrong;
        release = i;
      }
    }
    if (release < 0) return true;
    state[static_cast<std::size_t>(release)] = kFree;
  }
  return false;
}

QpSolution BoxQpSolver::solve(const BoxQp& qp, const VectorXd* warm_start) {
  return solve(qp, qp.lower, qp.upper, warm_start);
}

QpSolution BoxQpSolver::solve(const BoxQp& qp, const VectorXd& lower, const VectorXd& upper,
                              const VectorXd* warm_start) {
  const Index n = qp.size();
  const MatrixXd& hessian = qp.hessian;
  const VectorXd& linear = qp.linear;
  hessian_ = &hessian;

  QpSolution out;
  if (n == 0) {
    out.z = VectorXd();
    out.objective = qp.constant;
    out.converged = true;
    return out;
  }

  eps_ = settings_.regularization * (1.0 + hessian.cwiseAbs().maxCoeff());
  double lipschitz = settings_.lipschitz
                         ? *settings_.lipschitz
                         // Power iteration approaches from below; pad it.
                         : 1.05 * estimate_lipschitz(hessian, settings_.power_iterations);
  lipschitz += eps_;
  if (!(lipschitz > 0.0)) lipschitz = 1.0;
  const double step = 1.0 / lipschitz;

  auto gradient = [&](const VectorXd& at, VectorXd& g) {
    g.noalias() = hessian * at;
    g += eps_ * at + linear;
  };
  // 0.5 z'(H + eps I)z + g'z + c0, reusing a gradient taken at z.
  auto regularized_value = [&](const VectorXd& at, const VectorXd& g) {
    return 0.5 * at.dot(g + linear) + qp.constant;
  };

  VectorXd z = warm_start && warm_start->size() == n ? *warm_start : VectorXd::Zero(n);
  clamp_into(z, lower, upper);
  VectorXd grad(n);
  gradient(z, grad);

  VectorXd best = z;
  double best_value = regularized_value(z, grad);
  double best_residual = projected_residual(z, grad, lower, upper);
  if (settings_.record_history) out.best_objective_history.push_back(best_value);

  auto consider = [&](const VectorXd& at, const VectorXd& g) {
    const double value = regularized_value(at, g);
    if (value < best_value) {
      best_value = value;
      best = at;
    }
    if (settings_.record_history) out.best_objective_history.push_back(best_value);
    return value;
  };

  int iterations = 0;
  double residual = best_residual;
  bool converged = residual <= settings_.tolerance;
  bool skip_gradient_phase = false;

  // Primal active set first; the gradient scheme below picks up whatever it
  // leaves unfinished.
  if (!converged) {
    const int budget =
        std::min(settings_.max_iterations, std::max(kMinActiveSetBudget, 4 * static_cast<int>(n)));
    VectorXd z_active = z, grad_active = grad;
    const bool finished =
        active_set_phase(qp, lower, upper, budget, z_active, grad_active, iterations);
    accurate_gradient(hessian, eps_, linear, z_active, grad_active);
    consider(z_active, grad_active);
    const double active_residual = projected_residual(z_active, grad_active, lower, upper);
    if (finished || active_residual <= settings_.tolerance ||
        regularized_value(z_active, grad_active) <= regularized_value(z, grad)) {
      z = std::move(z_active);
      grad = std::move(grad_active);
      residual = active_residual;
      best_residual = std::min(best_residual, residual);
      converged = residual <= settings_.tolerance;
    }
    // A finished active set is the exact minimizer up to rounding; the
    // gradient scheme cannot improve on it.
    if (finished && !converged) {
      best = z;
      skip_gradient_phase = true;
    }
  }

  VectorXd z_prev = z, grad_prev = grad, y(n), grad_y(n), z_next(n), grad_next(n);
  std::vector<char> pattern, last_pattern;
  int stalled = 0;

  while (!converged && !skip_gradient_phase && iterations < settings_.max_iterations) {
    const double round_start_value = best_value;
    const double round_start_residual = best_residual;

    // Gradient block: FISTA with the O'Donoghue-Candes gradient restart.
    double t = 1.0;
    z_prev = z;
    grad_prev = grad;
    int settled = 0;
    last_pattern.clear();
    for (int k = 0; k < kMaxGradientBlock && iterations < settings_.max_iterations; ++k) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const double beta = (t - 1.0) / t_next;
      y = z + beta * (z - z_prev);
      grad_y = grad + beta * (grad - grad_prev);
      z_next = y - step * grad_y;
      clamp_into(z_next, lower, upper);
      gradient(z_next, grad_next);
      ++iterations;

      if ((y - z_next).dot(z_next - z) > 0.0) {
        t = 1.0;
      } else {
        t = t_next;
      }
      z_prev.swap(z);
      grad_prev.swap(grad);
      z.swap(z_next);
      grad.swap(grad_next);
      consider(z, grad);

      residual = projected_residual(z, grad, lower, upper);
      if (residual <= settings_.tolerance) {
        converged = true;
        break;
      }
      activity(z, lower, upper, pattern);
      settled = (pattern == last_pattern) ? settled + 1 : 0;
      last_pattern.swap(pattern);
      if (settled >= kSettledSteps) break;
    }
    if (converged) break;

    // Newton block on the free face, starting from the best point seen.
    if (regularized_value(z, grad) > best_value) {
      z = best;
      gradient(z, grad);
    }
    for (int k = 0; k < 4 && iterations < settings_.max_iterations; ++k) {
      const bool moved = newton_face_step(qp, lower, upper, z, grad);
      ++iterations;
      if (!moved) break;
      consider(z, grad);
      residual = projected_residual(z, grad, lower, upper);
      best_residual = std::min(best_residual, residual);
      if (residual <= settings_.tolerance) {
        converged = true;
        break;
      }
    }
    if (converged) break;
    best_residual = std::min(best_residual, residual);

    if (best_value < round_start_value || best_residual < round_start_residual) {
      stalled = 0;
    } else if (++stalled >= kStallRounds) {
      break;
    }
  }

  // A certified stationary point wins over a marginally lower value that was
  // never certified.
  if (converged) best = z;
  accurate_gradient(hessian, eps_, linear, best, grad);
  out.kkt_residual = projected_residual(best, grad, lower, upper);
  out.converged = out.kkt_residual <= settings_.tolerance;
  out.iterations = iterations;
  out.objective = accurate_objective(qp, best);
  out.z = std::move(best);
  return out;
}

QpSolution solve_box_qp(const BoxQp& qp, double tol, int max_iter) {
  qp.check();
  if (!(tol > 0.0)) throw std::invalid_argument("solve_box_qp: tolerance must be positive");
  QpSettings settings;
  settings.tolerance = tol;
  settings.max_iterations = max_iter;
  BoxQpSolver solver(settings);
  return solver.solve(qp);
}

Condenser::Condenser(const AffineModel& aff, const Mat6& state_weight, int horizon)
    : horizon_(horizon), thrusters_(aff.thruster_count()), weight_(state_weight) {
  if (horizon < 1) throw std::invalid_argument("Condenser: horizon must be at least 1");
  if (Eigen::LLT<Mat6>(state_weight).info() != Eigen::Success) {
    throw std::invalid_argument("Condenser: state weight Q is not positive definite");
  }
  const Index m = thrusters_;
  prediction_.resize(6, horizon * m);
  drift_.setZero();
  Mat6 power = Mat6::Identity();  // phi^(N-1-n), filled from the last step backwards
  for (int n = horizon - 1; n >= 0; --n) {
    prediction_.middleCols(n * m, m) = power * aff.gamma;
    drift_ += power * aff.d;
    power = aff.phi * power;
  }
  phi_power_ = power;
  hessian_ = 2.0 * prediction_.transpose() * weight_ * prediction_;
  hessian_ = 0.5 * (hessian_ + hessian_.transpose()).eval();
}

Vec6 Condenser::free_terminal_state(const LvlhState& x0) const {
  return phi_power_ * x0.vector() + drift_;
}

BoxQp Condenser::build(const LvlhState& x0, const VectorXd& lower, const VectorXd& upper) const {
  if (lower.size() != size() || upper.size() != size()) {
    throw std::invalid_argument("Condenser::build: bound vectors have the wrong length");
  }
  const Vec6 q = free_terminal_state(x0);
  BoxQp qp;
  qp.hessian = hessian_;
  qp.linear = 2.0 * prediction_.transpose() * (weight_ * q) + VectorXd::Ones(size());
  qp.constant = q.dot(weight_ * q);
  qp.lower = lower;
  qp.upper = upper;
  return qp;
}

BoxQp condense(const AffineModel& aff, const LvlhState& x0, const Mat6& state_weight, int horizon,
               const std::vector<std::vector<PulseBounds>>& bounds_per_step) {
  const int m = aff.thruster_count();
  if (static_cast<int>(bounds_per_step.size()) != horizon) {
    throw std::invalid_argument("condense: expected one bounds entry per horizon step");
  }
  VectorXd lower(horizon * m), upper(horizon * m);
  for (int n = 0; n < horizon; ++n) {
    if (static_cast<int>(bounds_per_step[n].size()) != m) {
      throw std::invalid_argument("condense: expected one bound pair per thruster");
    }
    for (int i = 0; i < m; ++i) {
      lower[n * m + i] = bounds_per_step[n][i].low;
      upper[n * m + i] = bounds_per_step[n][i].high;
    }
  }
  return Condenser(aff, state_weight, horizon).build(x0, lower, upper);
}

}  // namespace dbmpc
