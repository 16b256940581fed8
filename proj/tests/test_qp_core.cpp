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


#include <gtest/gtest.h>

#include <random>

#include "dbmpc/orbital_dynamics.hpp"
#include "dbmpc/qp_core.hpp"
#include "oracles.hpp"

namespace dbmpc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

BoxQp uniform_box(const MatrixXd& h, const VectorXd& g, double lo, double hi) {
  BoxQp qp;
  qp.hessian = h;
  qp.linear = g;
  qp.lower = VectorXd::Constant(g.size(), lo);
  qp.upper = VectorXd::Constant(g.size(), hi);
  return qp;
}

// PSD of random rank, random bounds; roughly the shape of a condensed MPC
// problem when the rank is low.
BoxQp random_qp(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> rank_dist(1, n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int rank = rank_dist(rng);
  MatrixXd f(rank, n);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = normal(rng);
  BoxQp qp;
  qp.hessian = f.transpose() * f;
  qp.hessian = 0.5 * (qp.hessian + qp.hessian.transpose()).eval();
  qp.linear.resize(n);
  qp.lower.resize(n);
  qp.upper.resize(n);
  for (int i = 0; i < n; ++i) {
    qp.linear[i] = 3.0 * normal(rng);
    qp.lower[i] = -2.0 * unit(rng);
    qp.upper[i] = qp.lower[i] + 3.0 * unit(rng);
  }
  qp.constant = normal(rng);
  return qp;
}

void expect_inside(const BoxQp& qp, const VectorXd& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    EXPECT_GE(z[i], qp.lower[i]);
    EXPECT_LE(z[i], qp.upper[i]);
  }
}

TEST(BoxQp, InteriorBowl) {
  const BoxQp qp = uniform_box(2.0 * MatrixXd::Identity(4, 4), -2.0 * VectorXd::Constant(4, 3.0),
                               0.0, 10.0);
  const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
  ASSERT_TRUE(sol.converged);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(sol.z[i], 3.0, 1e-7);
  EXPECT_NEAR(sol.objective, -36.0, 1e-6);
}

TEST(BoxQp, ClippedAtUpperBound) {
  const BoxQp qp = uniform_box(2.0 * MatrixXd::Identity(4, 4), -2.0 * VectorXd::Constant(4, 15.0),
                               0.0, 10.0);
  const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
  ASSERT_TRUE(sol.converged);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(sol.z[i], 10.0);
}

TEST(BoxQp, ZeroHessianGoesToLowerBound) {
  BoxQp qp = uniform_box(MatrixXd::Zero(6, 6), VectorXd::Ones(6), 0.0, 10.0);
  qp.lower << 0.0, 1.0, 2.0, 0.5, 0.0, 3.0;
  const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
  ASSERT_TRUE(sol.converged);
  EXPECT_EQ(sol.z, qp.lower);
}

TEST(BoxQp, RejectsMalformedProblems) {
  BoxQp qp = uniform_box(MatrixXd::Identity(3, 3), VectorXd::Zero(3), 0.0, 1.0);
  qp.check();
  BoxQp asym = qp;
  asym.hessian(0, 1) = 1.0;
  EXPECT_THROW(asym.check(), std::invalid_argument);
  BoxQp crossed = qp;
  crossed.lower[2] = 2.0;
  EXPECT_THROW(crossed.check(), std::invalid_argument);
  BoxQp shape = qp;
  shape.linear.resize(2);
  EXPECT_THROW(shape.check(), std::invalid_argument);
}

TEST(BoxQp, MatchesEnumerationAtEightVariables) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const BoxQp qp = random_qp(rng, 8);
    const auto truth =
        oracle::enumerate_box_qp(qp.hessian, qp.linear, qp.constant, qp.lower, qp.upper);
    const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
    EXPECT_TRUE(sol.converged);
    EXPECT_NEAR(sol.objective, truth.objective, 1e-6) << "instance " << k;
  }
}

TEST(BoxQp, MatchesEnumerationOnRandomInstances) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> size(1, 10);
  for (int k = 0; k < 60; ++k) {
    const BoxQp qp = random_qp(rng, size(rng));
    const auto truth =
        oracle::enumerate_box_qp(qp.hessian, qp.linear, qp.constant, qp.lower, qp.upper);
    const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
    EXPECT_TRUE(sol.converged) << "instance " << k;
    EXPECT_LE(sol.kkt_residual, 1e-8);
    EXPECT_LE(std::abs(sol.objective - truth.objective), 1e-5 * (1.0 + std::abs(truth.objective)))
        << "instance " << k;
    expect_inside(qp, sol.z);
  }
}

TEST(BoxQp, ArgminIgnoresPositiveScaling) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const BoxQp qp = random_qp(rng, 9);
    BoxQp scaled = qp;
    scaled.hessian *= 37.5;
    scaled.linear *= 37.5;
    scaled.constant *= 37.5;
    const QpSolution a = solve_box_qp(qp, 1e-10, 20000);
    const QpSolution b = solve_box_qp(scaled, 1e-10, 20000);
    // Rank-deficient problems have a face of minimizers; compare values
    // there and points only when the optimum is unique.
    EXPECT_NEAR(37.5 * a.objective, b.objective, 1e-6 * (1.0 + std::abs(b.objective)));
    const Eigen::LLT<MatrixXd> llt(qp.hessian);
    if (llt.info() == Eigen::Success && qp.hessian.eigenvalues().real().minCoeff() > 1e-3) {
      EXPECT_LE((a.z - b.z).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(BoxQp, BestObjectiveNeverIncreases) {
  std::mt19937_64 rng(21);
  QpSettings settings;
  settings.record_history = true;
  BoxQpSolver solver(settings);
  for (int k = 0; k < 20; ++k) {
    const BoxQp qp = random_qp(rng, 12);
    const QpSolution sol = solver.solve(qp);
    ASSERT_FALSE(sol.best_objective_history.empty());
    for (std::size_t i = 1; i < sol.best_objective_history.size(); ++i) {
      EXPECT_LE(sol.best_objective_history[i], sol.best_objective_history[i - 1]);
    }
  }
}

TEST(BoxQp, IteratesStayInsideBoxExactly) {
  std::mt19937_64 rng(3);
  BoxQpSolver solver;
  for (int k = 0; k < 50; ++k) {
    const BoxQp qp = random_qp(rng, 12);
    VectorXd warm = VectorXd::Constant(12, 100.0);
    expect_inside(qp, solver.solve(qp).z);
    expect_inside(qp, solver.solve(qp, &warm).z);
  }
}

TEST(BoxQp, BoundOverrideMatchesRebuiltProblem) {
  std::mt19937_64 rng(9);
  BoxQpSolver solver;
  for (int k = 0; k < 10; ++k) {
    BoxQp qp = random_qp(rng, 7);
    VectorXd lower = qp.lower;
    VectorXd upper = qp.upper;
    lower[0] = upper[0] = 0.5 * (qp.lower[0] + qp.upper[0]);
    const QpSolution a = solver.solve(qp, lower, upper);
    qp.lower = lower;
    qp.upper = upper;
    const QpSolution b = solver.solve(qp);
    EXPECT_EQ(a.z[0], lower[0]);
    EXPECT_NEAR(a.objective, b.objective, 1e-9 * (1.0 + std::abs(b.objective)));
  }
}

TEST(BoxQp, IterationCapReportsNonConvergence) {
  std::mt19937_64 rng(4);
  const BoxQp qp = random_qp(rng, 12);
  const QpSolution sol = solve_box_qp(qp, 1e-300, 3);
  EXPECT_FALSE(sol.converged);
  EXPECT_LE(sol.iterations, 3);
  expect_inside(qp, sol.z);
}

TEST(Lipschitz, PowerIterationFindsLargestEigenvalue) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    const BoxQp qp = random_qp(rng, 10);
    const double largest = qp.hessian.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
    EXPECT_NEAR(estimate_lipschitz(qp.hessian, 500), largest, 1e-6 * largest);
  }
}

// Forward rollout of the predicted states, no condensing.
double rollout_cost(const AffineModel& aff, const LvlhState& x0, const Mat6& q,
                    const VectorXd& z) {
  const int m = aff.thruster_count();
  Vec6 x = x0.vector();
  for (Eigen::Index n = 0; n < z.size() / m; ++n) x = aff.step(x, z.segment(n * m, m));
  return x.dot(q * x) + z.sum();
}

struct CondenseFixture : ::testing::Test {
  ScenarioConfig cfg;
  AffineModel aff = linearize_actuation(CwModel::from_config(cfg), cfg);
};

std::vector<std::vector<PulseBounds>> deadband_free_bounds(int horizon, int thrusters, double h) {
  return std::vector<std::vector<PulseBounds>>(
      static_cast<std::size_t>(horizon),
      std::vector<PulseBounds>(static_cast<std::size_t>(thrusters), PulseBounds{0.0, h}));
}

TEST_F(CondenseFixture, ObjectiveMatchesRollout) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> duration(0.0, cfg.sampling_period);
  std::normal_distribution<double> offset(0.0, 2e4);
  const int horizon = 10;
  Mat6 q = Mat6::Identity();
  q.diagonal() << 1.0, 2.0, 0.5, 100.0, 300.0, 50.0;
  for (int k = 0; k < 20; ++k) {
    Vec6 x;
    for (int i = 0; i < 3; ++i) x[i] = offset(rng);
    for (int i = 3; i < 6; ++i) x[i] = 1e-3 * offset(rng);
    const BoxQp qp = condense(aff, LvlhState(x), q, horizon,
                              deadband_free_bounds(horizon, 6, cfg.sampling_period));
    VectorXd z(qp.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = duration(rng);
    const double expected = rollout_cost(aff, LvlhState(x), q, z);
    EXPECT_NEAR(qp.objective(z), expected, 1e-10 * std::abs(expected));
  }
}

TEST_F(CondenseFixture, BoundsAreCopiedPerStep) {
  std::vector<std::vector<PulseBounds>> bounds = deadband_free_bounds(3, 6, 10.0);
  bounds[1][4] = {5.0, 7.0};
  const BoxQp qp = condense(aff, cfg.initial_state, Mat6::Identity(), 3, bounds);
  ASSERT_EQ(qp.size(), 18);
  EXPECT_EQ(qp.lower[10], 5.0);
  EXPECT_EQ(qp.upper[10], 7.0);
  EXPECT_EQ(qp.lower[9], 0.0);
  EXPECT_EQ(qp.upper[9], 10.0);
}

TEST_F(CondenseFixture, HessianIsSymmetricPsd) {
  const BoxQp qp = condense(aff, cfg.initial_state, Mat6::Identity(), 10,
                            deadband_free_bounds(10, 6, cfg.sampling_period));
  EXPECT_LE((qp.hessian - qp.hessian.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const VectorXd eig = qp.hessian.selfadjointView<Eigen::Lower>().eigenvalues();
  EXPECT_GE(eig.minCoeff(), -1e-9 * eig.maxCoeff());
}

TEST_F(CondenseFixture, RejectsBadWeights) {
  Mat6 q = Mat6::Identity();
  q(2, 2) = 0.0;
  EXPECT_THROW(Condenser(aff, q, 3), std::invalid_argument);
  EXPECT_THROW(Condenser(aff, Mat6::Identity(), 0), std::invalid_argument);
}

TEST(Condense, ZeroStateWithoutDriftBurnsNothing) {
  ScenarioConfig cfg;
  AffineModel aff = linearize_actuation(CwModel::from_config(cfg), cfg);
  aff.d.setZero();
  const BoxQp qp = condense(aff, LvlhState{}, Mat6::Identity(), 5,
                            deadband_free_bounds(5, 6, cfg.sampling_period));
  const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
  ASSERT_TRUE(sol.converged);
  EXPECT_LE(sol.z.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Condense, NoActuationLeavesPureFuelCost) {
  ScenarioConfig cfg;
  AffineModel aff = linearize_actuation(CwModel::from_config(cfg), cfg);
  aff.gamma.setZero();
  std::vector<std::vector<PulseBounds>> bounds = deadband_free_bounds(1, 6, 10.0);
  bounds[0][2] = {2.0, 10.0};
  const BoxQp qp = condense(aff, cfg.initial_state, Mat6::Identity(), 1, bounds);
  EXPECT_EQ(qp.hessian.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(qp.linear, VectorXd::Ones(6));
  const QpSolution sol = solve_box_qp(qp, 1e-8, 20000);
  EXPECT_EQ(sol.z, qp.lower);
}

}  // namespace
}  // namespace dbmpc
