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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd cw_a(double omega) {
  MatrixXd a = MatrixXd::Zero(6, 6);
  a(0, 3) = 1.0;
  a(1, 4) = 1.0;
  a(2, 5) = 1.0;
  a(3, 5) = 2.0 * omega;
  a(4, 1) = -omega * omega;
  a(5, 2) = 3.0 * omega * omega;
  a(5, 3) = -2.0 * omega;
  return a;
}

MatrixXd cw_b(double mass) {
  MatrixXd b = MatrixXd::Zero(6, 3);
  b.bottomRows(3) = MatrixXd::Identity(3, 3) / mass;
  return b;
}

MatrixXd series_expm(const MatrixXd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.125) ++squarings;
  const MatrixXd scaled = a / std::ldexp(1.0, squarings);
  MatrixXd sum = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd term = sum;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

MatrixXd simpson_grammian(const MatrixXd& a, double s, int panels) {
  if (panels % 2 != 0) ++panels;
  const double dt = s / panels;
  // exp(-a dt) stepped forward keeps the cost at one product per node.
  const MatrixXd step = series_expm(-a * dt);
  MatrixXd node = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd sum = MatrixXd::Zero(a.rows(), a.cols());
  for (int i = 0; i <= panels; ++i) {
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * node;
    node = node * step;
  }
  return sum * dt / 3.0;
}

VectorXd dormand_prince(const Rhs& f, double t0, double t1, VectorXd x, std::vector<double> breaks,
                        double rtol, double atol) {
  // Butcher tableau of Dormand and Prince (1980).
  static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1, 1};
  static const double a[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double b5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                               11.0 / 84, 0};
  static const double b4[7] = {5179.0 / 57600, 0,
                               7571.0 / 16695, 393.0 / 640,
                               -92097.0 / 339200, 187.0 / 2100,
                               1.0 / 40};

  breaks.push_back(t1);
  std::sort(breaks.begin(), breaks.end());
  double t = t0;
  double dt = (t1 - t0) / 100.0;
  std::vector<VectorXd> k(7);
  for (double stop : breaks) {
    if (stop <= t) continue;
    if (stop > t1) break;
    while (t < stop) {
      double h = std::min(dt, stop - t);
      // Never leave a sliver smaller than a rounding error before the break.
      if (stop - (t + h) < 1e-12 * std::max(1.0, std::abs(stop))) h = stop - t;
      for (int i = 0; i < 7; ++i) {
        VectorXd xi = x;
        for (int j = 0; j < i; ++j) xi += h * a[i][j] * k[j];
        k[i] = f(t + c[i] * h, xi);
      }
      VectorXd x5 = x, x4 = x;
      for (int i = 0; i < 7; ++i) {
        x5 += h * b5[i] * k[i];
        x4 += h * b4[i] * k[i];
      }
      double err = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(x[i]), std::abs(x5[i]));
        err = std::max(err, std::abs(x5[i] - x4[i]) / scale);
      }
      if (err <= 1.0) {
        t = (h == stop - t) ? stop : t + h;
        x = x5;
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      dt = h * factor;
    }
  }
  return x;
}

BoxQpOptimum enumerate_box_qp(const MatrixXd& h, const VectorXd& g, double c, const VectorXd& l,
                              const VectorXd& u) {
  const int n = static_cast<int>(g.size());
  if (n > 14) throw std::invalid_argument("enumerate_box_qp: n too large");
  long patterns = 1;
  for (int i = 0; i < n; ++i) patterns *= 3;

  BoxQpOptimum best{VectorXd::Zero(n), std::numeric_limits<double>::infinity()};
  std::vector<int> code(static_cast<std::size_t>(n), 0);
  VectorXd z(n);
  for (long p = 0; p < patterns; ++p) {
    long rest = p;
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      code[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
      rest /= 3;
      if (code[static_cast<std::size_t>(i)] == 0) z[i] = l[i];
      if (code[static_cast<std::size_t>(i)] == 1) z[i] = u[i];
      if (code[static_cast<std::size_t>(i)] == 2) free.push_back(i);
    }
    if (!free.empty()) {
      const int nf = static_cast<int>(free.size());
      MatrixXd hff(nf, nf);
      VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs[a] = -g[free[a]];
        for (int j = 0; j < n; ++j) {
          if (code[static_cast<std::size_t>(j)] != 2) rhs[a] -= h(free[a], j) * z[j];
        }
        for (int b = 0; b < nf; ++b) hff(a, b) = h(free[a], free[b]);
      }
      const VectorXd zf = hff.completeOrthogonalDecomposition().solve(rhs);
      // Rank-deficient faces with no stationary point give a least-squares
      // answer that is not stationary; those candidates are still feasible
      // points, so scoring them never lowers the optimum below the truth.
      bool inside = zf.allFinite();
      for (int a = 0; a < nf && inside; ++a) {
        const int i = free[a];
        if (zf[a] < l[i] - 1e-12 || zf[a] > u[i] + 1e-12) inside = false;
        z[i] = std::clamp(zf[a], l[i], u[i]);
      }
      if (!inside) continue;
    }
    const double value = 0.5 * z.dot(h * z) + g.dot(z) + c;
    if (value < best.objective) best = {z, value};
  }
  return best;
}

double grid_projection(double s, double h_min, double h, long grid_steps) {
  double best = 0.0;
  double best_distance = std::abs(s);
  for (long k = 0; k <= grid_steps; ++k) {
    const double point = h_min + (h - h_min) * static_cast<double>(k) / static_cast<double>(grid_steps);
    const double distance = std::abs(s - point);
    if (distance < best_distance) {
      best_distance = distance;
      best = point;
    }
  }
  return best;
}

}  // namespace oracle
