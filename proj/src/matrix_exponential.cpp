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

#include "dbmpc/matrix_exponential.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "dbmpc/types.hpp"

namespace dbmpc {

namespace {

using Eigen::MatrixXd;

// Pade coefficients b_0..b_m for m = 3, 5, 7, 9, 13.
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Max 1-norm for which the degree-m approximant is accurate to unit roundoff.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t K>
MatrixXd pade_low_order(const MatrixXd& a, const std::array<double, K>& b) {
  const auto n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  MatrixXd odd = b[1] * ident;
  MatrixXd even = b[0] * ident;
  MatrixXd power = ident;
  for (std::size_t j = 2; j < K; j += 2) {
    power = power * a2;
    even += b[j] * power;
    if (j + 1 < K) odd += b[j + 1] * power;
  }
  const MatrixXd u = a * odd;
  return (even - u).partialPivLu().solve(even + u);
}

MatrixXd pade13(const MatrixXd& a) {
  const auto& b = kPade13;
  const auto n = a.rows();
  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
           b[3] * a2 + b[1] * ident);
  const MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                     b[4] * a4 + b[2] * a2 + b[0] * ident;
  return (v - u).partialPivLu().solve(v + u);
}

bool strictly_triangular(const MatrixXd& a) {
  const MatrixXd lower = a.triangularView<Eigen::Lower>();
  const MatrixXd upper = a.triangularView<Eigen::Upper>();
  return (lower.array() == 0.0).all() || (upper.array() == 0.0).all();
}

// Strictly triangular matrices are nilpotent; their series terminates after
// at most n terms and is summed directly.
MatrixXd finite_series(const MatrixXd& a) {
  const auto n = a.rows();
  MatrixXd sum = MatrixXd::Identity(n, n);
  MatrixXd term = sum;
  for (Eigen::Index k = 1; k < n; ++k) {
    term = term * a / static_cast<double>(k);
    if ((term.array() == 0.0).all()) break;
    sum += term;
  }
  return sum;
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exponential: matrix is not square");
  if (a.rows() > 16) throw std::invalid_argument("matrix_exponential: size exceeds 16");
  if (!a.allFinite()) throw NumericError("matrix_exponential: non-finite input");
  if (a.size() == 0) return a;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return MatrixXd::Identity(a.rows(), a.cols());
  if (strictly_triangular(a)) {
    MatrixXd result = finite_series(a);
    if (!result.allFinite()) throw NumericError("matrix_exponential: non-finite result");
    return result;
  }
  if (norm1 <= kTheta3) return pade_low_order(a, kPade3);
  if (norm1 <= kTheta5) return pade_low_order(a, kPade5);
  if (norm1 <= kTheta7) return pade_low_order(a, kPade7);
  if (norm1 <= kTheta9) return pade_low_order(a, kPade9);

  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  MatrixXd result = pade13(a * std::ldexp(1.0, -squarings));
  for (int k = 0; k < squarings; ++k) {
    result = result * result;
    if (!result.allFinite()) throw NumericError("matrix_exponential: overflow while squaring");
  }
  if (!result.allFinite()) throw NumericError("matrix_exponential: non-finite result");
  return result;
}

}  // namespace dbmpc
