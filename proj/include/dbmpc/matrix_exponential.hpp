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

#include <Eigen/Dense>

namespace dbmpc {

// exp(a) by scaling and squaring with a diagonal Pade approximant of degree
// 3, 5, 7, 9 or 13 (Higham's 2005 selection thresholds). Intended for the
// small dense matrices used here (n <= 16). Strictly triangular input is
// nilpotent and takes the finite series instead, which is exact.
//
// Throws std::invalid_argument for non-square or n > 16 input and
// NumericError if the input is non-finite or squaring overflows.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

}  // namespace dbmpc
