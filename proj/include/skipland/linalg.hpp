/*
 * Copyright 2026 The skipland Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace skipland {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultRankTol = 1e-12;

/// Moore-Penrose pseudoinverse through the SVD. Singular values below
/// rank_tol * (largest singular value) are treated as zero.
Mat pinv(const Mat& w, double rank_tol = kDefaultRankTol);

/// Number of singular values above rel_tol * (largest singular value).
/// A zero matrix has rank 0.
Index numerical_rank(const Mat& w, double rel_tol = kDefaultRankTol);

Vec singular_values(const Mat& w);

/// Largest singular value.
double op_norm(const Mat& w);

/// Directed angle in [0, pi]. Throws InvalidInput on a zero vector.
double angle(const Vec& u, const Vec& v);

Vec relu(const Vec& v);
Mat relu_mat(const Mat& m);

/// Entrywise absolute sum.
double l1_norm(const Mat& m);

/// sign(x) with sign(0) = 0.
double sign0(double x);
Mat sign_mat(const Mat& m);

bool all_finite(const Mat& m);
void require_finite(const Mat& m, std::string_view what);

}  // namespace skipland
