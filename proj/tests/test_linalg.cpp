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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "skipland/errors.hpp"
#include "skipland/linalg.hpp"
#include "test_support.hpp"

using namespace skipland;
using skipland::testing::random_mat;

namespace {

// W = U diag(s) V^T with singular values log-uniform in [1/cond, 1].
Mat conditioned(std::mt19937_64& rng, Index r, Index c, double cond) {
  const Index k = std::min(r, c);
  Eigen::HouseholderQR<Mat> qu(random_mat(rng, r, r));
  Eigen::HouseholderQR<Mat> qv(random_mat(rng, c, c));
  const Mat U = qu.householderQ();
  const Mat V = qv.householderQ();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat S = Mat::Zero(r, c);
  for (Index i = 0; i < k; ++i) S(i, i) = std::pow(cond, -(i == 0 ? 0.0 : (i == k - 1 ? 1.0 : u(rng))));
  return U * S * V.transpose();
}

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST(Pinv, IdentityIsItsOwnInverse) {
  EXPECT_LT((pinv(Mat::Identity(3, 3)) - Mat::Identity(3, 3)).norm(), 1e-15);
}

TEST(Pinv, RectangularDiagonal) {
  Mat w(2, 3);
  w << 1, 0, 0, 0, 2, 0;
  Mat expected(3, 2);
  expected << 1, 0, 0, 0.5, 0, 0;
  EXPECT_LT((pinv(w) - expected).norm(), 1e-15);
}

TEST(Pinv, WideFullRowRankGivesRightInverse) {
  std::mt19937_64 rng(7);
  const Mat w = random_mat(rng, 2, 5);
  EXPECT_LT((w * pinv(w) - Mat::Identity(2, 2)).norm(), 1e-10);
}

TEST(Pinv, ThresholdDropsTinySingularValues) {
  Mat w = Mat::Zero(2, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1e-14;
  const Mat p = pinv(w);
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(1, 1), 0.0);
  EXPECT_EQ(numerical_rank(w), 1);
}

TEST(Pinv, ZeroMatrixHasZeroInverse) {
  EXPECT_EQ(pinv(Mat::Zero(2, 4)).norm(), 0.0);
  EXPECT_EQ(numerical_rank(Mat::Zero(2, 4)), 0);
}

TEST(Pinv, RejectsNonFinite) {
  Mat w = Mat::Identity(2, 2);
  w(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(pinv(w), InvalidInput);
}

TEST(Pinv, PenroseIdentitiesOnConditionedMatrices) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> logc(0.0, 6.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index r = dim(rng);
    const Index c = r + dim(rng) - 1;  // full row rank: r <= c
    const Mat w = conditioned(rng, r, c, std::pow(10.0, logc(rng)));
    const Mat p = pinv(w);
    EXPECT_LE((w * p - Mat::Identity(r, r)).norm(), 1e-8) << "trial " << trial;
    EXPECT_LE(rel(w * p * w, w), 1e-8);
    EXPECT_LE((p * w * p - p).norm() / p.norm(), 1e-8);
    EXPECT_LE(rel((w * p).transpose(), w * p), 1e-8);
    EXPECT_LE(rel((p * w).transpose(), p * w), 1e-8);
  }
}

TEST(Angle, BasicCases) {
  const Vec e1 = Vec::Unit(2, 0);
  const Vec e2 = Vec::Unit(2, 1);
  EXPECT_EQ(angle(e1, e1), 0.0);
  EXPECT_NEAR(angle(e1, e2), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(angle(e1, Vec(Eigen::Vector2d(1, 1) / std::sqrt(2.0))), std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(angle(e1, -e1), std::numbers::pi, 1e-15);
}

TEST(Angle, ZeroVectorThrows) {
  EXPECT_THROW(angle(Vec::Zero(3), Vec::Ones(3)), InvalidInput);
}

TEST(Angle, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    const Vec u = skipland::testing::random_vec(rng, 4);
    const Vec v = skipland::testing::random_vec(rng, 4);
    const double a = angle(u, v);
    EXPECT_EQ(a, angle(v, u));
    EXPECT_NEAR(angle(pos(rng) * u, pos(rng) * v), a, 1e-12);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, std::numbers::pi);
  }
}

TEST(Relu, Entrywise) {
  EXPECT_EQ(relu(Eigen::Vector3d(-1, 2, 0)), Vec(Eigen::Vector3d(0, 2, 0)));
  EXPECT_EQ(relu(Vec::Constant(4, -3.0)), Vec::Zero(4));
  EXPECT_EQ(relu(Vec(3.0 * Eigen::Vector2d(1, -1))), Vec(Eigen::Vector2d(3, 0)));
}

TEST(Relu, PositiveHomogeneityIsExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> t(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const Mat m = random_mat(rng, 3, 4);
    const double s = t(rng);
    EXPECT_EQ(relu_mat(s * m), s * relu_mat(m));
  }
}
