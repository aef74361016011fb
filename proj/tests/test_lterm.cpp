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

#include <random>

#include <gtest/gtest.h>

#include "skipland/errors.hpp"
#include "skipland/lterm.hpp"
#include "skipland/objective.hpp"
#include "test_support.hpp"

using namespace skipland;
using namespace skipland::testing;

namespace {

Mat ball_inputs(std::mt19937_64& rng, Index n, Index count) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat x = random_mat(rng, n, count);
  for (Index j = 0; j < count; ++j) x.col(j) *= std::cbrt(u(rng)) / x.col(j).norm();
  return x;
}

Dataset single_unit_dataset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Mat X = ball_inputs(rng, 3, 400);
  const Vec a = Vec(Eigen::Vector3d(0.6, -0.48, 0.64)).normalized();
  const Mat Y = (a.transpose() * X).cwiseMax(0.0);
  return Dataset(X, Y);
}

Dataset teacher_dataset(std::uint64_t seed, Index width) {
  std::mt19937_64 rng(seed);
  const Mat X = ball_inputs(rng, 3, 500);
  TwoLayerParams t{random_mat(rng, width, 3), random_mat(rng, 1, width)};
  t.W1.rowwise().normalize();
  return Dataset(X, forward_two_layer(t, X));
}

}  // namespace

TEST(LTerm, RealizableSingleUnit) {
  const Dataset d = single_unit_dataset(1);
  const auto s = solve_lterm(d, LossConfig{}, 1, 500, 2, 7);
  EXPECT_LE(s.e_l, 1e-6);
  EXPECT_EQ(s.l, 1);
  EXPECT_NEAR(s.W1_star.row(0).norm(), 1.0, 1e-12);
}

TEST(LTerm, ZeroWidthIsZeroPredictor) {
  const Dataset d = single_unit_dataset(2);
  const auto s = solve_lterm(d, LossConfig{}, 0, 100, 2, 7);
  EXPECT_EQ(s.l, 0);
  EXPECT_EQ(s.W2_star.cols(), 0);
  EXPECT_DOUBLE_EQ(s.e_l, mean_loss(Mat::Zero(1, d.size()), d.targets(), LossConfig{}));
}

TEST(LTerm, ChainIsNonIncreasingAndFeasible) {
  const Dataset d = teacher_dataset(3, 6);
  LossConfig cfg;
  cfg.kappa = 1e-3;
  const auto chain = solve_lterm_chain(d, cfg, 8, 60, 2, 11);
  ASSERT_EQ(chain.size(), 9u);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto& s = chain[k];
    EXPECT_EQ(s.l, static_cast<Index>(k));
    EXPECT_EQ(s.W1_star.rows(), s.l);
    EXPECT_EQ(s.W2_star.cols(), s.l);
    for (Index i = 0; i < s.l; ++i) EXPECT_NEAR(s.W1_star.row(i).norm(), 1.0, 1e-12);
    EXPECT_NEAR(s.e_l, objective(s.params(), d, cfg), 1e-12);
    if (k > 0) EXPECT_LE(s.e_l, chain[k - 1].e_l + 1e-12);
  }
  EXPECT_LT(chain.back().e_l, chain.front().e_l);
}

TEST(LTerm, SeparateSolvesAgreeWithChain) {
  const Dataset d = teacher_dataset(4, 4);
  const LossConfig cfg;
  const auto chain = solve_lterm_chain(d, cfg, 4, 40, 2, 5);
  const auto two = solve_lterm(d, cfg, 2, 40, 2, 5);
  const auto four = solve_lterm(d, cfg, 4, 40, 2, 5);
  EXPECT_EQ(two.e_l, chain[2].e_l);
  EXPECT_EQ(four.e_l, chain[4].e_l);
  EXPECT_LE(four.e_l, two.e_l + 1e-8);
}

TEST(LTerm, L1PenaltyGivesSparseColumns) {
  const Dataset d = single_unit_dataset(5);
  LossConfig cfg;
  cfg.kappa = 10.0;
  const auto s = solve_lterm(d, cfg, 3, 50, 1, 3);
  EXPECT_EQ(s.W2_star.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LTerm, HuberRealizable) {
  const Dataset d = single_unit_dataset(6);
  LossConfig cfg;
  cfg.kind = LossKind::huber;
  cfg.huber_delta = 0.1;
  EXPECT_LE(solve_lterm(d, cfg, 1, 500, 2, 7).e_l, 1e-6);
}

TEST(LTerm, Deterministic) {
  const Dataset d = teacher_dataset(7, 3);
  const auto a = solve_lterm(d, LossConfig{}, 3, 30, 2, 99);
  const auto b = solve_lterm(d, LossConfig{}, 3, 30, 2, 99);
  EXPECT_EQ(a.e_l, b.e_l);
  EXPECT_EQ(a.W1_star, b.W1_star);
  EXPECT_EQ(a.W2_star, b.W2_star);
}

TEST(LTerm, BadArgumentsRejected) {
  const Dataset d = single_unit_dataset(8);
  EXPECT_THROW(solve_lterm(d, LossConfig{}, -1, 10, 1, 0), InvalidInput);
  EXPECT_THROW(solve_lterm(d, LossConfig{}, 1, 10, 0, 0), InvalidInput);
}
