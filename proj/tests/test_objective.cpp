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
#include "skipland/objective.hpp"
#include "test_support.hpp"

using namespace skipland;
using namespace skipland::testing;

namespace {

LossConfig mse(double kappa) {
  LossConfig c;
  c.kappa = kappa;
  return c;
}

LossConfig huber(double kappa, double delta) {
  LossConfig c;
  c.kind = LossKind::huber;
  c.huber_delta = delta;
  c.kappa = kappa;
  return c;
}

}  // namespace

TEST(Regularizer, ZeroParams) {
  std::mt19937_64 rng(1);
  auto p = zeros_like(random_skip(rng, 3, 5, 1, 4, 4));
  EXPECT_EQ(regularizer(p), 0.0);
}

TEST(Regularizer, SingleUnitColumn) {
  std::mt19937_64 rng(2);
  auto p = zeros_like(random_skip(rng, 3, 4, 2, 4, 4));
  p.W1 = random_mat(rng, 4, 3);
  p.W1.rowwise().normalize();
  p.W2(0, 0) = 1.0;
  EXPECT_NEAR(regularizer(p), 1.0, 1e-15);
}

TEST(Regularizer, MatchesScalarOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_skip(rng, 3, 12, 2, 4, 3, {5, 5});
    EXPECT_NEAR(regularizer(p), naive_regularizer(p), 1e-12 * naive_regularizer(p));
  }
}

TEST(Regularizer, OneHomogeneousInW2) {
  std::mt19937_64 rng(4);
  const auto p = random_skip(rng, 3, 12, 2, 4, 3);
  const double t = 2.75;
  auto q = p;
  q.W2 *= t;
  const auto gp = group_norms(p);
  const auto gq = group_norms(q);
  EXPECT_NEAR(gq[0], t * gp[0], 1e-12 * gq[0]);
  EXPECT_NEAR(gq[2], t * gp[2], 1e-12 * gq[2]);
  EXPECT_EQ(gq[1], gp[1]);
  EXPECT_EQ(gq[3], gp[3]);
}

TEST(Objective, PerfectFitIsZero) {
  std::mt19937_64 rng(5);
  const auto p = random_skip(rng, 3, 6, 1, 4, 4);
  const Mat X = random_mat(rng, 3, 30);
  const Dataset d(X, forward_skip(p, X));
  EXPECT_NEAR(objective(p, d, mse(0.0)), 0.0, 1e-25);
  const TwoLayerParams q{p.W1, p.W2};
  const Dataset d2(X, forward_two_layer(q, X));
  EXPECT_NEAR(objective(q, d2, mse(0.0)), 0.0, 1e-25);
}

TEST(Objective, ZeroNetworkGivesMeanSquaredTarget) {
  std::mt19937_64 rng(6);
  const Dataset d = random_dataset(rng, 3, 2, 40);
  const auto p = zeros_like(random_skip(rng, 3, 6, 2, 4, 4));
  double want = 0.0;
  for (Index i = 0; i < d.size(); ++i) want += d.y(i).squaredNorm();
  want /= static_cast<double>(d.size());
  EXPECT_NEAR(objective(p, d, mse(0.3)), want, 1e-14);
}

TEST(Objective, RegularizedMinusPlainIsKappaR) {
  std::mt19937_64 rng(7);
  const Dataset d = random_dataset(rng, 3, 1, 25);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_skip(rng, 3, 8, 1, 4, 4);
    const double k = 0.17;
    EXPECT_NEAR(objective(p, d, mse(k)) - objective_unregularized(p, d, mse(k)),
                k * regularizer(p), 1e-12);
  }
}

TEST(Objective, DimensionMismatchThrows) {
  std::mt19937_64 rng(8);
  const Dataset d = random_dataset(rng, 4, 1, 10);
  EXPECT_THROW(objective(random_skip(rng, 3, 5, 1, 4, 4), d, mse(0.0)), InvalidInput);
}

TEST(Objective, ConvexInW2ForFixedRest) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Dataset d = random_dataset(rng, 3, 2, 30);
  for (const auto& cfg : {mse(0.2), huber(0.2, 0.5)}) {
    for (int i = 0; i < 200; ++i) {
      const auto base = random_skip(rng, 3, 7, 2, 4, 4);
      auto a = base, b = base, mid = base;
      a.W2 = random_mat(rng, 2, 7);
      b.W2 = random_mat(rng, 2, 7);
      const double t = u(rng);
      mid.W2 = (1 - t) * a.W2 + t * b.W2;
      const double lhs = objective(mid, d, cfg);
      const double rhs = (1 - t) * objective(a, d, cfg) + t * objective(b, d, cfg);
      EXPECT_LE(lhs, rhs + 1e-10);
    }
  }
}

TEST(Gradient, SkipMatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (const auto& cfg : {mse(0.0), mse(0.05), huber(0.05, 0.7)}) {
    for (int i = 0; i < 20; ++i) {
      const Dataset d = random_dataset(rng, 3, 2, 12);
      const auto p = random_skip(rng, 3, 6, 2, 3, 3, {4});
      const auto fd = finite_difference_grad(p, [&](const SkipNetParams& q) { return objective(q, d, cfg); });
      EXPECT_LE(relative_error(grad(p, d, cfg), fd), 1e-5);
    }
  }
}

TEST(Gradient, TwoLayerMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  for (const auto& cfg : {mse(0.0), mse(0.1), huber(0.1, 0.5)}) {
    for (int i = 0; i < 20; ++i) {
      const Dataset d = random_dataset(rng, 3, 2, 12);
      const TwoLayerParams p{random_mat(rng, 6, 3), random_mat(rng, 2, 6)};
      const auto fd = finite_difference_grad(p, [&](const TwoLayerParams& q) { return objective(q, d, cfg); });
      EXPECT_LE(relative_error(grad(p, d, cfg), fd), 1e-5);
    }
  }
}

TEST(Gradient, LinearSkipMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  for (const auto& cfg : {mse(0.0), huber(0.0, 0.5)}) {
    for (int i = 0; i < 20; ++i) {
      const Dataset d = random_dataset(rng, 4, 2, 12);
      const LinearSkipParams p{random_mat(rng, 2, 4), random_mat(rng, 4, 3), random_inner(rng, {4, 5, 3})};
      const auto fd = finite_difference_grad(p, [&](const LinearSkipParams& q) { return objective(q, d, cfg); });
      EXPECT_LE(relative_error(grad(p, d, cfg), fd), 1e-5);
    }
  }
}

TEST(Gradient, ZeroOutputLayerAtZeroTargetsHasZeroW2Gradient) {
  std::mt19937_64 rng(13);
  const Mat X = random_mat(rng, 3, 20);
  const Dataset d(X, Mat::Zero(1, 20));
  auto p = random_skip(rng, 3, 6, 1, 4, 4);
  p.W2.setZero();
  p.V1.setZero();
  const auto g = grad(p, d, mse(0.0));
  EXPECT_EQ(g.W2.norm(), 0.0);
}

TEST(Gradient, HomogeneousReparameterizationIsFlat) {
  std::mt19937_64 rng(14);
  const Dataset d = random_dataset(rng, 3, 1, 30);
  const TwoLayerParams p{random_mat(rng, 5, 3), random_mat(rng, 1, 5)};
  const auto g = grad(p, d, mse(0.0));
  // d/dt at t = 1 of (W1 row i * t, W2 col i / t).
  for (Index i = 0; i < 5; ++i) {
    const double dir = g.W1.row(i).dot(p.W1.row(i)) - g.W2.col(i).dot(p.W2.col(i));
    EXPECT_NEAR(dir, 0.0, 1e-12);
  }
}

TEST(Assumption, ZeroParamsHaveZeroGroupNorms) {
  std::mt19937_64 rng(15);
  const Mat X = random_mat(rng, 3, 20);
  auto p = zeros_like(random_skip(rng, 3, 6, 1, 4, 4));
  const Dataset zero_y(X, Mat::Zero(1, 20));
  const auto rep = check_assumptions(p, zero_y, mse(0.1), 1e-9);
  for (double g : rep.group_norms) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(rep.C_bound, 0.0);
  EXPECT_TRUE(rep.stationary);
  const Dataset some_y(X, random_mat(rng, 1, 20));
  EXPECT_TRUE(check_assumptions(p, some_y, mse(0.1), 1e-9).stationary);  // all units dead at 0
  EXPECT_THROW(check_assumptions(p, some_y, mse(0.1), 0.0), InvalidInput);
}

TEST(Assumption, ReportIsConsistent) {
  std::mt19937_64 rng(16);
  const Dataset d = random_dataset(rng, 3, 1, 40);
  const auto p = random_skip(rng, 3, 8, 1, 4, 4, {8, 8});
  const auto rep = check_assumptions(p, d, mse(0.1), 1e-6);
  for (double g : rep.group_norms) EXPECT_LE(g, rep.C_bound);
  EXPECT_GT(rep.g_lipschitz_G0, 0.0);
  EXPECT_EQ(rep.radial.size(), blocks(p).size());
  // Radial derivative along W2 equals <grad_W2 F, W2> for a smooth point.
  const auto g = grad(p, d, mse(0.1));
  EXPECT_NEAR(rep.radial[1], g.W2.cwiseProduct(p.W2).sum(), 1e-6);
}
