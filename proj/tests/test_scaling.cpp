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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "skipland/errors.hpp"
#include "skipland/scaling.hpp"

using namespace skipland;

namespace {

std::vector<ScalingRow> rows_from(const std::vector<Index>& ms, const std::vector<std::vector<double>>& ex) {
  std::vector<ScalingRow> rows;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    for (std::size_t s = 0; s < ex[i].size(); ++s) {
      ScalingRow r;
      r.m = ms[i];
      r.seed = static_cast<Index>(s);
      r.excess = ex[i][s];
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace

TEST(ScalingFit, ExactPowerLawRecoversExponent) {
  const std::vector<Index> ms{64, 128, 256, 512, 1024};
  std::vector<std::vector<double>> ex;
  for (Index m : ms) {
    const double v = 0.3 * std::pow(static_cast<double>(m), -1.0 / 6.0);
    ex.push_back({v, v, v});
  }
  const auto fit = fit_scaling(rows_from(ms, ex), 0.5, 3);
  EXPECT_EQ(fit.status, FitStatus::fitted);
  EXPECT_NEAR(fit.slope, -1.0 / 6.0, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(0.3), 1e-12);
  EXPECT_NEAR(fit.target_slope, -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(fit.slope_ci_low, fit.slope, 1e-9);
  EXPECT_NEAR(fit.slope_ci_high, fit.slope, 1e-9);
  EXPECT_TRUE(fit.monotone);
  EXPECT_EQ(fit.active_widths, 5);
}

TEST(ScalingFit, MediansDampOutliers) {
  const auto fit = fit_scaling(rows_from({10, 100, 1000}, {{1.0, 5.0, 0.9}, {0.1, 0.12, 50.0}, {0.01, 0.0, 0.011}}),
                               0.5, 3);
  EXPECT_DOUBLE_EQ(fit.medians[0], 1.0);
  EXPECT_DOUBLE_EQ(fit.medians[1], 0.12);
  EXPECT_DOUBLE_EQ(fit.medians[2], 0.01);
  EXPECT_TRUE(fit.monotone);
  EXPECT_EQ(fit.status, FitStatus::fitted);
  // t quantile with one degree of freedom gives a wide but finite interval.
  EXPECT_LT(fit.slope_ci_low, fit.slope);
  EXPECT_GT(fit.slope_ci_high, fit.slope);
}

TEST(ScalingFit, EvenCountMedianAverages) {
  const auto fit = fit_scaling(rows_from({8, 16, 32}, {{1, 3}, {1, 2}, {0, 1}}), 0.5, 3);
  EXPECT_DOUBLE_EQ(fit.medians[0], 2.0);
  EXPECT_DOUBLE_EQ(fit.medians[1], 1.5);
  EXPECT_DOUBLE_EQ(fit.medians[2], 0.5);
}

TEST(ScalingFit, BoundNeverActive) {
  const auto fit = fit_scaling(rows_from({64, 256, 1024}, {{0, 1e-12, 0}, {0, 0, 1e-10}, {0, 0, 0}}), 0.5, 3);
  EXPECT_EQ(fit.status, FitStatus::never_active);
  EXPECT_EQ(to_string(fit.status), "bound never active");
  EXPECT_TRUE(fit.monotone);
  std::ostringstream s;
  write_scaling_summary(s, fit, 0.5, 3);
  EXPECT_NE(s.str().find("status = bound never active"), std::string::npos);
  EXPECT_EQ(s.str().find("\nslope ="), std::string::npos);
}

TEST(ScalingFit, TwoActiveWidthsAreNotFitted) {
  const auto fit = fit_scaling(rows_from({64, 256, 1024}, {{1e-3, 2e-3, 1e-3}, {1e-4, 1e-4, 0}, {0, 0, 0}}), 0.5, 3);
  EXPECT_EQ(fit.status, FitStatus::insufficient);
  EXPECT_EQ(fit.active_widths, 2);
  EXPECT_TRUE(fit.monotone);
}

TEST(ScalingFit, RoundingNoiseDoesNotBreakMonotonicity) {
  auto fit = fit_scaling(rows_from({64, 256, 1024}, {{1e-4}, {4e-19}, {2e-18}}), 0.5, 3);
  EXPECT_TRUE(fit.monotone);
  fit = fit_scaling(rows_from({64, 256, 1024}, {{1e-4}, {1e-6}, {1e-5}}), 0.5, 3);
  EXPECT_FALSE(fit.monotone);
}

TEST(ScalingCsv, HeaderAndPrecision) {
  ScalingRow r;
  r.m = 64;
  r.seed = 2;
  r.lambda = 0.1;
  r.e_l = 1.0 / 3.0;
  r.max_loss = 0.5;
  r.excess = 0.25;
  r.eps_pred = 0.5;
  std::ostringstream s;
  write_scaling_csv(s, {r});
  EXPECT_EQ(s.str(),
            "m,seed,lambda,e_l,max_loss,excess,eps_pred\n"
            "64,2,0.10000000000000001,0.33333333333333331,0.5,0.25,0.5\n");
}

TEST(Scaling, CellSeedsAreDistinct) {
  EXPECT_NE(cell_seed(1, 64, 0, 0), cell_seed(1, 64, 0, 1));
  EXPECT_NE(cell_seed(1, 64, 0, 0), cell_seed(1, 64, 1, 0));
  EXPECT_NE(cell_seed(1, 64, 0, 0), cell_seed(1, 128, 0, 0));
  EXPECT_NE(cell_seed(1, 64, 0, 0), cell_seed(2, 64, 0, 0));
  EXPECT_EQ(cell_seed(1, 64, 0, 0), cell_seed(1, 64, 0, 0));
}

TEST(Scaling, RequiresThreeWidthsAndSeeds) {
  ExperimentConfig c;
  c.m_list = {8, 16};
  EXPECT_THROW(run_scaling(c), ConfigError);
  c.m_list = {8, 16, 32};
  c.seeds = 2;
  EXPECT_THROW(run_scaling(c), ConfigError);
}

TEST(Scaling, SmallSweepIsDeterministicAndConsistent) {
  ExperimentConfig c;
  c.samples = 200;
  c.m_list = {8, 16, 32};
  c.seeds = 3;
  c.train_steps = 200;
  c.finish_steps = 10;
  c.polish_iterations = 10;
  c.grid = 30;
  c.lterm_iterations = 50;
  c.lterm_restarts = 1;
  const auto a = run_scaling(c);
  c.threads = 3;
  const auto b = run_scaling(c);
  std::ostringstream sa, sb;
  write_scaling_csv(sa, a.rows);
  write_scaling_csv(sb, b.rows);
  EXPECT_EQ(sa.str(), sb.str());
  ASSERT_EQ(a.rows.size(), 9u);
  for (const auto& r : a.rows) {
    EXPECT_GE(r.max_loss, std::max(r.F_a, r.F_b) - 1e-12);
    EXPECT_DOUBLE_EQ(r.excess, std::max(0.0, r.max_loss - std::max(r.lambda, r.e_l)));
    EXPECT_DOUBLE_EQ(r.eps_pred, std::pow(static_cast<double>(r.m), -0.5 / 3.0));
    EXPECT_LE(r.diag.continuity_error, 1e-10);
  }
  // Rows sharing l share the same l-term solution.
  EXPECT_EQ(a.rows[0].e_l, a.rows[1].e_l);
}
