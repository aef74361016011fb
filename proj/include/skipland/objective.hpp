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

#include <array>
#include <string>
#include <vector>

#include "skipland/dataset.hpp"
#include "skipland/loss.hpp"
#include "skipland/models.hpp"

namespace skipland {

/// The four group quantities of the skip-network regulariser:
///   [0] sum_i ||w2_i||_1 ||w1_i||_2     (w2_i: column i of W2, w1_i: row i of W1)
///   [1] sum_i ||v2_i||_1 ||w1_i||_2
///   [2] ||W2 V1||_1                     (entrywise)
///   [3] sum_k ||theta_k||_F
std::array<double, 4> group_norms(const SkipNetParams& p);

/// R(xi): the sum of group_norms().
double regularizer(const SkipNetParams& p);

/// Mean loss over the dataset, no regulariser.
double objective_unregularized(const TwoLayerParams& p, const Dataset& d, const LossConfig& cfg);
double objective_unregularized(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg);
double objective_unregularized(const LinearSkipParams& p, const Dataset& d, const LossConfig& cfg);

/// F = mean loss + kappa * R.
///   skip:       R as above.
///   two-layer:  R = ||W2||_1 (rows of W1 are taken to be unit norm).
///   linear:     no regulariser; kappa is ignored.
double objective(const TwoLayerParams& p, const Dataset& d, const LossConfig& cfg);
double objective(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg);
double objective(const LinearSkipParams& p, const Dataset& d, const LossConfig& cfg);

/// Hand-derived gradient of objective() with sigma'(0) = 0 and sign(0) = 0 at
/// L1 kinks. The result has the parameter type's shape.
TwoLayerParams grad(const TwoLayerParams& p, const Dataset& d, const LossConfig& cfg);
SkipNetParams grad(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg);
LinearSkipParams grad(const LinearSkipParams& p, const Dataset& d, const LossConfig& cfg);

/// Empirical Lipschitz constant of g over the given inputs (columns of Z):
/// maximal ratio ||g(a) - g(b)|| / ||a - b|| over consecutive pairs and
/// against the origin (g(0) = 0).
double inner_lipschitz_estimate(const InnerNetParams& g, const Mat& Z);

/// t * d/dt F(block scaled by t) at t = 1 for every parameter block, by
/// central differences. Zero at a stationary point.
std::vector<double> radial_residuals(const SkipNetParams& p, const Dataset& d,
                                     const LossConfig& cfg);

struct AssumptionReport {
  std::array<double, 4> group_norms{};
  double C_bound = 0.0;
  double grad_norm = 0.0;
  double g_lipschitz_G0 = 0.0;
  bool stationary = false;
  double objective = 0.0;
  std::vector<std::string> block_names;
  std::vector<double> radial;
  double max_radial_residual = 0.0;
};

AssumptionReport check_assumptions(const SkipNetParams& p, const Dataset& d,
                                   const LossConfig& cfg, double grad_tol);

}  // namespace skipland
