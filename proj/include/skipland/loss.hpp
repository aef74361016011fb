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

#include <string>

#include "skipland/linalg.hpp"

namespace skipland {

enum class LossKind { mse, huber };

/// Per-sample loss L(f, y) together with the regularisation weight kappa.
///   mse:   ||f - y||^2
///   huber: sum_j h(f_j - y_j), h(r) = r^2 for |r| <= delta, 2 delta |r| - delta^2 beyond.
/// Both are convex in f and locally Lipschitz.
struct LossConfig {
  LossKind kind = LossKind::mse;
  double huber_delta = 1.0;
  double kappa = 0.0;
  /// Cached local Lipschitz constant of L for reporting; see lipschitz_bound().
  double lipschitz_L0 = 0.0;

  void validate() const;
};

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

double sample_loss(const Vec& f, const Vec& y, const LossConfig& cfg);

/// Mean of L over the columns of F and Y, summed in column order.
double mean_loss(const Mat& F, const Mat& Y, const LossConfig& cfg);

/// dL/df for every column (not divided by the sample count).
Mat loss_output_grad(const Mat& F, const Mat& Y, const LossConfig& cfg);

/// Lipschitz constant of L(., y) on {||f|| <= output_radius} for ||y|| <= target_radius.
double lipschitz_bound(const LossConfig& cfg, double output_radius, double target_radius,
                       Index output_dim);

}  // namespace skipland
