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

#include <cstdint>
#include <string>
#include <vector>

#include "skipland/linalg.hpp"

namespace skipland {

/// Monte-Carlo check of E (relu(w1 . x) - relu(w2 . x))^2 <= 4 ||Sigma_X|| angle^2
/// over random unit pairs at prescribed angles, for inputs drawn uniformly
/// from the unit ball, the unit sphere and the cube [-1, 1]^n / sqrt(n).
struct ReluBoundOptions {
  Index n = 3;
  Index pairs = 100;
  Index samples = 20000;
  std::vector<double> alphas{0.01, 0.0162, 0.0262, 0.0424, 0.0687, 0.111, 0.18, 0.3};
  std::uint64_t seed = 1;
};

struct ReluBoundRow {
  std::string distribution;
  Index pair = 0;
  double alpha = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ReluBoundResult {
  std::vector<ReluBoundRow> rows;
  std::vector<std::string> distributions;
  std::vector<double> slopes;  // pooled log-log slope of lhs against alpha, per distribution
  double max_violation = 0.0;  // max(lhs - rhs), negative when the bound holds everywhere
};

const std::vector<std::string>& relu_bound_distributions();
ReluBoundResult run_relu_bound_check(const ReluBoundOptions& opts);

}  // namespace skipland
