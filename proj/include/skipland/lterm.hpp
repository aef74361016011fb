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
#include <vector>

#include "skipland/dataset.hpp"
#include "skipland/loss.hpp"
#include "skipland/models.hpp"

namespace skipland {

/// An l-unit two-layer network with unit W1 rows. e_l is the objective
/// mean L(W2 relu(W1 x), y) + kappa ||W2||_1 it achieves, an upper bound on
/// the infimum over all such networks.
struct LTermSolution {
  Mat W1_star;  // l x n, unit rows
  Mat W2_star;  // d_y x l
  double e_l = 0.0;
  Index l = 0;

  TwoLayerParams params() const { return {W1_star, W2_star}; }
};

/// Solutions for every width 0..l from one set of nested greedy runs.
/// Each restart adds one unit at a time with a zero output column, so the
/// previous objective stays feasible, then runs m_solver projected proximal
/// gradient steps (rows renormalised, soft threshold for the L1 term) that
/// are accepted only when they decrease the objective. Entry k is the best
/// restart at width k, hence e_l is non-increasing in k.
std::vector<LTermSolution> solve_lterm_chain(const Dataset& d, const LossConfig& cfg, Index l,
                                             Index m_solver, Index restarts, std::uint64_t seed);

/// The width-l entry of solve_lterm_chain.
LTermSolution solve_lterm(const Dataset& d, const LossConfig& cfg, Index l, Index m_solver,
                          Index restarts, std::uint64_t seed);

}  // namespace skipland
