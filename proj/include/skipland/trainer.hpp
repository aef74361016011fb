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
#include <random>
#include <vector>

#include "skipland/dataset.hpp"
#include "skipland/loss.hpp"
#include "skipland/models.hpp"

namespace skipland {

/// Minibatch SGD with gradient-norm clipping, then full-batch gradient descent
/// with backtracking, then BFGS over the log-scales of the parameter blocks
/// until every radial residual is below polish_tolerance * F. A zero learning
/// rate disables all three phases.
struct TrainerSpec {
  Index steps = 2000;
  double learning_rate = 0.1;
  Index batch_size = 64;
  Index finish_steps = 100;
  double clip_norm = 1.0;
  Index polish_iterations = 100;
  double polish_tolerance = 1e-5;
  void validate() const;
};

template <class P>
struct TrainResult {
  P params;
  std::vector<double> loss_trace;  // full objective after each phase checkpoint
};

struct SkipDims {
  Index n = 3;
  Index m = 64;
  Index d_y = 1;
  Index d_g = 4;
  Index d_o = 4;
  std::vector<Index> inner_hidden{8, 8};
};

SkipNetParams init_skip(const SkipDims& dims, std::mt19937_64& rng);
TwoLayerParams init_two_layer(Index n, Index m, Index d_y, std::mt19937_64& rng);
/// theta maps R^n through inner_hidden to R^d_z. Requires d_y <= min(n, d_z).
LinearSkipParams init_linear(Index n, Index d_y, Index d_z, const std::vector<Index>& inner_hidden,
                             std::mt19937_64& rng);

/// Trains from the given point. Throws TrainingDiverged when the objective
/// exceeds 1e12 or stops being finite.
TrainResult<SkipNetParams> train(const SkipNetParams& init, const Dataset& d, const LossConfig& cfg,
                                 const TrainerSpec& spec, std::uint64_t seed);
TrainResult<TwoLayerParams> train(const TwoLayerParams& init, const Dataset& d, const LossConfig& cfg,
                                  const TrainerSpec& spec, std::uint64_t seed);
TrainResult<LinearSkipParams> train(const LinearSkipParams& init, const Dataset& d,
                                    const LossConfig& cfg, const TrainerSpec& spec, std::uint64_t seed);

/// Initialises from the seed and trains.
TrainResult<SkipNetParams> train_skip(const SkipDims& dims, const Dataset& d, const LossConfig& cfg,
                                      const TrainerSpec& spec, std::uint64_t seed);
TrainResult<TwoLayerParams> train_two_layer(Index m, const Dataset& d, const LossConfig& cfg,
                                            const TrainerSpec& spec, std::uint64_t seed);

}  // namespace skipland
