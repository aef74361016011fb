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
#include <string>
#include <vector>

#include "skipland/dataset.hpp"

namespace skipland {

/// Synthetic bounded regression data. Inputs are uniform in the unit ball.
///   teacher-two-layer: y = W2 relu(W1 x) + noise, teacher rows unit norm
///   teacher-skip:      y = f1(x) + noise for a random skip network
///   trig:              y_j = sin(a_j . x), ||a_j|| = trig_frequency
/// Targets with norm above output_clip are scaled back onto that sphere.
struct GenSpec {
  std::string generator = "teacher-two-layer";
  Index n = 3;
  Index d_y = 1;
  Index samples = 2000;
  Index teacher_width = 8;
  double noise = 0.0;
  double output_clip = 2.0;
  double trig_frequency = 3.0;
  Index d_g = 4;
  Index d_o = 4;
  std::vector<Index> inner_hidden{8, 8};
  void validate() const;
};

const std::vector<std::string>& generator_names();

/// Throws ConfigError for an unknown generator name.
Dataset gen_dataset(const GenSpec& spec, std::uint64_t seed);

/// count points uniform in the unit ball of R^n, one per column.
Mat uniform_ball(std::mt19937_64& rng, Index n, Index count);

}  // namespace skipland
