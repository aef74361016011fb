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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "skipland/generators.hpp"
#include "skipland/loss.hpp"
#include "skipland/pathbuilder.hpp"
#include "skipland/trainer.hpp"

namespace skipland {

/// Flat `key = value` configuration. Lines starting with '#' and blank lines
/// are ignored; lists are comma separated. Unknown or repeated keys are errors.
struct ExperimentConfig {
  std::uint64_t seed = 1;       // training, path and solver randomness
  std::uint64_t data_seed = 1;  // dataset generation only
  Index n = 3;
  Index d_y = 1;
  Index d_g = 4;
  Index d_o = 4;
  std::vector<Index> inner_hidden{8, 8};
  std::vector<Index> m_list{64, 128, 256, 512, 1024};
  Index seeds = 5;
  double eta = 0.5;
  double kappa = 1e-3;
  LossKind loss = LossKind::mse;
  double huber_delta = 1.0;

  std::string generator = "teacher-two-layer";
  std::string dataset_file;  // used instead of the generator when set
  Index samples = 2000;
  Index teacher_width = 8;
  double noise = 0.0;
  double output_clip = 2.0;
  double trig_frequency = 3.0;

  Index train_steps = 2000;
  double learning_rate = 0.1;
  Index batch_size = 64;
  Index finish_steps = 100;
  double clip_norm = 1.0;
  Index polish_iterations = 100;

  Index grid = 200;
  Index descent_budget = 50;
  Index l = -1;  // negative: floor(m^eta)
  Index lterm_iterations = 300;
  Index lterm_restarts = 3;
  Index threads = 1;
  Index width = 0;  // single-run width for train; 0 means the first m_list entry

  std::string out = "out";

  void validate() const;

  LossConfig loss_config() const;
  GenSpec gen_spec() const;
  TrainerSpec trainer_spec() const;
  PathOptions path_options() const;
  SkipDims skip_dims(Index m) const;
};

/// Throws ConfigError on syntax errors, unknown keys, bad values or failed validation.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key with its current value, in parse_config syntax.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

}  // namespace skipland
