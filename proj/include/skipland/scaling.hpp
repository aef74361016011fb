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

#include "skipland/config.hpp"
#include "skipland/pathbuilder.hpp"

namespace skipland {

/// Excess values at or below this are treated as zero.
inline constexpr double kExcessFloor = 1e-9;

struct ScalingRow {
  Index m = 0;
  Index seed = 0;
  double lambda = 0.0;
  double e_l = 0.0;
  double max_loss = 0.0;
  double excess = 0.0;    // max(0, max_loss - max(lambda, e_l))
  double eps_pred = 0.0;  // m^((eta - 1) / n)
  double F_a = 0.0;
  double F_b = 0.0;
  double radial_a = 0.0;  // max |radial residual| / F at endpoint A
  double radial_b = 0.0;
  double predicted_bound = 0.0;
  ConnectDiagnostics diag;
  double train_seconds = 0.0;
  double connect_seconds = 0.0;
};

enum class FitStatus { fitted, never_active, insufficient };
std::string to_string(FitStatus s);

struct ScalingFit {
  FitStatus status = FitStatus::insufficient;
  std::vector<Index> widths;
  std::vector<double> medians;  // median excess per width
  bool monotone = false;        // medians non-increasing up to kExcessFloor
  Index active_widths = 0;      // widths with median above kExcessFloor
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci_low = 0.0;  // 95% Student-t interval
  double slope_ci_high = 0.0;
  double target_slope = 0.0;
};

/// Medians per width, monotonicity, and a least-squares fit of log median
/// against log m over the active widths when there are at least three.
ScalingFit fit_scaling(const std::vector<ScalingRow>& rows, double eta, Index n);

struct ScalingResult {
  std::vector<ScalingRow> rows;  // sorted by (m, seed)
  ScalingFit fit;
  double seconds = 0.0;
};

/// Trains two skip networks per (m, seed) cell and connects them. One
/// dataset and one l-term chain are shared by every cell. Cells run on
/// cfg.threads workers; each cell is seeded from (cfg.seed, m, seed) only,
/// so results do not depend on the thread count. Requires at least three
/// widths and three seeds. `log`, if given, receives one line per cell.
ScalingResult run_scaling(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// The dataset named by the config: dataset_file when set, else the generator.
Dataset experiment_dataset(const ExperimentConfig& cfg);

/// Endpoint seed for one cell; side 0 is A and side 1 is B.
std::uint64_t cell_seed(std::uint64_t base, Index m, Index seed, int side);

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);
void write_scaling_diagnostics(std::ostream& out, const std::vector<ScalingRow>& rows);
void write_scaling_summary(std::ostream& out, const ScalingFit& fit, double eta, Index n);

/// scaling.csv, scaling_diagnostics.csv and scaling_summary.txt under dir.
void save_scaling(const std::filesystem::path& dir, const ScalingResult& r, double eta, Index n);

}  // namespace skipland
