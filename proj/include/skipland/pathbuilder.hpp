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
#include <functional>
#include <random>
#include <vector>

#include "skipland/dataset.hpp"
#include "skipland/geometry.hpp"
#include "skipland/loss.hpp"
#include "skipland/lterm.hpp"
#include "skipland/models.hpp"
#include "skipland/path.hpp"

namespace skipland {

using SkipPath = ParamPath<SkipNetParams>;
using LinearPath = ParamPath<LinearSkipParams>;

struct PathOptions {
  double eta = 0.5;
  /// Number of units to free; negative means floor(m^eta).
  Index l = -1;
  Index grid = 200;
  Index descent_budget = 50;
  /// A point is rank_ok when sigma_min(W) > rank_tol * reference scale.
  double rank_tol = 1e-9;
  /// Interior points probed for rank loss before a pseudoinverse segment is accepted.
  Index rank_probes = 64;
  Index max_perturb_retries = 5;
  double perturb_scale = 1e-7;
  /// Points per flat segment used for the flatness diagnostic.
  Index flat_samples = 5;
  Index lterm_iterations = 200;
  Index lterm_restarts = 3;
  std::uint64_t seed = 0;
  void validate() const;
};

/// Function-preserving rebalancing (unit W1 rows, then the V2 / theta /
/// W2 V1 chain), followed by alternating line-searched descent on W2 and on V1.
/// F is convex in each of these blocks, and every accepted step ends with a
/// non-positive directional derivative, so F is non-increasing along the path.
struct NormReductionResult {
  SkipNetParams end;
  SkipPath path;
  std::vector<double> trace;  // F at the start and after every recorded step
  Index iterations = 0;
};
NormReductionResult reduce_norms(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg,
                                 Index budget);

/// V1 -> pinv(W2) W2 V1 along a straight line; F depends on V1 only through W2 V1.
Segment<SkipNetParams> project_v1_segment(const SkipNetParams& p);

/// The merge family of a plan starting at p (whose V1 must already be projected):
/// zeroed columns scale by (1 - t), the target gains t times their sum, in both
/// W2 and V2, and V1(t) = pinv(W2(t)) W2(0) V1(0). If interior probes lose rank,
/// W2(t) gains a bump 4 t (1 - t) E with a random E of norm perturb_scale;
/// after max_perturb_retries failures PathDegeneracy is thrown.
Segment<SkipNetParams> merge_segment(const SkipNetParams& p, const SparsifyPlan& plan,
                                     const PathOptions& opts, std::mt19937_64& rng,
                                     Index* perturbations = nullptr);

/// The same family for a set of neighbour transfers applied together.
Segment<SkipNetParams> merge_segment(const SkipNetParams& p, const NeighborMergePlan& plan,
                                     const PathOptions& opts, std::mt19937_64& rng,
                                     Index* perturbations = nullptr);

/// project_v1_segment followed by merge_segment.
SkipPath merge_path(const SkipNetParams& p, const SparsifyPlan& plan, const PathOptions& opts,
                          std::mt19937_64& rng, Index* perturbations = nullptr);

/// Columns whose W2 and V2 entries are all exactly zero.
std::vector<Index> free_columns(const SkipNetParams& p);

/// Projection, then merge rounds until at least l_target columns are free.
/// A round transfers rows onto their nearest neighbours within twice the cluster
/// radius, cheapest first; when no such pair exists it merges a cluster instead.
/// Stops early when neither kind of round can free a column.
struct MergeRoundsResult {
  SkipNetParams end;
  SkipPath path;
  std::vector<NeighborMergePlan> neighbor_plans;
  std::vector<SparsifyPlan> plans;  // cluster rounds
  Index rounds = 0;
  Index free_count = 0;
  /// Sum over rounds of L0 (E||sum alpha n|| + ||W2 V1|| G0 E||sum beta n||).
  double predicted_bound = 0.0;
  Index perturbations = 0;
};
MergeRoundsResult merge_rounds(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg,
                                     Index l_target, const PathOptions& opts, std::mt19937_64& rng);

/// Rewire the slot rows to target.W1_star (flat), move [W2, W2 V1] along
/// a straight line to [W2* on the slots, 0] with V1 recovered by pseudoinverse,
/// then ramp V2 and theta to zero.
struct RewireResult {
  SkipNetParams anchor;
  SkipPath path;
  std::vector<Index> slots;
  Index perturbations = 0;
};
RewireResult rewire_and_descend(const SkipNetParams& p, const LTermSolution& target,
                                     const std::vector<Index>& slots, const PathOptions& opts,
                                     std::mt19937_64& rng);

/// Flat path between two anchors that hold the same l units in different
/// slots: units move through free columns (rewire the free row, then shift
/// the output column), and the remaining rows are rewired last.
SkipPath anchor_bridge(const SkipNetParams& from, const std::vector<Index>& from_slots,
                       const SkipNetParams& to, const std::vector<Index>& to_slots);

struct ConnectDiagnostics {
  double continuity_error = 0.0;
  double descent_max_increase = 0.0;
  double flat_max_deviation = 0.0;
  Index l_requested = 0;
  Index l_effective = 0;
  Index free_a = 0;
  Index free_b = 0;
  Index merge_rounds_a = 0;
  Index merge_rounds_b = 0;
  Index perturbations = 0;
  double endpoint_distance = 0.0;
};

struct ConnectResult {
  SkipPath path;
  BarrierReport report;
  ConnectDiagnostics diag;
  LTermSolution lterm;
};

using LTermProvider = std::function<LTermSolution(Index l)>;

/// Path A -> anchor -> B through norm reduction, merging and rewiring on both sides, a flat bridge
/// between the two anchors and the reversed B half. The provider supplies
/// the l-unit solution; by default solve_lterm is called.
ConnectResult connect(const SkipNetParams& a, const SkipNetParams& b, const Dataset& d,
                      const LossConfig& cfg, const PathOptions& opts,
                      const LTermProvider& provider = {});

/// argmin_W mean L(W x, y): least squares for MSE, line-searched gradient
/// descent from the least-squares point otherwise.
Mat linear_optimum(const Dataset& d, const LossConfig& cfg);

/// Straight line in lifted [W, W V] space from `from` to (W_to, Z_to), with
/// V(t) = pinv(W(t)) Z(t) and the same rank fallback as merge_segment.
Segment<LinearSkipParams> lifted_line_segment(const LinearSkipParams& from, const Mat& W_to,
                                              const Mat& Z_to, const PathOptions& opts,
                                              std::mt19937_64& rng, Index* perturbations = nullptr);

struct LinearConnectResult {
  LinearPath path;
  BarrierReport report;
  Mat W_star;
  double F_star = 0.0;
  double continuity_error = 0.0;
};

LinearConnectResult connect_linear(const LinearSkipParams& a, const LinearSkipParams& b,
                                   const Dataset& d, const LossConfig& cfg, const PathOptions& opts);

}  // namespace skipland
