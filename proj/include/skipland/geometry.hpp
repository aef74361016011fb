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

#include <vector>

#include "skipland/dataset.hpp"
#include "skipland/models.hpp"

namespace skipland {

/// Clustering radius m^((eta - 1) / n).
double cluster_radius(Index m, Index n, double eta);

/// ceil(m^eta), the member count a successful cluster reaches.
Index cluster_quota(Index m, double eta);

/// A set of hidden units whose W1 rows are pairwise within 2 * epsilon_m_eta
/// of each other, plus one representative row that absorbs their output mass.
struct ClusterSet {
  std::vector<Index> member_indices;  // sorted, excludes the representative
  Index representative_index = -1;
  double max_pairwise_angle = 0.0;    // over members and representative
  double epsilon_m_eta = 0.0;
  Index quota = 0;
  bool meets_quota = false;

  std::vector<Index> all_indices() const;  // members plus representative, sorted
};

struct ClusterOptions {
  /// Per-row output mass used to pick the representative (largest wins, ties
  /// to the lowest index). Empty means all equal.
  std::vector<double> column_mass;
  /// Rows allowed into the cluster. Empty means all rows.
  std::vector<bool> eligible;
};

/// Finds a large set of directed row directions with pairwise angle at most
/// 2 * m^((eta-1)/n). Every eligible row seeds a cap of angular radius epsilon
/// around itself (pairwise <= 2 epsilon by the triangle inequality), which is
/// then grown greedily by rows within 2 epsilon of every current member. The
/// largest set wins. Sub-quota results are returned with meets_quota = false.
ClusterSet find_cluster(const Mat& W1, double eta, const ClusterOptions& opts = {});

/// Largest pairwise angle among the given rows of W1, by exhaustive search.
double max_pairwise_angle(const Mat& W1, const std::vector<Index>& rows);

struct PerturbationBound {
  double lhs = 0.0;  // mean (relu(w1 . x) - relu(w2 . x))^2
  double rhs = 0.0;  // 4 ||Sigma_X||_op angle(w1, w2)^2
};

/// Monte-Carlo side of the ReLU perturbation inequality on the dataset inputs.
/// Both vectors must be unit norm within 1e-10.
PerturbationBound relu_perturbation_bound(const Vec& w1, const Vec& w2, const Dataset& d);

struct ColumnTransfer {
  std::vector<Index> zeroed;  // columns driven to zero
  Index target = -1;          // column receiving their sum
  Mat added;                  // (rows x 1) sum of the zeroed columns
};

struct SparsifyPlan {
  ClusterSet cluster;
  ColumnTransfer w2_transfer;
  ColumnTransfer v2_transfer;
  /// mean_x || sum_k alpha_k n_k(x) ||, n_k(x) = relu(w1_{i_k} x) - relu(w1_j x).
  double residual_bound = 0.0;
  /// Same with the V2 columns beta_k.
  double v2_residual_bound = 0.0;
  /// sum_k ||alpha_k||_1 and sum_k ||beta_k||_1.
  double w2_merged_l1 = 0.0;
  double v2_merged_l1 = 0.0;
};

SparsifyPlan build_sparsify_plan(const SkipNetParams& p, const ClusterSet& cluster,
                                 const Dataset& d);

/// The endpoint of the transfer: zeroed columns cleared, sums moved to the target,
/// V1 reset to pinv(W2) W2 V1 so the product W2 V1 is kept whenever W2 has full row rank.
SkipNetParams apply_sparsify_plan(const SkipNetParams& p, const SparsifyPlan& plan);

/// One transfer of the W2 and V2 columns of row `from` onto row `to`.
struct NeighborMove {
  Index from = -1;
  Index to = -1;
  double angle = 0.0;  // angle between W1 rows from and to
  double cost = 0.0;   // E||alpha n|| + weight E||beta n|| for this move alone
};

struct NeighborMergePlan {
  std::vector<NeighborMove> moves;
  /// mean_x || sum_k alpha_k n_k(x) || over all moves.
  double residual_bound = 0.0;
  double v2_residual_bound = 0.0;
};

/// Pairs each eligible row with its nearest eligible row by W1 angle, keeps pairs
/// within max_angle, and takes up to `count` of the cheapest by the residual cost
/// E||alpha n|| + v2_weight E||beta n||. A row that receives columns is never freed
/// and a freed row never receives, so each move frees exactly one column.
NeighborMergePlan build_neighbor_merge_plan(const SkipNetParams& p, const Dataset& d,
                                            const std::vector<bool>& eligible, Index count,
                                            double max_angle, double v2_weight);

SkipNetParams apply_neighbor_merge_plan(const SkipNetParams& p, const NeighborMergePlan& plan);

}  // namespace skipland
