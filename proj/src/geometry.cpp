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

#include "skipland/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skipland/errors.hpp"

namespace skipland {

double cluster_radius(Index m, Index n, double eta) {
  return std::pow(static_cast<double>(m), (eta - 1.0) / static_cast<double>(n));
}

Index cluster_quota(Index m, double eta) {
  const double q = std::pow(static_cast<double>(m), eta);
  return static_cast<Index>(std::ceil(q - 1e-9));
}

std::vector<Index> ClusterSet::all_indices() const {
  std::vector<Index> out = member_indices;
  if (representative_index >= 0) out.push_back(representative_index);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Mat angle_matrix(const Mat& unit_rows) {
  Mat c = unit_rows * unit_rows.transpose();
  return c.unaryExpr([](double v) { return std::acos(std::clamp(v, -1.0, 1.0)); });
}

}  // namespace

double max_pairwise_angle(const Mat& W1, const std::vector<Index>& rows) {
  double best = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      best = std::max(best, angle(W1.row(rows[a]).transpose(), W1.row(rows[b]).transpose()));
    }
  }
  return best;
}

ClusterSet find_cluster(const Mat& W1, double eta, const ClusterOptions& opts) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("find_cluster: eta must be in (0, 1)");
  const Index m = W1.rows();
  if (m < 1) throw InvalidInput("find_cluster: empty W1");
  require_finite(W1, "find_cluster W1");
  if (!opts.column_mass.empty() && static_cast<Index>(opts.column_mass.size()) != m) {
    throw InvalidInput("find_cluster: column_mass size differs from row count");
  }
  if (!opts.eligible.empty() && static_cast<Index>(opts.eligible.size()) != m) {
    throw InvalidInput("find_cluster: eligible size differs from row count");
  }
  auto eligible = [&](Index i) { return opts.eligible.empty() || opts.eligible[i]; };

  Mat unit = W1;
  for (Index i = 0; i < m; ++i) {
    const double r = W1.row(i).norm();
    if (eligible(i) && !(r > 0.0)) throw InvalidInput("find_cluster: zero row in W1");
    if (r > 0.0) unit.row(i) /= r;
  }

  ClusterSet out;
  out.epsilon_m_eta = cluster_radius(m, W1.cols(), eta);
  out.quota = cluster_quota(m, eta);
  const double eps = out.epsilon_m_eta;
  const double diam = 2.0 * eps;
  const Mat ang = angle_matrix(unit);

  std::vector<Index> best;
  std::vector<Index> set;
  std::vector<std::pair<double, Index>> ring;
  for (Index s = 0; s < m; ++s) {
    if (!eligible(s)) continue;
    set.clear();
    ring.clear();
    for (Index i = 0; i < m; ++i) {
      if (!eligible(i)) continue;
      const double a = ang(s, i);
      // A small margin keeps the triangle-inequality guarantee robust to acos rounding.
      if (a <= eps * (1.0 - 1e-12)) {
        set.push_back(i);
      } else if (a <= diam) {
        ring.emplace_back(a, i);
      }
    }
    std::sort(ring.begin(), ring.end());
    for (const auto& [a, i] : ring) {
      const bool fits = std::all_of(set.begin(), set.end(), [&](Index k) { return ang(i, k) <= diam; });
      if (fits) set.push_back(i);
    }
    if (set.size() > best.size()) best = set;
  }
  if (best.empty()) return out;

  std::sort(best.begin(), best.end());
  Index rep = best.front();
  if (!opts.column_mass.empty()) {
    for (Index i : best) {
      if (opts.column_mass[i] > opts.column_mass[rep]) rep = i;
    }
  }
  out.representative_index = rep;
  for (Index i : best) {
    if (i != rep) out.member_indices.push_back(i);
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < best.size(); ++a) {
    for (std::size_t b = a + 1; b < best.size(); ++b) worst = std::max(worst, ang(best[a], best[b]));
  }
  out.max_pairwise_angle = worst;
  out.meets_quota = static_cast<Index>(out.member_indices.size()) >= out.quota;
  return out;
}

PerturbationBound relu_perturbation_bound(const Vec& w1, const Vec& w2, const Dataset& d) {
  if (w1.size() != d.input_dim() || w2.size() != d.input_dim()) {
    throw InvalidInput("relu_perturbation_bound: dimension mismatch");
  }
  if (std::abs(w1.norm() - 1.0) > 1e-10 || std::abs(w2.norm() - 1.0) > 1e-10) {
    throw InvalidInput("relu_perturbation_bound: vectors must be unit norm");
  }
  const Vec a = (d.inputs().transpose() * w1).cwiseMax(0.0);
  const Vec b = (d.inputs().transpose() * w2).cwiseMax(0.0);
  PerturbationBound out;
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += (a(i) - b(i)) * (a(i) - b(i));
  out.lhs = s / static_cast<double>(a.size());
  const double alpha = angle(w1, w2);
  out.rhs = 4.0 * op_norm(d.second_moment()) * alpha * alpha;
  return out;
}

SparsifyPlan build_sparsify_plan(const SkipNetParams& p, const ClusterSet& cluster,
                                 const Dataset& d) {
  if (cluster.member_indices.empty() || cluster.representative_index < 0) {
    throw InvalidInput("build_sparsify_plan: empty cluster");
  }
  const Index m = p.width();
  const Index j = cluster.representative_index;
  for (Index i : cluster.all_indices()) {
    if (i < 0 || i >= m) throw InvalidInput("build_sparsify_plan: cluster index out of range");
  }
  if (d.input_dim() != p.input_dim()) throw InvalidInput("build_sparsify_plan: dataset dims");

  SparsifyPlan plan;
  plan.cluster = cluster;
  plan.w2_transfer.zeroed = cluster.member_indices;
  plan.w2_transfer.target = j;
  plan.w2_transfer.added = Mat::Zero(p.W2.rows(), 1);
  plan.v2_transfer.zeroed = cluster.member_indices;
  plan.v2_transfer.target = j;
  plan.v2_transfer.added = Mat::Zero(p.V2.rows(), 1);
  for (Index i : cluster.member_indices) {
    plan.w2_transfer.added += p.W2.col(i);
    plan.v2_transfer.added += p.V2.col(i);
    plan.w2_merged_l1 += p.W2.col(i).cwiseAbs().sum();
    plan.v2_merged_l1 += p.V2.col(i).cwiseAbs().sum();
  }

  // Residual sums, one sample at a time in dataset order.
  const Mat& X = d.inputs();
  const Eigen::RowVectorXd hj = (p.W1.row(j) * X).cwiseMax(0.0);
  Mat rw = Mat::Zero(p.W2.rows(), X.cols());
  Mat rv = Mat::Zero(p.V2.rows(), X.cols());
  for (Index i : cluster.member_indices) {
    const Eigen::RowVectorXd ni = (p.W1.row(i) * X).cwiseMax(0.0) - hj;
    rw += p.W2.col(i) * ni;
    rv += p.V2.col(i) * ni;
  }
  double sw = 0.0;
  double sv = 0.0;
  for (Index c = 0; c < X.cols(); ++c) {
    sw += rw.col(c).norm();
    sv += rv.col(c).norm();
  }
  plan.residual_bound = sw / static_cast<double>(X.cols());
  plan.v2_residual_bound = sv / static_cast<double>(X.cols());
  return plan;
}

SkipNetParams apply_sparsify_plan(const SkipNetParams& p, const SparsifyPlan& plan) {
  SkipNetParams q = p;
  for (Index i : plan.w2_transfer.zeroed) q.W2.col(i).setZero();
  q.W2.col(plan.w2_transfer.target) += plan.w2_transfer.added;
  for (Index i : plan.v2_transfer.zeroed) q.V2.col(i).setZero();
  q.V2.col(plan.v2_transfer.target) += plan.v2_transfer.added;
  q.V1 = pinv(q.W2) * (p.W2 * p.V1);
  return q;
}

NeighborMergePlan build_neighbor_merge_plan(const SkipNetParams& p, const Dataset& d,
                                            const std::vector<bool>& eligible, Index count,
                                            double max_angle, double v2_weight) {
  const Index m = p.width();
  if (static_cast<Index>(eligible.size()) != m) {
    throw InvalidInput("build_neighbor_merge_plan: eligible size");
  }
  if (d.input_dim() != p.input_dim()) throw InvalidInput("build_neighbor_merge_plan: dataset dims");
  if (count < 0 || !(max_angle >= 0.0) || !(v2_weight >= 0.0)) {
    throw InvalidInput("build_neighbor_merge_plan: bad arguments");
  }
  NeighborMergePlan plan;
  std::vector<Index> rows;
  for (Index i = 0; i < m; ++i) {
    if (eligible[i] && p.W1.row(i).norm() > 0.0) rows.push_back(i);
  }
  if (count == 0 || rows.size() < 2) return plan;

  Mat U(static_cast<Index>(rows.size()), p.W1.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    U.row(static_cast<Index>(k)) = p.W1.row(rows[k]).normalized();
  }
  const Mat G = U * U.transpose();
  const Mat& X = d.inputs();
  const Mat H = relu_mat(p.W1 * X);
  const double N = static_cast<double>(X.cols());

  std::vector<NeighborMove> cand;
  for (Index a = 0; a < G.rows(); ++a) {
    Index best = -1;
    for (Index b = 0; b < G.cols(); ++b) {
      if (b != a && (best < 0 || G(a, b) > G(a, best))) best = b;
    }
    const double angle = std::acos(std::clamp(G(a, best), -1.0, 1.0));
    if (angle > max_angle) continue;
    const Index i = rows[a];
    const Index j = rows[best];
    const double n_mean = (H.row(i) - H.row(j)).cwiseAbs().sum() / N;
    const double cost = (p.W2.col(i).norm() + v2_weight * p.V2.col(i).norm()) * n_mean;
    cand.push_back({i, j, angle, cost});
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [](const NeighborMove& x, const NeighborMove& y) { return x.cost < y.cost; });

  std::vector<char> freed(m, 0);
  std::vector<char> receives(m, 0);
  for (const auto& mv : cand) {
    if (static_cast<Index>(plan.moves.size()) >= count) break;
    if (receives[mv.from] || freed[mv.to]) continue;
    freed[mv.from] = 1;
    receives[mv.to] = 1;
    plan.moves.push_back(mv);
  }

  Mat rw = Mat::Zero(p.W2.rows(), X.cols());
  Mat rv = Mat::Zero(p.V2.rows(), X.cols());
  for (const auto& mv : plan.moves) {
    const Eigen::RowVectorXd n = H.row(mv.from) - H.row(mv.to);
    rw += p.W2.col(mv.from) * n;
    rv += p.V2.col(mv.from) * n;
  }
  plan.residual_bound = rw.colwise().norm().sum() / N;
  plan.v2_residual_bound = rv.colwise().norm().sum() / N;
  return plan;
}

SkipNetParams apply_neighbor_merge_plan(const SkipNetParams& p, const NeighborMergePlan& plan) {
  SkipNetParams q = p;
  for (const auto& mv : plan.moves) {
    q.W2.col(mv.to) += q.W2.col(mv.from);
    q.W2.col(mv.from).setZero();
    q.V2.col(mv.to) += q.V2.col(mv.from);
    q.V2.col(mv.from).setZero();
  }
  q.V1 = pinv(q.W2) * (p.W2 * p.V1);
  return q;
}

}  // namespace skipland
