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

#include "skipland/pathbuilder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skipland/errors.hpp"
#include "skipland/objective.hpp"

namespace skipland {

void PathOptions::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("path options: eta must be in (0, 1)");
  if (grid < 2) throw InvalidInput("path options: grid must be at least 2");
  if (descent_budget < 0) throw InvalidInput("path options: descent_budget must be non-negative");
  if (!(rank_tol > 0.0)) throw InvalidInput("path options: rank_tol must be positive");
  if (rank_probes < 1) throw InvalidInput("path options: rank_probes must be positive");
  if (max_perturb_retries < 0) throw InvalidInput("path options: negative max_perturb_retries");
  if (!(perturb_scale > 0.0)) throw InvalidInput("path options: perturb_scale must be positive");
  if (flat_samples < 2) throw InvalidInput("path options: flat_samples must be at least 2");
  if (lterm_iterations < 0 || lterm_restarts < 1) throw InvalidInput("path options: bad lterm budget");
}

namespace {

double sigma_min(const Mat& w) {
  if (w.size() == 0) return 0.0;
  const Vec s = singular_values(w);
  return s(s.size() - 1);
}

bool full_row_rank(const Mat& w, double tol, double ref) {
  return w.rows() <= w.cols() && sigma_min(w) > tol * ref;
}

double bump(double t) { return 4.0 * t * (1.0 - t); }

Mat random_direction(std::mt19937_64& rng, Index rows, Index cols, double norm) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat e(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) e(i, j) = gauss(rng);
  }
  const double r = e.norm();
  return r > 0.0 ? Mat(e * (norm / r)) : e;
}

// Builds a segment from point(t, bump_matrix). Tries the unperturbed family
// first and then random bumps until every interior probe is rank_ok.
template <class P, class PointFn>
Segment<P> guarded_segment(SegmentKind kind, PointFn point, Index rows, Index cols,
                           const PathOptions& opts, std::mt19937_64& rng, Index* perturbations) {
  for (Index attempt = 0; attempt <= opts.max_perturb_retries; ++attempt) {
    const Mat E = attempt == 0 ? Mat::Zero(rows, cols)
                               : random_direction(rng, rows, cols, opts.perturb_scale);
    bool ok = true;
    for (Index k = 1; k <= opts.rank_probes && ok; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(opts.rank_probes + 1);
      ok = point(t, Mat(bump(t) * E)).rank_ok;
    }
    if (!ok) continue;
    if (attempt > 0 && perturbations != nullptr) ++*perturbations;
    Segment<P> s;
    s.kind = kind;
    s.eval = [point, E](double t) { return point(t, Mat(bump(t) * E)); };
    s.start = s.eval(0.0).params;
    s.end = s.eval(1.0).params;
    if (attempt > 0) s.note = "perturbed after " + std::to_string(attempt) + " attempt(s)";
    return s;
  }
  throw PathDegeneracy("pseudoinverse segment keeps losing rank after perturbation");
}

// F(W2, V1) with W1, V2 and theta frozen: the hidden activations and the inner
// network output do not depend on W2 or V1.
class FinalLayerView {
 public:
  FinalLayerView(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg)
      : d_(d), cfg_(cfg), inv_n_(1.0 / static_cast<double>(d.size())) {
    H_ = relu_mat(p.W1 * d.inputs());
    Gz_ = forward_inner(p.theta, Mat(p.V2 * H_));
    row_norms_ = p.W1.rowwise().norm();
    const auto g = group_norms(p);
    fixed_ = cfg.kappa * (g[1] + g[3]);
  }

  double value(const Mat& W2, const Mat& V1) const {
    const Mat Z = W2 * V1;
    const Mat F = W2 * H_ + Z * Gz_;
    return mean_loss(F, d_.targets(), cfg_) + cfg_.kappa * (w2_mass(W2) + l1_norm(Z)) + fixed_;
  }

  Mat grad_w2(const Mat& W2, const Mat& V1) const {
    const Mat S = H_ + V1 * Gz_;
    const Mat R = loss_output_grad(W2 * S, d_.targets(), cfg_) * inv_n_;
    return R * S.transpose() +
           cfg_.kappa * (sign_mat(W2) * row_norms_.asDiagonal() + sign_mat(W2 * V1) * V1.transpose());
  }

  Mat grad_v1(const Mat& W2, const Mat& V1) const {
    const Mat Z = W2 * V1;
    const Mat R = loss_output_grad(W2 * H_ + Z * Gz_, d_.targets(), cfg_) * inv_n_;
    return W2.transpose() * (R * Gz_.transpose() + cfg_.kappa * sign_mat(Z));
  }

 private:
  double w2_mass(const Mat& W2) const {
    double s = 0.0;
    for (Index i = 0; i < W2.cols(); ++i) s += W2.col(i).cwiseAbs().sum() * row_norms_(i);
    return s;
  }

  const Dataset& d_;
  const LossConfig& cfg_;
  double inv_n_;
  Mat H_;
  Mat Gz_;
  Vec row_norms_;
  double fixed_ = 0.0;
};

bool unit_norm(double r) { return std::abs(r - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon(); }

// Scales of the rebalancing curve; exact identity at t = 0.
SkipNetParams rebalance_rows(const SkipNetParams& p, const Vec& r, double t) {
  SkipNetParams q = p;
  for (Index i = 0; i < r.size(); ++i) {
    if (!(r(i) > 0.0) || unit_norm(r(i))) continue;
    const double c = std::pow(r(i), -t);
    q.W1.row(i) *= c;
    q.W2.col(i) /= c;
    q.V2.col(i) /= c;
    q.V1.row(i) *= c;
  }
  return q;
}

SkipNetParams rebalance_chain(const SkipNetParams& p, const std::vector<double>& target, double t) {
  SkipNetParams q = p;
  const std::size_t K = p.theta.layers.size();
  q.V2 *= std::pow(target[0], t);
  for (std::size_t k = 0; k < K; ++k) q.theta.layers[k] *= std::pow(target[k + 1], t);
  q.V1 *= std::pow(target[K + 1], t);
  return q;
}

struct Knot {
  Mat W2;
  Mat V1;
};

Segment<SkipNetParams> knot_segment(const SkipNetParams& base, std::vector<Knot> knots) {
  Segment<SkipNetParams> s;
  s.kind = SegmentKind::descent;
  const auto steps = static_cast<Index>(knots.size()) - 1;
  auto shared = std::make_shared<std::vector<Knot>>(std::move(knots));
  s.eval = [base, shared, steps](double t) {
    SkipNetParams q = base;
    const auto& k = *shared;
    if (steps <= 0) {
      q.W2 = k.front().W2;
      q.V1 = k.front().V1;
      return PathPoint<SkipNetParams>{q, true};
    }
    const double pos = std::clamp(t, 0.0, 1.0) * static_cast<double>(steps);
    const Index i = std::min(static_cast<Index>(std::floor(pos)), steps - 1);
    const double u = pos - static_cast<double>(i);
    q.W2 = (1.0 - u) * k[i].W2 + u * k[i + 1].W2;
    q.V1 = (1.0 - u) * k[i].V1 + u * k[i + 1].V1;
    return PathPoint<SkipNetParams>{q, true};
  };
  for (Index i = 1; i < steps; ++i) s.knots.push_back(static_cast<double>(i) / static_cast<double>(steps));
  s.start = s.eval(0.0).params;
  s.end = s.eval(1.0).params;
  return s;
}

bool column_is_zero(const Mat& m, Index j) { return (m.col(j).array() == 0.0).all(); }

}  // namespace

NormReductionResult reduce_norms(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg,
                                 Index budget) {
  p.validate();
  cfg.validate();
  if (budget < 0) throw InvalidInput("reduce_norms: budget must be non-negative");
  NormReductionResult out;
  const double f0 = objective(p, d, cfg);
  if (!std::isfinite(f0)) throw InvalidInput("reduce_norms: objective is not finite at the start point");
  out.trace.push_back(f0);
  SkipNetParams cur = p;

  const Vec r = p.W1.rowwise().norm();
  if (std::any_of(r.data(), r.data() + r.size(), [](double v) { return v > 0.0 && !unit_norm(v); })) {
    Segment<SkipNetParams> s;
    s.kind = SegmentKind::descent;
    s.note = "row rebalance";
    s.eval = [p, r](double t) { return PathPoint<SkipNetParams>{rebalance_rows(p, r, t), true}; };
    s.start = p;
    s.end = s.eval(1.0).params;
    cur = s.end;
    out.path.push(std::move(s));
    out.trace.push_back(objective(cur, d, cfg));
  }

  // Balance V2 term, theta layers and the W2 V1 term at their geometric mean.
  {
    const auto g = group_norms(cur);
    std::vector<double> a{g[1]};
    for (const Mat& th : cur.theta.layers) a.push_back(th.norm());
    a.push_back(g[2]);
    const bool positive = std::all_of(a.begin(), a.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
    if (positive) {
      double log_mean = 0.0;
      for (double v : a) log_mean += std::log(v);
      const double gm = std::exp(log_mean / static_cast<double>(a.size()));
      const double total = std::accumulate(a.begin(), a.end(), 0.0);
      if (total - static_cast<double>(a.size()) * gm > 1e-12 * total) {
        std::vector<double> target;
        for (double v : a) target.push_back(gm / v);
        const SkipNetParams base = cur;
        Segment<SkipNetParams> s;
        s.kind = SegmentKind::descent;
        s.note = "chain rebalance";
        s.eval = [base, target](double t) {
          return PathPoint<SkipNetParams>{rebalance_chain(base, target, t), true};
        };
        s.start = base;
        s.end = s.eval(1.0).params;
        cur = s.end;
        out.path.push(std::move(s));
        out.trace.push_back(objective(cur, d, cfg));
      }
    }
  }

  // Block descent on W2 and V1.
  const FinalLayerView view(cur, d, cfg);
  std::vector<Knot> knots{{cur.W2, cur.V1}};
  Mat W2 = cur.W2;
  Mat V1 = cur.V1;
  double f = view.value(W2, V1);
  double step[2] = {1.0, 1.0};
  Index it = 0;
  for (; it < budget; ++it) {
    bool progressed = false;
    for (int block = 0; block < 2; ++block) {
      const Mat g = block == 0 ? view.grad_w2(W2, V1) : view.grad_v1(W2, V1);
      const double g2 = g.squaredNorm();
      if (!(g2 > 0.0)) continue;
      bool accepted = false;
      for (int h = 0; h < 50 && !accepted; ++h) {
        const double a = step[block];
        const Mat tW2 = block == 0 ? Mat(W2 - a * g) : W2;
        const Mat tV1 = block == 1 ? Mat(V1 - a * g) : V1;
        const double ft = view.value(tW2, tV1);
        if (std::isfinite(ft) && ft <= f - 1e-4 * a * g2) {
          const Mat gn = block == 0 ? view.grad_w2(tW2, tV1) : view.grad_v1(tW2, tV1);
          if (-(gn.cwiseProduct(g)).sum() <= 0.0) {
            const double rel = (f - ft) / std::max(std::abs(f), 1e-300);
            W2 = tW2;
            V1 = tV1;
            f = ft;
            knots.push_back({W2, V1});
            out.trace.push_back(f);
            accepted = true;
            step[block] = a * 2.0;
            if (rel >= 1e-10) progressed = true;
            break;
          }
        }
        step[block] = a * 0.5;
      }
    }
    if (!progressed) {
      ++it;
      break;
    }
  }
  out.iterations = it;
  if (knots.size() > 1) {
    auto s = knot_segment(cur, std::move(knots));
    cur = s.end;
    out.path.push(std::move(s));
  }
  if (out.path.empty()) out.path.push(constant_segment(cur, SegmentKind::descent));
  out.end = cur;
  return out;
}

Segment<SkipNetParams> project_v1_segment(const SkipNetParams& p) {
  SkipNetParams q = p;
  q.V1 = pinv(p.W2) * (p.W2 * p.V1);
  auto s = linear_segment(p, q, SegmentKind::project);
  return s;
}

namespace {

// Straight move of the W2 and V2 columns with V1 = pinv(W2) W2 V1 at every t.
Segment<SkipNetParams> transfer_segment(const SkipNetParams& p, const Mat& dW2, const Mat& dV2,
                                        std::vector<Index> zeroed, const PathOptions& opts,
                                        std::mt19937_64& rng, Index* perturbations) {
  const Index m = p.width();
  const Mat Z0 = p.W2 * p.V1;
  Mat end_W2 = p.W2 + dW2;
  for (Index i : zeroed) end_W2.col(i).setZero();
  const double ref = std::max({op_norm(p.W2), op_norm(end_W2), 1e-300});
  const double tol = opts.rank_tol;
  auto point = [p, dW2, dV2, zeroed, Z0, ref, tol](double t, const Mat& bumpE) {
    SkipNetParams q = p;
    q.W2 = p.W2 + t * dW2 + bumpE;
    q.V2 = p.V2 + t * dV2;
    // Exact zeros at t = 1 for the cleared columns.
    if (t == 1.0) {
      for (Index i : zeroed) {
        q.W2.col(i).setZero();
        q.V2.col(i).setZero();
      }
    }
    q.V1 = pinv(q.W2) * Z0;
    const bool ok = full_row_rank(q.W2, tol, ref);
    return PathPoint<SkipNetParams>{std::move(q), ok};
  };
  return guarded_segment<SkipNetParams>(SegmentKind::merge, point, p.W2.rows(), m, opts, rng,
                                        perturbations);
}

}  // namespace

Segment<SkipNetParams> merge_segment(const SkipNetParams& p, const SparsifyPlan& plan,
                                     const PathOptions& opts, std::mt19937_64& rng,
                                     Index* perturbations) {
  const Index m = p.width();
  auto check_cols = [m](const ColumnTransfer& c) {
    if (c.target < 0 || c.target >= m) throw InvalidInput("merge: target column out of range");
    for (Index i : c.zeroed) {
      if (i < 0 || i >= m || i == c.target) throw InvalidInput("merge: bad zeroed column");
    }
  };
  check_cols(plan.w2_transfer);
  check_cols(plan.v2_transfer);
  if (plan.w2_transfer.zeroed != plan.v2_transfer.zeroed) {
    throw InvalidInput("merge: W2 and V2 transfers clear different columns");
  }

  Mat dW2 = Mat::Zero(p.W2.rows(), m);
  for (Index i : plan.w2_transfer.zeroed) dW2.col(i) = -p.W2.col(i);
  dW2.col(plan.w2_transfer.target) = plan.w2_transfer.added;
  Mat dV2 = Mat::Zero(p.V2.rows(), m);
  for (Index i : plan.v2_transfer.zeroed) dV2.col(i) = -p.V2.col(i);
  dV2.col(plan.v2_transfer.target) = plan.v2_transfer.added;

  auto s = transfer_segment(p, dW2, dV2, plan.w2_transfer.zeroed, opts, rng, perturbations);
  s.note = "cluster of " + std::to_string(plan.cluster.member_indices.size() + 1) +
           " rows into " + std::to_string(plan.w2_transfer.target) +
           (s.note.empty() ? "" : ", " + s.note);
  return s;
}

Segment<SkipNetParams> merge_segment(const SkipNetParams& p, const NeighborMergePlan& plan,
                                     const PathOptions& opts, std::mt19937_64& rng,
                                     Index* perturbations) {
  const Index m = p.width();
  std::vector<char> freed(m, 0);
  std::vector<char> receives(m, 0);
  Mat dW2 = Mat::Zero(p.W2.rows(), m);
  Mat dV2 = Mat::Zero(p.V2.rows(), m);
  std::vector<Index> zeroed;
  for (const auto& mv : plan.moves) {
    if (mv.from < 0 || mv.from >= m || mv.to < 0 || mv.to >= m || mv.from == mv.to ||
        freed[mv.from] || receives[mv.from] || freed[mv.to]) {
      throw InvalidInput("merge: bad neighbour move");
    }
    freed[mv.from] = 1;
    receives[mv.to] = 1;
    dW2.col(mv.from) -= p.W2.col(mv.from);
    dW2.col(mv.to) += p.W2.col(mv.from);
    dV2.col(mv.from) -= p.V2.col(mv.from);
    dV2.col(mv.to) += p.V2.col(mv.from);
    zeroed.push_back(mv.from);
  }
  auto s = transfer_segment(p, dW2, dV2, zeroed, opts, rng, perturbations);
  s.note = std::to_string(plan.moves.size()) + " neighbour transfers" +
           (s.note.empty() ? "" : ", " + s.note);
  return s;
}

SkipPath merge_path(const SkipNetParams& p, const SparsifyPlan& plan, const PathOptions& opts,
                          std::mt19937_64& rng, Index* perturbations) {
  SkipPath path;
  path.push(project_v1_segment(p));
  path.push(merge_segment(path.back(), plan, opts, rng, perturbations));
  return path;
}

std::vector<Index> free_columns(const SkipNetParams& p) {
  std::vector<Index> out;
  for (Index i = 0; i < p.width(); ++i) {
    if (column_is_zero(p.W2, i) && column_is_zero(p.V2, i)) out.push_back(i);
  }
  return out;
}

MergeRoundsResult merge_rounds(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg,
                               Index l_target, const PathOptions& opts, std::mt19937_64& rng) {
  MergeRoundsResult out;
  out.path.push(project_v1_segment(p));
  SkipNetParams cur = out.path.back();
  const Index m = p.width();
  const double max_angle = 2.0 * cluster_radius(m, p.input_dim(), opts.eta);
  for (;;) {
    const auto free = free_columns(cur);
    out.free_count = static_cast<Index>(free.size());
    if (out.free_count >= l_target) break;
    std::vector<bool> eligible(m, true);
    for (Index i : free) eligible[i] = false;
    for (Index i = 0; i < m; ++i) {
      if (!(cur.W1.row(i).norm() > 0.0)) eligible[i] = false;
    }
    if (std::none_of(eligible.begin(), eligible.end(), [](bool b) { return b; })) break;

    const Mat H = relu_mat(cur.W1 * d.inputs());
    const double G0 = inner_lipschitz_estimate(cur.theta, cur.V2 * H);
    const double z_norm = op_norm(cur.W2 * cur.V1);

    Segment<SkipNetParams> seg;
    double residual = 0.0;
    double v2_residual = 0.0;
    NeighborMergePlan nplan = build_neighbor_merge_plan(cur, d, eligible, l_target - out.free_count,
                                                        max_angle, z_norm * G0);
    if (!nplan.moves.empty()) {
      seg = merge_segment(cur, nplan, opts, rng, &out.perturbations);
      residual = nplan.residual_bound;
      v2_residual = nplan.v2_residual_bound;
      out.neighbor_plans.push_back(std::move(nplan));
    } else {
      ClusterOptions co;
      co.eligible = eligible;
      co.column_mass.assign(m, 0.0);
      for (Index i = 0; i < m; ++i) {
        co.column_mass[i] = cur.W2.col(i).cwiseAbs().sum() + cur.V2.col(i).cwiseAbs().sum();
      }
      const ClusterSet cluster = find_cluster(cur.W1, opts.eta, co);
      if (cluster.member_indices.empty()) break;
      SparsifyPlan plan = build_sparsify_plan(cur, cluster, d);
      seg = merge_segment(cur, plan, opts, rng, &out.perturbations);
      residual = plan.residual_bound;
      v2_residual = plan.v2_residual_bound;
      out.plans.push_back(std::move(plan));
    }

    const Mat F0 = forward_skip(cur, d.inputs());
    const Mat F1 = forward_skip(seg.end, d.inputs());
    const double out_r = std::max(F0.colwise().norm().maxCoeff(), F1.colwise().norm().maxCoeff());
    const double tgt_r = d.targets().colwise().norm().maxCoeff();
    const double L0 = lipschitz_bound(cfg, out_r, tgt_r, d.output_dim());
    out.predicted_bound += L0 * (residual + z_norm * G0 * v2_residual);
    cur = seg.end;
    out.path.push(std::move(seg));
    ++out.rounds;
  }
  out.end = cur;
  return out;
}

RewireResult rewire_and_descend(const SkipNetParams& p, const LTermSolution& target,
                                     const std::vector<Index>& slots, const PathOptions& opts,
                                     std::mt19937_64& rng) {
  const Index l = static_cast<Index>(slots.size());
  if (target.l != l || target.W1_star.rows() != l || target.W2_star.cols() != l) {
    throw InvalidInput("rewire_and_descend: slot count differs from the l-term width");
  }
  if (l > 0 && (target.W1_star.cols() != p.input_dim() || target.W2_star.rows() != p.output_dim())) {
    throw InvalidInput("rewire_and_descend: l-term solution dimensions differ from the network");
  }
  std::vector<bool> used(p.width(), false);
  for (Index s : slots) {
    if (s < 0 || s >= p.width() || used[s]) throw InvalidInput("rewire_and_descend: bad slot index");
    if (!column_is_zero(p.W2, s) || !column_is_zero(p.V2, s)) {
      throw InvalidInput("rewire_and_descend: slot column is not free");
    }
    used[s] = true;
  }

  RewireResult out;
  out.slots = slots;

  SkipNetParams rewired = p;
  for (Index k = 0; k < l; ++k) rewired.W1.row(slots[k]) = target.W1_star.row(k);
  auto ra = linear_segment(p, rewired, SegmentKind::rewire);
  ra.note = "slot rows to the l-term units";
  out.path.push(std::move(ra));

  const Mat W2c = rewired.W2;
  const Mat Zc = rewired.W2 * rewired.V1;
  Mat W2t = Mat::Zero(p.W2.rows(), p.W2.cols());
  for (Index k = 0; k < l; ++k) W2t.col(slots[k]) = target.W2_star.col(k);
  const double ref = std::max({op_norm(W2c), op_norm(W2t), 1e-300});
  const double tol = opts.rank_tol;
  auto point = [rewired, W2c, Zc, W2t, ref, tol](double t, const Mat& bumpE) {
    SkipNetParams q = rewired;
    q.W2 = (1.0 - t) * W2c + t * W2t + bumpE;
    const Mat Z = (1.0 - t) * Zc;
    q.V1 = pinv(q.W2) * Z;
    const bool ok = (Z.array() == 0.0).all() || full_row_rank(q.W2, tol, ref);
    return PathPoint<SkipNetParams>{std::move(q), ok};
  };
  auto lb = guarded_segment<SkipNetParams>(SegmentKind::final_layer_linear, point, p.W2.rows(),
                                           p.W2.cols(), opts, rng, &out.perturbations);
  lb.note = "lifted final layer to the l-term output weights" + (lb.note.empty() ? "" : ", " + lb.note);
  const SkipNetParams mid = lb.end;
  out.path.push(std::move(lb));

  SkipNetParams anchor = mid;
  anchor.V2.setZero();
  for (Mat& th : anchor.theta.layers) th.setZero();
  auto rp = linear_segment(mid, anchor, SegmentKind::final_layer_linear);
  rp.note = "ramp V2 and theta to zero";
  out.path.push(std::move(rp));
  out.anchor = anchor;
  return out;
}

SkipPath anchor_bridge(const SkipNetParams& from, const std::vector<Index>& from_slots,
                       const SkipNetParams& to, const std::vector<Index>& to_slots) {
  if (from_slots.size() != to_slots.size()) throw InvalidInput("bridge: slot lists differ in size");
  if (!same_shape(from, to)) throw InvalidInput("bridge: anchors differ in shape");
  const Index m = from.width();
  const Index l = static_cast<Index>(from_slots.size());
  SkipPath path;
  SkipNetParams cur = from;
  std::vector<Index> at = from_slots;
  std::vector<Index> owner(m, -1);
  for (Index k = 0; k < l; ++k) owner[at[k]] = k;

  for (;;) {
    std::vector<std::pair<Index, Index>> moves;  // (unit, destination)
    for (Index k = 0; k < l; ++k) {
      if (at[k] != to_slots[k] && owner[to_slots[k]] < 0) moves.emplace_back(k, to_slots[k]);
    }
    if (moves.empty()) {
      Index k = 0;
      while (k < l && at[k] == to_slots[k]) ++k;
      if (k == l) break;
      Index spare = 0;
      while (spare < m && owner[spare] >= 0) ++spare;
      if (spare == m) throw UnsupportedConfiguration("bridge: no free column to break a cycle");
      moves.emplace_back(k, spare);
    }
    SkipNetParams rewired = cur;
    for (auto [k, dst] : moves) rewired.W1.row(dst) = cur.W1.row(at[k]);
    auto rw = linear_segment(cur, rewired, SegmentKind::rewire);
    rw.note = "free rows take the moving units";
    path.push(std::move(rw));
    SkipNetParams shifted = rewired;
    for (auto [k, dst] : moves) {
      shifted.W2.col(dst) = rewired.W2.col(at[k]);
      shifted.W2.col(at[k]).setZero();
    }
    auto mv = linear_segment(rewired, shifted, SegmentKind::merge);
    mv.note = "output columns shift between identical rows";
    path.push(std::move(mv));
    cur = shifted;
    for (auto [k, dst] : moves) {
      owner[at[k]] = -1;
      owner[dst] = k;
      at[k] = dst;
    }
  }
  SkipNetParams last = cur;
  for (Index i = 0; i < m; ++i) {
    if (owner[i] < 0) last.W1.row(i) = to.W1.row(i);
  }
  auto fin = linear_segment(cur, last, SegmentKind::rewire);
  fin.note = "unused rows to the far anchor";
  path.push(std::move(fin));
  if (max_abs_diff(path.back(), to) > 1e-12) {
    throw NumericalError("bridge: end point differs from the far anchor");
  }
  return path;
}

namespace {

double max_flat_deviation(const SkipPath& path, const Dataset& d, const LossConfig& cfg, Index samples,
                          const std::function<bool(const Segment<SkipNetParams>&)>& select) {
  double worst = 0.0;
  for (const auto& seg : path.segments()) {
    if (!select(seg)) continue;
    const double f0 = objective(seg.at(0.0).params, d, cfg);
    for (Index i = 1; i < samples; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
      worst = std::max(worst, std::abs(objective(seg.at(s).params, d, cfg) - f0));
    }
  }
  return worst;
}

double max_increase(const std::vector<double>& trace) {
  double worst = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) worst = std::max(worst, trace[i] - trace[i - 1]);
  return worst;
}

}  // namespace

ConnectResult connect(const SkipNetParams& a, const SkipNetParams& b, const Dataset& d,
                      const LossConfig& cfg, const PathOptions& opts, const LTermProvider& provider) {
  opts.validate();
  cfg.validate();
  a.validate();
  b.validate();
  if (!same_shape(a, b) || a.theta.sizes() != b.theta.sizes()) {
    throw InvalidInput("connect: endpoints have different architectures");
  }
  if (a.input_dim() != d.input_dim() || a.output_dim() != d.output_dim()) {
    throw InvalidInput("connect: endpoints do not match the dataset dimensions");
  }
  const Index m = a.width();
  const Index n = a.input_dim();
  const std::function<double(const SkipNetParams&)> F = [&](const SkipNetParams& p) {
    return objective(p, d, cfg);
  };

  ConnectResult out;
  out.diag.l_requested = opts.l >= 0 ? opts.l
                                     : static_cast<Index>(std::floor(
                                           std::pow(static_cast<double>(m), opts.eta) + 1e-9));
  out.diag.endpoint_distance = std::sqrt(squared_norm(axpy(a, -1.0, b)));

  if (max_abs_diff(a, b) == 0.0) {
    out.path.push(constant_segment(a));
    out.report = measure_depth(out.path, F, opts.grid, F(a));
  } else {
    std::mt19937_64 rng(opts.seed);
    const auto s1a = reduce_norms(a, d, cfg, opts.descent_budget);
    const auto s1b = reduce_norms(b, d, cfg, opts.descent_budget);
    const auto ma = merge_rounds(s1a.end, d, cfg, out.diag.l_requested, opts, rng);
    const auto mb = merge_rounds(s1b.end, d, cfg, out.diag.l_requested, opts, rng);
    const auto free_a = free_columns(ma.end);
    const auto free_b = free_columns(mb.end);
    const Index l_eff = std::min({out.diag.l_requested, static_cast<Index>(free_a.size()),
                                  static_cast<Index>(free_b.size())});

    out.lterm = provider ? provider(l_eff)
                         : solve_lterm(d, cfg, l_eff, opts.lterm_iterations, opts.lterm_restarts,
                                       opts.seed);
    if (out.lterm.l != l_eff) throw InvalidInput("connect: l-term provider returned the wrong width");

    std::vector<Index> slots_a(free_a.begin(), free_a.begin() + l_eff);
    std::vector<Index> slots_b;
    {
      std::vector<bool> is_free_b(m, false);
      for (Index i : free_b) is_free_b[i] = true;
      std::vector<bool> taken(m, false);
      for (Index s : slots_a) {
        if (is_free_b[s]) taken[s] = true;
      }
      auto next_free = free_b.begin();
      for (Index s : slots_a) {
        if (is_free_b[s]) {
          slots_b.push_back(s);
          continue;
        }
        while (taken[*next_free]) ++next_free;
        taken[*next_free] = true;
        slots_b.push_back(*next_free);
      }
    }
    const auto s3a = rewire_and_descend(ma.end, out.lterm, slots_a, opts, rng);
    const auto s3b = rewire_and_descend(mb.end, out.lterm, slots_b, opts, rng);
    const auto bridge = anchor_bridge(s3a.anchor, slots_a, s3b.anchor, slots_b);

    SkipPath half_b = s1b.path;
    half_b.append(mb.path);
    half_b.append(s3b.path);

    out.path = s1a.path;
    out.path.append(ma.path);
    out.path.append(s3a.path);
    out.path.append(bridge);
    out.path.append(half_b.reversed());

    out.report = measure_depth(out.path, F, opts.grid, out.lterm.e_l);
    out.report.predicted_bound = std::max(ma.predicted_bound, mb.predicted_bound);
    out.diag.l_effective = l_eff;
    out.diag.free_a = static_cast<Index>(free_a.size());
    out.diag.free_b = static_cast<Index>(free_b.size());
    out.diag.merge_rounds_a = ma.rounds;
    out.diag.merge_rounds_b = mb.rounds;
    out.diag.perturbations = ma.perturbations + mb.perturbations + s3a.perturbations + s3b.perturbations;
    out.diag.descent_max_increase = std::max(max_increase(s1a.trace), max_increase(s1b.trace));

    SkipPath flat = s3a.path;
    flat.append(bridge);
    flat.append(s3b.path);
    out.diag.flat_max_deviation =
        max_flat_deviation(flat, d, cfg, opts.flat_samples, [](const Segment<SkipNetParams>& s) {
          return s.kind == SegmentKind::rewire || s.kind == SegmentKind::merge;
        });
  }
  out.diag.continuity_error = std::max({out.path.continuity_error(), max_abs_diff(out.path.front(), a),
                                        max_abs_diff(out.path.back(), b)});
  out.report.perturbations = out.diag.perturbations;
  out.report.m = m;
  out.report.n = n;
  out.report.eta = opts.eta;
  out.report.eps_m_eta = cluster_radius(m, n, opts.eta);
  return out;
}

Mat linear_optimum(const Dataset& d, const LossConfig& cfg) {
  cfg.validate();
  const Mat& X = d.inputs();
  const Mat& Y = d.targets();
  Mat W = (Y * X.transpose()) * pinv(X * X.transpose());
  if (cfg.kind == LossKind::mse) return W;
  const double inv_n = 1.0 / static_cast<double>(d.size());
  auto value = [&](const Mat& w) { return mean_loss(w * X, Y, cfg); };
  double f = value(W);
  double step = 1.0;
  for (int it = 0; it < 5000; ++it) {
    const Mat g = loss_output_grad(W * X, Y, cfg) * X.transpose() * inv_n;
    const double g2 = g.squaredNorm();
    if (!(g2 > 1e-30)) break;
    bool accepted = false;
    for (int h = 0; h < 60 && !accepted; ++h) {
      const Mat trial = W - step * g;
      const double ft = value(trial);
      if (ft <= f - 1e-4 * step * g2) {
        accepted = true;
        const double rel = (f - ft) / std::max(std::abs(f), 1e-300);
        W = trial;
        f = ft;
        step *= 2.0;
        if (rel < 1e-15) return W;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
  }
  return W;
}

Segment<LinearSkipParams> lifted_line_segment(const LinearSkipParams& from, const Mat& W_to,
                                              const Mat& Z_to, const PathOptions& opts,
                                              std::mt19937_64& rng, Index* perturbations) {
  if (W_to.rows() != from.W.rows() || W_to.cols() != from.W.cols() || Z_to.rows() != from.W.rows() ||
      Z_to.cols() != from.V.cols()) {
    throw InvalidInput("lifted line: target shapes differ from the start point");
  }
  const Mat W0 = from.W;
  const Mat Z0 = from.W * from.V;
  const double ref = std::max({op_norm(W0), op_norm(W_to), 1e-300});
  const double tol = opts.rank_tol;
  auto point = [from, W0, Z0, W_to, Z_to, ref, tol](double t, const Mat& bumpE) {
    LinearSkipParams q = from;
    q.W = (1.0 - t) * W0 + t * W_to + bumpE;
    const Mat Z = (1.0 - t) * Z0 + t * Z_to;
    q.V = pinv(q.W) * Z;
    const bool ok = (Z.array() == 0.0).all() || full_row_rank(q.W, tol, ref);
    return PathPoint<LinearSkipParams>{std::move(q), ok};
  };
  return guarded_segment<LinearSkipParams>(SegmentKind::final_layer_linear, point, W0.rows(),
                                           W0.cols(), opts, rng, perturbations);
}

namespace {

LinearPath linear_half(const LinearSkipParams& p, const Mat& W_star, const PathOptions& opts,
                       std::mt19937_64& rng, Index* perturbations) {
  LinearPath path;
  LinearSkipParams proj = p;
  proj.V = pinv(p.W) * (p.W * p.V);
  path.push(linear_segment(p, proj, SegmentKind::project));
  const Mat zero = Mat::Zero(p.W.rows(), p.V.cols());
  path.push(lifted_line_segment(proj, W_star, zero, opts, rng, perturbations));
  return path;
}

}  // namespace

LinearConnectResult connect_linear(const LinearSkipParams& a, const LinearSkipParams& b,
                                   const Dataset& d, const LossConfig& cfg, const PathOptions& opts) {
  opts.validate();
  cfg.validate();
  a.validate();
  b.validate();
  if (!same_shape(a, b) || a.theta.sizes() != b.theta.sizes()) {
    throw InvalidInput("connect_linear: endpoints have different architectures");
  }
  if (a.input_dim() != d.input_dim() || a.output_dim() != d.output_dim()) {
    throw InvalidInput("connect_linear: endpoints do not match the dataset dimensions");
  }
  const std::function<double(const LinearSkipParams&)> F = [&](const LinearSkipParams& p) {
    return objective(p, d, cfg);
  };
  LinearConnectResult out;
  out.W_star = linear_optimum(d, cfg);
  out.F_star = mean_loss(out.W_star * d.inputs(), d.targets(), cfg);

  Index perturbations = 0;
  if (max_abs_diff(a, b) == 0.0) {
    out.path.push(constant_segment(a));
  } else {
    std::mt19937_64 rng(opts.seed);
    out.path = linear_half(a, out.W_star, opts, rng, &perturbations);
    const LinearPath half_b = linear_half(b, out.W_star, opts, rng, &perturbations);
    LinearSkipParams swapped = out.path.back();
    swapped.theta = b.theta;
    auto th = linear_segment(out.path.back(), swapped, SegmentKind::rewire);
    th.note = "inner network with the skip branch off";
    out.path.push(std::move(th));
    out.path.append(half_b.reversed());
  }
  out.report = measure_depth(out.path, F, opts.grid, out.F_star);
  out.report.perturbations = perturbations;
  out.report.n = a.input_dim();
  out.report.eta = opts.eta;
  out.continuity_error = std::max({out.path.continuity_error(), max_abs_diff(out.path.front(), a),
                                   max_abs_diff(out.path.back(), b)});
  return out;
}

}  // namespace skipland
