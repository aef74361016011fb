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

#include "skipland/lterm.hpp"

#include <cmath>
#include <random>

#include "skipland/errors.hpp"
#include "skipland/objective.hpp"

namespace skipland {

namespace {

constexpr Index kCandidates = 64;
constexpr int kMaxHalvings = 40;

Mat soft_threshold(const Mat& m, double tau) {
  return m.unaryExpr([tau](double v) {
    if (v > tau) return v - tau;
    if (v < -tau) return v + tau;
    return 0.0;
  });
}

void normalize_rows_keep_zero(Mat& w, const Mat& fallback) {
  for (Index i = 0; i < w.rows(); ++i) {
    const double r = w.row(i).norm();
    if (r > 0.0 && std::isfinite(r)) {
      w.row(i) /= r;
    } else {
      w.row(i) = fallback.row(i);
    }
  }
}

// Draws kCandidates directions and returns the one whose activation best
// correlates with the negative output gradient.
Vec pick_atom(std::mt19937_64& rng, const Dataset& d, const Mat& neg_grad) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index n = d.input_dim();
  Vec best = Vec::Unit(n, 0);
  double best_score = -1.0;
  for (Index c = 0; c < kCandidates; ++c) {
    Vec w(n);
    for (Index k = 0; k < n; ++k) w(k) = gauss(rng);
    const double r = w.norm();
    if (!(r > 0.0)) continue;
    w /= r;
    const Eigen::RowVectorXd act = (w.transpose() * d.inputs()).cwiseMax(0.0);
    const double energy = act.squaredNorm();
    if (!(energy > 0.0)) continue;
    const double score = (neg_grad * act.transpose()).squaredNorm() / energy;
    if (score > best_score) {
      best_score = score;
      best = w;
    }
  }
  return best;
}

struct Stage {
  TwoLayerParams p;
  double f = 0.0;
};

std::vector<Stage> greedy_chain(const Dataset& d, const LossConfig& cfg, Index l, Index m_solver,
                                std::mt19937_64& rng) {
  LossConfig smooth = cfg;
  smooth.kappa = 0.0;
  TwoLayerParams cur{Mat::Zero(0, d.input_dim()), Mat::Zero(d.output_dim(), 0)};
  double f = objective(cur, d, cfg);
  std::vector<Stage> out{{cur, f}};
  double lr = 0.5;
  for (Index s = 1; s <= l; ++s) {
    const Mat neg_grad = -loss_output_grad(forward_two_layer(cur, d.inputs()), d.targets(), cfg);
    const Vec atom = pick_atom(rng, d, neg_grad);
    cur.W1.conservativeResize(s, Eigen::NoChange);
    cur.W1.row(s - 1) = atom.transpose();
    cur.W2.conservativeResize(Eigen::NoChange, s);
    cur.W2.col(s - 1).setZero();
    f = std::min(f, objective(cur, d, cfg));

    for (Index it = 0; it < m_solver; ++it) {
      const TwoLayerParams g = grad(cur, d, smooth);
      bool accepted = false;
      for (int h = 0; h < kMaxHalvings && !accepted; ++h) {
        TwoLayerParams trial{cur.W1 - lr * g.W1, soft_threshold(cur.W2 - lr * g.W2, lr * cfg.kappa)};
        normalize_rows_keep_zero(trial.W1, cur.W1);
        const double ft = objective(trial, d, cfg);
        if (ft < f) {
          cur = std::move(trial);
          f = ft;
          accepted = true;
          lr *= 1.25;
        } else {
          lr *= 0.5;
        }
      }
      if (!accepted) {
        lr = 0.5;
        break;
      }
    }
    out.push_back({cur, f});
  }
  return out;
}

}  // namespace

std::vector<LTermSolution> solve_lterm_chain(const Dataset& d, const LossConfig& cfg, Index l,
                                             Index m_solver, Index restarts, std::uint64_t seed) {
  cfg.validate();
  if (l < 0) throw InvalidInput("solve_lterm: l must be non-negative");
  if (m_solver < 0) throw InvalidInput("solve_lterm: m_solver must be non-negative");
  if (restarts < 1) throw InvalidInput("solve_lterm: restarts must be at least 1");

  std::vector<Stage> best;
  for (Index r = 0; r < restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(r)};
    std::mt19937_64 rng(seq);
    auto chain = greedy_chain(d, cfg, l, m_solver, rng);
    if (best.empty()) {
      best = std::move(chain);
      continue;
    }
    for (std::size_t k = 0; k < chain.size(); ++k) {
      if (chain[k].f < best[k].f) best[k] = std::move(chain[k]);
    }
  }

  std::vector<LTermSolution> out;
  out.reserve(best.size());
  for (std::size_t k = 0; k < best.size(); ++k) {
    out.push_back({best[k].p.W1, best[k].p.W2, best[k].f, static_cast<Index>(k)});
  }
  return out;
}

LTermSolution solve_lterm(const Dataset& d, const LossConfig& cfg, Index l, Index m_solver,
                          Index restarts, std::uint64_t seed) {
  return solve_lterm_chain(d, cfg, l, m_solver, restarts, seed).back();
}

}  // namespace skipland
