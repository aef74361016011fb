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

#include "skipland/trainer.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "skipland/errors.hpp"
#include "skipland/objective.hpp"

namespace skipland {

void TrainerSpec::validate() const {
  if (steps < 0 || finish_steps < 0 || polish_iterations < 0) throw ConfigError("trainer: negative step count");
  if (!(clip_norm > 0.0)) throw ConfigError("trainer: clip_norm must be positive");
  if (!(polish_tolerance > 0.0)) throw ConfigError("trainer: polish_tolerance must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("trainer: learning_rate must be a finite non-negative number");
  }
  if (batch_size < 1) throw ConfigError("trainer: batch_size must be positive");
}

namespace {

constexpr double kDivergence = 1e12;

Mat gaussian(std::mt19937_64& rng, Index r, Index c, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  }
  return m;
}

double checked(double f, const char* phase) {
  if (!std::isfinite(f) || f > kDivergence) {
    throw TrainingDiverged(std::string("training diverged during ") + phase);
  }
  return f;
}

template <class P>
P scaled(const P& p, const Vec& u) {
  P q = p;
  auto b = blocks(q);
  for (std::size_t k = 0; k < b.size(); ++k) *b[k] *= std::exp(u(static_cast<Index>(k)));
  return q;
}

// d/du_k F(exp(u_k) B_k) = <grad_k F, B_k>, the radial residual of block k.
template <class P>
Vec scale_gradient(const P& p, const Dataset& d, const LossConfig& cfg) {
  const P g = grad(p, d, cfg);
  const auto gb = blocks(g);
  const auto pb = blocks(p);
  Vec r(static_cast<Index>(pb.size()));
  for (std::size_t k = 0; k < pb.size(); ++k) r(static_cast<Index>(k)) = gb[k]->cwiseProduct(*pb[k]).sum();
  return r;
}

// BFGS over the log-scales of the parameter blocks. F is smooth along
// positive rescalings, so this drives every radial residual to zero.
template <class P>
void polish_scales(P& p, double& f, const Dataset& d, const LossConfig& cfg, const TrainerSpec& spec) {
  const Index K = static_cast<Index>(blocks(p).size());
  for (const Mat* b : blocks(static_cast<const P&>(p))) {
    if (!(b->squaredNorm() > 0.0)) return;
  }
  Vec u = Vec::Zero(K);
  P cur = p;
  Vec g = scale_gradient(cur, d, cfg);
  Mat Hinv = Mat::Identity(K, K) / std::max(1.0, g.cwiseAbs().maxCoeff() / std::max(f, 1e-300));
  for (Index it = 0; it < spec.polish_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() <= spec.polish_tolerance * std::abs(f)) break;
    Vec dir = -Hinv * g;
    if (dir.dot(g) >= 0.0) {
      Hinv.setIdentity();
      dir = -g;
    }
    const double longest = dir.cwiseAbs().maxCoeff();
    double a = longest > 0.5 ? 0.5 / longest : 1.0;
    bool accepted = false;
    for (int h = 0; h < 40 && !accepted; ++h) {
      const Vec un = u + a * dir;
      P trial = scaled(p, un);
      const double ft = objective(trial, d, cfg);
      if (std::isfinite(ft) && ft <= f + 1e-4 * a * dir.dot(g)) {
        const Vec gn = scale_gradient(trial, d, cfg);
        const Vec s = un - u;
        const Vec y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-300) {
          const Mat I = Mat::Identity(K, K);
          const double rho = 1.0 / sy;
          Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        u = un;
        cur = std::move(trial);
        f = ft;
        g = gn;
        accepted = true;
      } else {
        a *= 0.5;
      }
    }
    if (!accepted) break;
  }
  p = std::move(cur);
}

template <class P>
TrainResult<P> train_impl(const P& init, const Dataset& d, const LossConfig& cfg,
                          const TrainerSpec& spec, std::uint64_t seed) {
  init.validate();
  cfg.validate();
  spec.validate();
  TrainResult<P> out;
  out.params = init;
  double f = checked(objective(out.params, d, cfg), "initialisation");
  out.loss_trace.push_back(f);
  if (spec.learning_rate == 0.0) return out;

  std::mt19937_64 rng(seed);
  const Index N = d.size();
  const Index batch = std::min(spec.batch_size, N);
  std::uniform_int_distribution<Index> pick(0, N - 1);
  const Index report_every = std::max<Index>(1, spec.steps / 20);
  Mat bx(d.input_dim(), batch);
  Mat by(d.output_dim(), batch);
  for (Index s = 0; s < spec.steps; ++s) {
    for (Index j = 0; j < batch; ++j) {
      const Index i = pick(rng);
      bx.col(j) = d.inputs().col(i);
      by.col(j) = d.targets().col(i);
    }
    const Dataset mb(bx, by);
    const P g = grad(out.params, mb, cfg);
    const double gn = std::sqrt(squared_norm(g));
    const double clip = gn > spec.clip_norm ? spec.clip_norm / gn : 1.0;
    out.params = axpy(out.params, -spec.learning_rate * clip, g);
    if (!params_finite(out.params)) throw TrainingDiverged("training diverged during SGD");
    if ((s + 1) % report_every == 0 || s + 1 == spec.steps) {
      f = checked(objective(out.params, d, cfg), "SGD");
      out.loss_trace.push_back(f);
    }
  }

  double step = spec.learning_rate;
  for (Index s = 0; s < spec.finish_steps; ++s) {
    const P g = grad(out.params, d, cfg);
    const double g2 = squared_norm(g);
    if (!(g2 > 0.0)) break;
    bool accepted = false;
    for (int h = 0; h < 40 && !accepted; ++h) {
      P trial = axpy(out.params, -step, g);
      const double ft = objective(trial, d, cfg);
      if (std::isfinite(ft) && ft <= f - 1e-4 * step * g2) {
        out.params = std::move(trial);
        f = ft;
        accepted = true;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
    out.loss_trace.push_back(f);
  }

  polish_scales(out.params, f, d, cfg, spec);
  out.loss_trace.push_back(checked(f, "polish"));
  return out;
}

}  // namespace

SkipNetParams init_skip(const SkipDims& dims, std::mt19937_64& rng) {
  const double sm = 1.0 / std::sqrt(static_cast<double>(dims.m));
  SkipNetParams p;
  p.W1 = gaussian(rng, dims.m, dims.n, 1.0);
  p.W2 = gaussian(rng, dims.d_y, dims.m, sm);
  p.V2 = gaussian(rng, dims.d_g, dims.m, sm);
  p.V1 = gaussian(rng, dims.m, dims.d_o, sm);
  std::vector<Index> sizes{dims.d_g};
  sizes.insert(sizes.end(), dims.inner_hidden.begin(), dims.inner_hidden.end());
  sizes.push_back(dims.d_o);
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    p.theta.layers.push_back(gaussian(rng, sizes[k], sizes[k - 1],
                                      std::sqrt(2.0 / static_cast<double>(sizes[k - 1]))));
  }
  return p;
}

TwoLayerParams init_two_layer(Index n, Index m, Index d_y, std::mt19937_64& rng) {
  return {gaussian(rng, m, n, 1.0), gaussian(rng, d_y, m, 1.0 / std::sqrt(static_cast<double>(m)))};
}

LinearSkipParams init_linear(Index n, Index d_y, Index d_z, const std::vector<Index>& inner_hidden,
                             std::mt19937_64& rng) {
  LinearSkipParams p;
  p.W = gaussian(rng, d_y, n, 1.0 / std::sqrt(static_cast<double>(n)));
  p.V = gaussian(rng, n, d_z, 1.0 / std::sqrt(static_cast<double>(d_z)));
  std::vector<Index> sizes{n};
  sizes.insert(sizes.end(), inner_hidden.begin(), inner_hidden.end());
  sizes.push_back(d_z);
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    p.theta.layers.push_back(gaussian(rng, sizes[k], sizes[k - 1],
                                      std::sqrt(2.0 / static_cast<double>(sizes[k - 1]))));
  }
  p.validate();
  return p;
}

TrainResult<SkipNetParams> train(const SkipNetParams& init, const Dataset& d, const LossConfig& cfg,
                                 const TrainerSpec& spec, std::uint64_t seed) {
  return train_impl(init, d, cfg, spec, seed);
}

TrainResult<TwoLayerParams> train(const TwoLayerParams& init, const Dataset& d, const LossConfig& cfg,
                                  const TrainerSpec& spec, std::uint64_t seed) {
  return train_impl(init, d, cfg, spec, seed);
}

TrainResult<LinearSkipParams> train(const LinearSkipParams& init, const Dataset& d,
                                    const LossConfig& cfg, const TrainerSpec& spec, std::uint64_t seed) {
  return train_impl(init, d, cfg, spec, seed);
}

TrainResult<SkipNetParams> train_skip(const SkipDims& dims, const Dataset& d, const LossConfig& cfg,
                                      const TrainerSpec& spec, std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  return train(init_skip(dims, rng), d, cfg, spec, seed);
}

TrainResult<TwoLayerParams> train_two_layer(Index m, const Dataset& d, const LossConfig& cfg,
                                            const TrainerSpec& spec, std::uint64_t seed) {
  std::seed_seq seq{seed, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  return train(init_two_layer(d.input_dim(), m, d.output_dim(), rng), d, cfg, spec, seed);
}

}  // namespace skipland
