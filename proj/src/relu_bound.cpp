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

#include "skipland/relu_bound.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "skipland/dataset.hpp"
#include "skipland/errors.hpp"
#include "skipland/generators.hpp"
#include "skipland/geometry.hpp"

namespace skipland {

namespace {

Mat draw_inputs(std::mt19937_64& rng, const std::string& dist, Index n, Index count) {
  if (dist == "ball") return uniform_ball(rng, n, count);
  if (dist == "sphere") {
    std::normal_distribution<double> nd;
    Mat x(n, count);
    for (Index j = 0; j < count; ++j) {
      for (Index i = 0; i < n; ++i) x(i, j) = nd(rng);
      x.col(j).normalize();
    }
    return x;
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat x(n, count);
  for (Index j = 0; j < count; ++j)
    for (Index i = 0; i < n; ++i) x(i, j) = u(rng);
  return x / std::sqrt(static_cast<double>(n));
}

Vec random_unit(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v.normalized();
}

}  // namespace

const std::vector<std::string>& relu_bound_distributions() {
  static const std::vector<std::string> d{"ball", "sphere", "cube"};
  return d;
}

ReluBoundResult run_relu_bound_check(const ReluBoundOptions& opts) {
  if (opts.n < 2) throw InvalidInput("relu bound check: n must be at least 2");
  if (opts.pairs < 1 || opts.samples < 1) throw InvalidInput("relu bound check: pairs and samples must be positive");
  if (opts.alphas.size() < 2) throw InvalidInput("relu bound check: need at least two angles");
  for (double a : opts.alphas)
    if (!(a > 0.0 && a < M_PI)) throw InvalidInput("relu bound check: angles must lie in (0, pi)");

  ReluBoundResult res;
  res.max_violation = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(opts.seed);
  for (const auto& dist : relu_bound_distributions()) {
    const Mat X = draw_inputs(rng, dist, opts.n, opts.samples);
    const Dataset d(X, Mat::Zero(1, X.cols()));
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double k = 0.0;
    for (Index p = 0; p < opts.pairs; ++p) {
      const Vec w1 = random_unit(rng, opts.n);
      Vec u = random_unit(rng, opts.n);
      u = (u - u.dot(w1) * w1).normalized();
      for (double a : opts.alphas) {
        const Vec w2 = (std::cos(a) * w1 + std::sin(a) * u).normalized();
        const auto b = relu_perturbation_bound(w1, w2, d);
        res.rows.push_back({dist, p, a, b.lhs, b.rhs});
        res.max_violation = std::max(res.max_violation, b.lhs - b.rhs);
        if (b.lhs > 0.0) {
          const double lx = std::log(a), ly = std::log(b.lhs);
          sx += lx;
          sy += ly;
          sxx += lx * lx;
          sxy += lx * ly;
          k += 1.0;
        }
      }
    }
    res.distributions.push_back(dist);
    const double den = k * sxx - sx * sx;
    res.slopes.push_back(den > 0.0 ? (k * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN());
  }
  return res;
}

}  // namespace skipland
