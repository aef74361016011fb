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

// Random instance generators and naive scalar-loop oracles. The oracles never
// call into the library's forward or objective code.

#include <cmath>
#include <random>
#include <vector>

#include "skipland/dataset.hpp"
#include "skipland/loss.hpp"
#include "skipland/models.hpp"

namespace skipland::testing {

inline Mat random_mat(std::mt19937_64& rng, Index r, Index c, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

inline Vec random_vec(std::mt19937_64& rng, Index n, double scale = 1.0) {
  return random_mat(rng, n, 1, scale).col(0);
}

inline InnerNetParams random_inner(std::mt19937_64& rng, const std::vector<Index>& sizes,
                                   double scale = 0.5) {
  InnerNetParams g;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    g.layers.push_back(random_mat(rng, sizes[k], sizes[k - 1], scale));
  }
  return g;
}

inline SkipNetParams random_skip(std::mt19937_64& rng, Index n, Index m, Index dy, Index dg,
                                 Index dO, const std::vector<Index>& hidden = {5}) {
  std::vector<Index> sizes{dg};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(dO);
  SkipNetParams p;
  p.W1 = random_mat(rng, m, n);
  p.W2 = random_mat(rng, dy, m, 0.5);
  p.V2 = random_mat(rng, dg, m, 0.5);
  p.V1 = random_mat(rng, m, dO, 0.5);
  p.theta = random_inner(rng, sizes);
  return p;
}

inline Dataset random_dataset(std::mt19937_64& rng, Index n, Index dy, Index count) {
  return Dataset(random_mat(rng, n, count), random_mat(rng, dy, count));
}

// ---- oracles -------------------------------------------------------------

inline std::vector<double> naive_matvec(const Mat& A, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(A.rows()), 0.0);
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) y[i] += A(i, j) * x[static_cast<std::size_t>(j)];
  return y;
}

inline std::vector<double> naive_relu(std::vector<double> v) {
  for (double& e : v) e = e > 0.0 ? e : 0.0;
  return v;
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline std::vector<double> naive_inner(const InnerNetParams& g, std::vector<double> z) {
  for (std::size_t k = 0; k < g.layers.size(); ++k) {
    z = naive_matvec(g.layers[k], z);
    if (k + 1 < g.layers.size()) z = naive_relu(z);
  }
  return z;
}

inline std::vector<double> naive_two_layer(const TwoLayerParams& p, const Vec& x) {
  return naive_matvec(p.W2, naive_relu(naive_matvec(p.W1, to_std(x))));
}

inline std::vector<double> naive_skip(const SkipNetParams& p, const Vec& x) {
  const auto h = naive_relu(naive_matvec(p.W1, to_std(x)));
  const auto gz = naive_inner(p.theta, naive_matvec(p.V2, h));
  auto s = naive_matvec(p.V1, gz);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += h[i];
  return naive_matvec(p.W2, s);
}

inline std::vector<double> naive_linear_skip(const LinearSkipParams& p, const Vec& x) {
  auto s = naive_matvec(p.V, naive_inner(p.theta, to_std(x)));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += x(static_cast<Index>(i));
  return naive_matvec(p.W, s);
}

inline double naive_regularizer(const SkipNetParams& p) {
  double r = 0.0;
  for (Index i = 0; i < p.W1.rows(); ++i) {
    double row2 = 0.0;
    for (Index j = 0; j < p.W1.cols(); ++j) row2 += p.W1(i, j) * p.W1(i, j);
    double c2 = 0.0, cv = 0.0;
    for (Index k = 0; k < p.W2.rows(); ++k) c2 += std::abs(p.W2(k, i));
    for (Index k = 0; k < p.V2.rows(); ++k) cv += std::abs(p.V2(k, i));
    r += (c2 + cv) * std::sqrt(row2);
  }
  for (Index a = 0; a < p.W2.rows(); ++a) {
    for (Index b = 0; b < p.V1.cols(); ++b) {
      double s = 0.0;
      for (Index k = 0; k < p.W2.cols(); ++k) s += p.W2(a, k) * p.V1(k, b);
      r += std::abs(s);
    }
  }
  for (const Mat& l : p.theta.layers) {
    double f = 0.0;
    for (Index i = 0; i < l.rows(); ++i)
      for (Index j = 0; j < l.cols(); ++j) f += l(i, j) * l(i, j);
    r += std::sqrt(f);
  }
  return r;
}

/// Central finite-difference gradient of an arbitrary objective over every
/// block entry of P.
template <class P, class F>
P finite_difference_grad(const P& p, F&& f, double step = 1e-6) {
  P g = zeros_like(p);
  P work = p;
  auto wb = blocks(work);
  auto gb = blocks(g);
  for (std::size_t b = 0; b < wb.size(); ++b) {
    for (Index i = 0; i < wb[b]->size(); ++i) {
      double& e = wb[b]->data()[i];
      const double orig = e;
      e = orig + step;
      const double fp = f(work);
      e = orig - step;
      const double fm = f(work);
      e = orig;
      gb[b]->data()[i] = (fp - fm) / (2.0 * step);
    }
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||, floor) over the concatenated blocks.
template <class P>
double relative_error(const P& a, const P& b, double floor = 1e-8) {
  double diff = 0.0;
  auto ab = blocks(a);
  auto bb = blocks(b);
  for (std::size_t i = 0; i < ab.size(); ++i) diff += (*ab[i] - *bb[i]).squaredNorm();
  const double scale = std::max({std::sqrt(squared_norm(a)), std::sqrt(squared_norm(b)), floor});
  return std::sqrt(diff) / scale;
}

}  // namespace skipland::testing
