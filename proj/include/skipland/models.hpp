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

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "skipland/linalg.hpp"

namespace skipland {

/// f2(x) = W2 relu(W1 x).  W1 is m x n, W2 is d_y x m.
struct TwoLayerParams {
  Mat W1;
  Mat W2;

  Index input_dim() const { return W1.cols(); }
  Index width() const { return W1.rows(); }
  Index output_dim() const { return W2.rows(); }
  void validate() const;
};

/// Inner ReLU network g: theta_k relu(... relu(theta_1 z)). The last layer
/// is linear. Each layer is (out x in).
struct InnerNetParams {
  std::vector<Mat> layers;

  Index input_dim() const { return layers.front().cols(); }
  Index output_dim() const { return layers.back().rows(); }
  /// Layer sizes as a chain: {in, hidden..., out}.
  std::vector<Index> sizes() const;
  void validate() const;

  static InnerNetParams zeros(const std::vector<Index>& sizes);
};

/// f1(x) = W2 [relu(W1 x) + V1 g(theta, V2 relu(W1 x))].
/// W1: m x n, W2: d_y x m, V2: d_g x m, V1: m x d_o.
struct SkipNetParams {
  Mat W1;
  Mat W2;
  Mat V2;
  Mat V1;
  InnerNetParams theta;

  Index input_dim() const { return W1.cols(); }
  Index width() const { return W1.rows(); }
  Index output_dim() const { return W2.rows(); }
  void validate() const;
};

/// f(x) = W (x + V g(theta, x)). theta is a frozen feature map into R^{d_z}.
/// Construction through validate() enforces d_y <= min(d_x, d_z).
struct LinearSkipParams {
  Mat W;
  Mat V;
  InnerNetParams theta;

  Index input_dim() const { return W.cols(); }
  Index output_dim() const { return W.rows(); }
  Index feature_dim() const { return V.cols(); }
  void validate() const;
};

// Single-sample forward passes.
Vec forward_two_layer(const TwoLayerParams& p, const Vec& x);
Vec forward_inner(const InnerNetParams& g, const Vec& z);
Vec forward_skip(const SkipNetParams& p, const Vec& x, Vec* hidden = nullptr);
Vec forward_linear_skip(const LinearSkipParams& p, const Vec& x);

// Batched forward passes; columns of X are samples.
Mat forward_two_layer(const TwoLayerParams& p, const Mat& X);
Mat forward_inner(const InnerNetParams& g, const Mat& Z);
Mat forward_skip(const SkipNetParams& p, const Mat& X);
Mat forward_linear_skip(const LinearSkipParams& p, const Mat& X);

// Block views used by the generic parameter arithmetic below.
std::vector<Mat*> blocks(TwoLayerParams& p);
std::vector<const Mat*> blocks(const TwoLayerParams& p);
std::vector<Mat*> blocks(SkipNetParams& p);
std::vector<const Mat*> blocks(const SkipNetParams& p);
std::vector<Mat*> blocks(LinearSkipParams& p);
std::vector<const Mat*> blocks(const LinearSkipParams& p);

std::vector<std::string> block_names(const TwoLayerParams& p);
std::vector<std::string> block_names(const SkipNetParams& p);
std::vector<std::string> block_names(const LinearSkipParams& p);

/// Block-wise a + s * d.
template <class P>
P axpy(const P& a, double s, const P& d) {
  P out = a;
  auto ob = blocks(out);
  auto db = blocks(d);
  for (std::size_t i = 0; i < ob.size(); ++i) *ob[i] += s * *db[i];
  return out;
}

/// (1 - t) a + t b, evaluated so that t = 0 and t = 1 reproduce a and b exactly.
template <class P>
P lerp(const P& a, const P& b, double t) {
  P out = a;
  auto ob = blocks(out);
  auto ab = blocks(a);
  auto bb = blocks(b);
  for (std::size_t i = 0; i < ob.size(); ++i) {
    *ob[i] = (1.0 - t) * *ab[i] + t * *bb[i];
  }
  return out;
}

template <class P>
double dot(const P& a, const P& b) {
  double s = 0.0;
  auto ab = blocks(a);
  auto bb = blocks(b);
  for (std::size_t i = 0; i < ab.size(); ++i) s += ab[i]->cwiseProduct(*bb[i]).sum();
  return s;
}

template <class P>
double squared_norm(const P& a) {
  return dot(a, a);
}

/// Largest absolute entrywise difference over all blocks.
template <class P>
double max_abs_diff(const P& a, const P& b) {
  double m = 0.0;
  auto ab = blocks(a);
  auto bb = blocks(b);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i]->rows() != bb[i]->rows() || ab[i]->cols() != bb[i]->cols()) {
      return std::numeric_limits<double>::infinity();
    }
    if (ab[i]->size() > 0) m = std::max(m, (*ab[i] - *bb[i]).cwiseAbs().maxCoeff());
  }
  return m;
}

template <class P>
bool same_shape(const P& a, const P& b) {
  auto ab = blocks(a);
  auto bb = blocks(b);
  if (ab.size() != bb.size()) return false;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    if (ab[i]->rows() != bb[i]->rows() || ab[i]->cols() != bb[i]->cols()) return false;
  }
  return true;
}

template <class P>
P zeros_like(const P& a) {
  P out = a;
  for (Mat* b : blocks(out)) b->setZero();
  return out;
}

template <class P>
bool params_finite(const P& a) {
  for (const Mat* b : blocks(a)) {
    if (!b->allFinite()) return false;
  }
  return true;
}

}  // namespace skipland
