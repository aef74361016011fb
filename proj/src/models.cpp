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

#include "skipland/models.hpp"

#include <string>

#include "skipland/errors.hpp"

namespace skipland {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidInput(msg);
}

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void TwoLayerParams::validate() const {
  require(W1.rows() >= 1 && W1.cols() >= 1, "two-layer: empty W1");
  require(W2.rows() >= 1, "two-layer: empty W2");
  require(W2.cols() == W1.rows(),
          "two-layer: W2 " + shape(W2) + " incompatible with W1 " + shape(W1));
  require_finite(W1, "W1");
  require_finite(W2, "W2");
}

std::vector<Index> InnerNetParams::sizes() const {
  std::vector<Index> out;
  if (layers.empty()) return out;
  out.push_back(layers.front().cols());
  for (const Mat& l : layers) out.push_back(l.rows());
  return out;
}

void InnerNetParams::validate() const {
  require(!layers.empty(), "inner network needs at least one layer");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    require(layers[k].rows() >= 1 && layers[k].cols() >= 1, "inner network: empty layer");
    if (k > 0) {
      require(layers[k].cols() == layers[k - 1].rows(),
              "inner network: layer " + std::to_string(k) + " " + shape(layers[k]) +
                  " does not follow " + shape(layers[k - 1]));
    }
    require_finite(layers[k], "theta");
  }
}

InnerNetParams InnerNetParams::zeros(const std::vector<Index>& sizes) {
  if (sizes.size() < 2) throw InvalidInput("inner network sizes need input and output");
  InnerNetParams g;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    g.layers.push_back(Mat::Zero(sizes[k], sizes[k - 1]));
  }
  return g;
}

void SkipNetParams::validate() const {
  require(W1.rows() >= 1 && W1.cols() >= 1, "skip: empty W1");
  const Index m = W1.rows();
  require(W2.rows() >= 1 && W2.cols() == m, "skip: W2 " + shape(W2) + " needs " +
                                                std::to_string(m) + " columns");
  require(V2.cols() == m, "skip: V2 " + shape(V2) + " needs " + std::to_string(m) + " columns");
  require(V1.rows() == m, "skip: V1 " + shape(V1) + " needs " + std::to_string(m) + " rows");
  theta.validate();
  require(theta.input_dim() == V2.rows(), "skip: g input dim differs from V2 rows");
  require(theta.output_dim() == V1.cols(), "skip: g output dim differs from V1 cols");
  for (const Mat* b : blocks(*this)) require_finite(*b, "skip parameters");
}

void LinearSkipParams::validate() const {
  require(W.rows() >= 1 && W.cols() >= 1, "linear skip: empty W");
  require(V.rows() == W.cols(), "linear skip: V " + shape(V) + " incompatible with W " + shape(W));
  theta.validate();
  require(theta.input_dim() == W.cols(), "linear skip: g input dim must equal d_x");
  require(theta.output_dim() == V.cols(), "linear skip: g output dim must equal d_z");
  if (W.rows() > std::min(W.cols(), V.cols())) {
    throw UnsupportedConfiguration("linear skip: requires d_y <= min(d_x, d_z)");
  }
  for (const Mat* b : blocks(*this)) require_finite(*b, "linear skip parameters");
}

Vec forward_two_layer(const TwoLayerParams& p, const Vec& x) {
  require(x.size() == p.input_dim(), "forward_two_layer: input dim mismatch");
  return p.W2 * relu(p.W1 * x);
}

Mat forward_two_layer(const TwoLayerParams& p, const Mat& X) {
  require(X.rows() == p.input_dim(), "forward_two_layer: input dim mismatch");
  return p.W2 * relu_mat(p.W1 * X);
}

Vec forward_inner(const InnerNetParams& g, const Vec& z) {
  require(z.size() == g.input_dim(), "forward_inner: input dim mismatch");
  Vec u = z;
  for (std::size_t k = 0; k < g.layers.size(); ++k) {
    u = g.layers[k] * u;
    if (k + 1 < g.layers.size()) u = relu(u);
  }
  return u;
}

Mat forward_inner(const InnerNetParams& g, const Mat& Z) {
  require(Z.rows() == g.input_dim(), "forward_inner: input dim mismatch");
  Mat u = Z;
  for (std::size_t k = 0; k < g.layers.size(); ++k) {
    u = g.layers[k] * u;
    if (k + 1 < g.layers.size()) u = relu_mat(u);
  }
  return u;
}

Vec forward_skip(const SkipNetParams& p, const Vec& x, Vec* hidden) {
  require(x.size() == p.input_dim(), "forward_skip: input dim mismatch");
  Vec h = relu(p.W1 * x);
  Vec s = h + p.V1 * forward_inner(p.theta, Vec(p.V2 * h));
  if (hidden) *hidden = h;
  return p.W2 * s;
}

Mat forward_skip(const SkipNetParams& p, const Mat& X) {
  require(X.rows() == p.input_dim(), "forward_skip: input dim mismatch");
  const Mat h = relu_mat(p.W1 * X);
  const Mat s = h + p.V1 * forward_inner(p.theta, Mat(p.V2 * h));
  return p.W2 * s;
}

Vec forward_linear_skip(const LinearSkipParams& p, const Vec& x) {
  require(x.size() == p.input_dim(), "forward_linear_skip: input dim mismatch");
  return p.W * (x + p.V * forward_inner(p.theta, x));
}

Mat forward_linear_skip(const LinearSkipParams& p, const Mat& X) {
  require(X.rows() == p.input_dim(), "forward_linear_skip: input dim mismatch");
  return p.W * (X + p.V * forward_inner(p.theta, X));
}

std::vector<Mat*> blocks(TwoLayerParams& p) { return {&p.W1, &p.W2}; }
std::vector<const Mat*> blocks(const TwoLayerParams& p) { return {&p.W1, &p.W2}; }

std::vector<Mat*> blocks(SkipNetParams& p) {
  std::vector<Mat*> out{&p.W1, &p.W2, &p.V2, &p.V1};
  for (Mat& l : p.theta.layers) out.push_back(&l);
  return out;
}

std::vector<const Mat*> blocks(const SkipNetParams& p) {
  std::vector<const Mat*> out{&p.W1, &p.W2, &p.V2, &p.V1};
  for (const Mat& l : p.theta.layers) out.push_back(&l);
  return out;
}

std::vector<Mat*> blocks(LinearSkipParams& p) {
  std::vector<Mat*> out{&p.W, &p.V};
  for (Mat& l : p.theta.layers) out.push_back(&l);
  return out;
}

std::vector<const Mat*> blocks(const LinearSkipParams& p) {
  std::vector<const Mat*> out{&p.W, &p.V};
  for (const Mat& l : p.theta.layers) out.push_back(&l);
  return out;
}

std::vector<std::string> block_names(const TwoLayerParams&) { return {"W1", "W2"}; }

std::vector<std::string> block_names(const SkipNetParams& p) {
  std::vector<std::string> out{"W1", "W2", "V2", "V1"};
  for (std::size_t k = 0; k < p.theta.layers.size(); ++k) {
    out.push_back("theta" + std::to_string(k + 1));
  }
  return out;
}

std::vector<std::string> block_names(const LinearSkipParams& p) {
  std::vector<std::string> out{"W", "V"};
  for (std::size_t k = 0; k < p.theta.layers.size(); ++k) {
    out.push_back("theta" + std::to_string(k + 1));
  }
  return out;
}

}  // namespace skipland
