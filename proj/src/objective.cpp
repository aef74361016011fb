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

#include "skipland/objective.hpp"

#include <cmath>

#include "skipland/errors.hpp"

namespace skipland {

namespace {

void check_dims(Index in, Index out, const Dataset& d, const char* who) {
  if (in != d.input_dim() || out != d.output_dim()) {
    throw InvalidInput(std::string(who) + ": model dims do not match dataset");
  }
}

// Forward pass through g keeping what the backward pass needs.
struct InnerTrace {
  std::vector<Mat> inputs;  // input to layer k
  std::vector<Mat> pre;     // pre-activation of layer k
  Mat out;
};

InnerTrace inner_forward(const InnerNetParams& g, const Mat& Z) {
  InnerTrace t;
  Mat u = Z;
  for (std::size_t k = 0; k < g.layers.size(); ++k) {
    t.inputs.push_back(u);
    Mat a = g.layers[k] * u;
    u = (k + 1 < g.layers.size()) ? relu_mat(a) : a;
    t.pre.push_back(std::move(a));
  }
  t.out = std::move(u);
  return t;
}

// Back-propagates dOut through g; fills layer gradients and returns dZ.
Mat inner_backward(const InnerNetParams& g, const InnerTrace& t, Mat d_out,
                   std::vector<Mat>& layer_grads) {
  layer_grads.resize(g.layers.size());
  Mat delta = std::move(d_out);
  for (std::size_t k = g.layers.size(); k-- > 0;) {
    if (k + 1 < g.layers.size()) {
      delta = delta.cwiseProduct((t.pre[k].array() > 0.0).cast<double>().matrix());
    }
    layer_grads[k] = delta * t.inputs[k].transpose();
    delta = g.layers[k].transpose() * delta;
  }
  return delta;
}

Mat safe_unit_rows(const Mat& W) {
  Mat out = W;
  for (Index i = 0; i < W.rows(); ++i) {
    const double n = W.row(i).norm();
    out.row(i) = n > 0.0 ? Eigen::RowVectorXd(W.row(i) / n) : Eigen::RowVectorXd::Zero(W.cols());
  }
  return out;
}

}  // namespace

std::array<double, 4> group_norms(const SkipNetParams& p) {
  std::array<double, 4> g{};
  for (Index i = 0; i < p.W1.rows(); ++i) {
    const double r = p.W1.row(i).norm();
    g[0] += p.W2.col(i).cwiseAbs().sum() * r;
    g[1] += p.V2.col(i).cwiseAbs().sum() * r;
  }
  g[2] = l1_norm(p.W2 * p.V1);
  for (const Mat& l : p.theta.layers) g[3] += l.norm();
  return g;
}

double regularizer(const SkipNetParams& p) {
  const auto g = group_norms(p);
  return g[0] + g[1] + g[2] + g[3];
}

double objective_unregularized(const TwoLayerParams& p, const Dataset& d, const LossConfig& cfg) {
  check_dims(p.input_dim(), p.output_dim(), d, "objective");
  return mean_loss(forward_two_layer(p, d.inputs()), d.targets(), cfg);
}

double objective_unregularized(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg) {
  check_dims(p.input_dim(), p.output_dim(), d, "objective");
  return mean_loss(forward_skip(p, d.inputs()), d.targets(), cfg);
}

double objective_unregularized(const LinearSkipParams& p, const Dataset& d,
                               const LossConfig& cfg) {
  check_dims(p.input_dim(), p.output_dim(), d, "objective");
  return mean_loss(forward_linear_skip(p, d.inputs()), d.targets(), cfg);
}

double objective(const TwoLayerParams& p, const Dataset& d, const LossConfig& cfg) {
  return objective_unregularized(p, d, cfg) + cfg.kappa * l1_norm(p.W2);
}

double objective(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg) {
  return objective_unregularized(p, d, cfg) + cfg.kappa * regularizer(p);
}

double objective(const LinearSkipParams& p, const Dataset& d, const LossConfig& cfg) {
  return objective_unregularized(p, d, cfg);
}

TwoLayerParams grad(const TwoLayerParams& p, const Dataset& d, const LossConfig& cfg) {
  check_dims(p.input_dim(), p.output_dim(), d, "grad");
  const Mat& X = d.inputs();
  const double inv_n = 1.0 / static_cast<double>(d.size());
  const Mat A = p.W1 * X;
  const Mat H = relu_mat(A);
  const Mat R = loss_output_grad(p.W2 * H, d.targets(), cfg) * inv_n;
  TwoLayerParams g;
  g.W2 = R * H.transpose() + cfg.kappa * sign_mat(p.W2);
  const Mat dA = (p.W2.transpose() * R).cwiseProduct((A.array() > 0.0).cast<double>().matrix());
  g.W1 = dA * X.transpose();
  return g;
}

SkipNetParams grad(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg) {
  check_dims(p.input_dim(), p.output_dim(), d, "grad");
  const Mat& X = d.inputs();
  const double inv_n = 1.0 / static_cast<double>(d.size());

  const Mat A = p.W1 * X;
  const Mat H = relu_mat(A);
  const Mat Z = p.V2 * H;
  const InnerTrace tr = inner_forward(p.theta, Z);
  const Mat S = H + p.V1 * tr.out;
  const Mat R = loss_output_grad(p.W2 * S, d.targets(), cfg) * inv_n;

  SkipNetParams g;
  g.W2 = R * S.transpose();
  const Mat dS = p.W2.transpose() * R;
  g.V1 = dS * tr.out.transpose();
  const Mat dZ = inner_backward(p.theta, tr, p.V1.transpose() * dS, g.theta.layers);
  g.V2 = dZ * H.transpose();
  const Mat dA = (dS + p.V2.transpose() * dZ)
                     .cwiseProduct((A.array() > 0.0).cast<double>().matrix());
  g.W1 = dA * X.transpose();

  if (cfg.kappa != 0.0) {
    const double k = cfg.kappa;
    const Mat unit_rows = safe_unit_rows(p.W1);
    for (Index i = 0; i < p.W1.rows(); ++i) {
      const double r = p.W1.row(i).norm();
      g.W2.col(i) += k * r * sign_mat(p.W2.col(i));
      g.V2.col(i) += k * r * sign_mat(p.V2.col(i));
      const double mass = p.W2.col(i).cwiseAbs().sum() + p.V2.col(i).cwiseAbs().sum();
      g.W1.row(i) += k * mass * unit_rows.row(i);
    }
    const Mat sp = sign_mat(p.W2 * p.V1);
    g.W2 += k * sp * p.V1.transpose();
    g.V1 += k * p.W2.transpose() * sp;
    for (std::size_t l = 0; l < p.theta.layers.size(); ++l) {
      const double n = p.theta.layers[l].norm();
      if (n > 0.0) g.theta.layers[l] += (k / n) * p.theta.layers[l];
    }
  }
  return g;
}

LinearSkipParams grad(const LinearSkipParams& p, const Dataset& d, const LossConfig& cfg) {
  check_dims(p.input_dim(), p.output_dim(), d, "grad");
  const Mat& X = d.inputs();
  const double inv_n = 1.0 / static_cast<double>(d.size());
  const InnerTrace tr = inner_forward(p.theta, X);
  const Mat S = X + p.V * tr.out;
  const Mat R = loss_output_grad(p.W * S, d.targets(), cfg) * inv_n;
  LinearSkipParams g;
  g.W = R * S.transpose();
  const Mat dS = p.W.transpose() * R;
  g.V = dS * tr.out.transpose();
  inner_backward(p.theta, tr, p.V.transpose() * dS, g.theta.layers);
  return g;
}

double inner_lipschitz_estimate(const InnerNetParams& g, const Mat& Z) {
  if (Z.cols() == 0) return 0.0;
  const Mat out = forward_inner(g, Z);
  double best = 0.0;
  for (Index i = 0; i < Z.cols(); ++i) {
    const double zn = Z.col(i).norm();
    if (zn > 0.0) best = std::max(best, out.col(i).norm() / zn);
    if (i + 1 < Z.cols()) {
      const double dz = (Z.col(i + 1) - Z.col(i)).norm();
      if (dz > 0.0) best = std::max(best, (out.col(i + 1) - out.col(i)).norm() / dz);
    }
  }
  return best;
}

std::vector<double> radial_residuals(const SkipNetParams& p, const Dataset& d,
                                     const LossConfig& cfg) {
  constexpr double h = 1e-5;
  std::vector<double> out;
  const std::size_t nblocks = blocks(p).size();
  for (std::size_t b = 0; b < nblocks; ++b) {
    SkipNetParams plus = p;
    SkipNetParams minus = p;
    *blocks(plus)[b] *= (1.0 + h);
    *blocks(minus)[b] *= (1.0 - h);
    out.push_back((objective(plus, d, cfg) - objective(minus, d, cfg)) / (2.0 * h));
  }
  return out;
}

AssumptionReport check_assumptions(const SkipNetParams& p, const Dataset& d,
                                   const LossConfig& cfg, double grad_tol) {
  if (!(grad_tol > 0.0)) throw InvalidInput("check_assumptions: grad_tol must be positive");
  p.validate();
  AssumptionReport rep;
  rep.group_norms = group_norms(p);
  rep.C_bound = *std::max_element(rep.group_norms.begin(), rep.group_norms.end());
  rep.grad_norm = std::sqrt(squared_norm(grad(p, d, cfg)));
  rep.stationary = rep.grad_norm <= grad_tol;
  const Mat Z = p.V2 * relu_mat(p.W1 * d.inputs());
  rep.g_lipschitz_G0 = inner_lipschitz_estimate(p.theta, Z);
  rep.objective = objective(p, d, cfg);
  rep.block_names = block_names(p);
  rep.radial = radial_residuals(p, d, cfg);
  for (double r : rep.radial) rep.max_radial_residual = std::max(rep.max_radial_residual, std::abs(r));
  return rep;
}

}  // namespace skipland
