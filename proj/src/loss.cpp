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

#include "skipland/loss.hpp"

#include <cmath>

#include "skipland/errors.hpp"

namespace skipland {

void LossConfig::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be >= 0");
  if (kind == LossKind::huber && !(huber_delta > 0.0)) {
    throw ConfigError("huber delta must be positive");
  }
}

std::string to_string(LossKind kind) { return kind == LossKind::mse ? "mse" : "huber"; }

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "huber") return LossKind::huber;
  throw ConfigError("unknown loss '" + name + "'");
}

namespace {

double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? r * r : 2.0 * delta * a - delta * delta;
}

double huber_grad(double r, double delta) {
  if (std::abs(r) <= delta) return 2.0 * r;
  return 2.0 * delta * sign0(r);
}

}  // namespace

double sample_loss(const Vec& f, const Vec& y, const LossConfig& cfg) {
  if (f.size() != y.size()) throw InvalidInput("loss: output/target dim mismatch");
  if (cfg.kind == LossKind::mse) return (f - y).squaredNorm();
  double s = 0.0;
  for (Index j = 0; j < f.size(); ++j) s += huber(f(j) - y(j), cfg.huber_delta);
  return s;
}

double mean_loss(const Mat& F, const Mat& Y, const LossConfig& cfg) {
  if (F.rows() != Y.rows() || F.cols() != Y.cols()) {
    throw InvalidInput("loss: output/target shape mismatch");
  }
  double total = 0.0;
  for (Index i = 0; i < F.cols(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < F.rows(); ++j) {
      const double r = F(j, i) - Y(j, i);
      s += cfg.kind == LossKind::mse ? r * r : huber(r, cfg.huber_delta);
    }
    total += s;
  }
  return total / static_cast<double>(F.cols());
}

Mat loss_output_grad(const Mat& F, const Mat& Y, const LossConfig& cfg) {
  if (cfg.kind == LossKind::mse) return 2.0 * (F - Y);
  Mat G(F.rows(), F.cols());
  for (Index i = 0; i < F.cols(); ++i) {
    for (Index j = 0; j < F.rows(); ++j) G(j, i) = huber_grad(F(j, i) - Y(j, i), cfg.huber_delta);
  }
  return G;
}

double lipschitz_bound(const LossConfig& cfg, double output_radius, double target_radius,
                       Index output_dim) {
  if (cfg.kind == LossKind::mse) return 2.0 * (output_radius + target_radius);
  return 2.0 * cfg.huber_delta * std::sqrt(static_cast<double>(output_dim));
}

}  // namespace skipland
