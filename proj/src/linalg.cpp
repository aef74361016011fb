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

#include "skipland/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "skipland/errors.hpp"

namespace skipland {

namespace {

Eigen::JacobiSVD<Mat> thin_svd(const Mat& w) {
  return Eigen::JacobiSVD<Mat>(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace

Mat pinv(const Mat& w, double rank_tol) {
  require_finite(w, "pinv input");
  if (!(rank_tol > 0.0)) throw InvalidInput("pinv: rank_tol must be positive");
  const auto svd = thin_svd(w);
  const Vec& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rank_tol * s(0) : 0.0;
  Vec s_inv = Vec::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) s_inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

Index numerical_rank(const Mat& w, double rel_tol) {
  const Vec s = singular_values(w);
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cutoff = rel_tol * s(0);
  return static_cast<Index>(std::count_if(s.begin(), s.end(),
                                          [&](double v) { return v > cutoff; }));
}

Vec singular_values(const Mat& w) {
  return Eigen::JacobiSVD<Mat>(w).singularValues();
}

double op_norm(const Mat& w) {
  const Vec s = singular_values(w);
  return s.size() > 0 ? s(0) : 0.0;
}

double angle(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw InvalidInput("angle: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw InvalidInput("angle: zero vector");
  const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
  return std::acos(c);
}

Vec relu(const Vec& v) { return v.cwiseMax(0.0); }

Mat relu_mat(const Mat& m) { return m.cwiseMax(0.0); }

double l1_norm(const Mat& m) { return m.cwiseAbs().sum(); }

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Mat sign_mat(const Mat& m) {
  return m.unaryExpr([](double x) { return sign0(x); });
}

bool all_finite(const Mat& m) { return m.allFinite(); }

void require_finite(const Mat& m, std::string_view what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

}  // namespace skipland
