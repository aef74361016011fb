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

#include "skipland/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skipland/errors.hpp"
#include "skipland/models.hpp"

namespace skipland {

namespace {

// Keeps rescaled vectors inside their target radius despite rounding.
constexpr double kShrink = 1.0 - 4.0 * std::numeric_limits<double>::epsilon();

Mat gaussian(std::mt19937_64& rng, Index r, Index c, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  }
  return m;
}

Mat unit_rows(std::mt19937_64& rng, Index r, Index c) {
  Mat m = gaussian(rng, r, c, 1.0);
  for (Index i = 0; i < r; ++i) {
    const double norm = m.row(i).norm();
    if (norm > 0.0) {
      m.row(i) /= norm;
    } else {
      m.row(i).setZero();
      m(i, 0) = 1.0;
    }
  }
  return m;
}

}  // namespace

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"teacher-two-layer", "teacher-skip", "trig"};
  return names;
}

void GenSpec::validate() const {
  const auto& names = generator_names();
  if (std::find(names.begin(), names.end(), generator) == names.end()) {
    throw ConfigError("unknown generator '" + generator + "'");
  }
  if (n < 1 || d_y < 1) throw ConfigError("generator: n and d_y must be positive");
  if (samples < 1) throw ConfigError("generator: samples must be positive");
  if (teacher_width < 1) throw ConfigError("generator: teacher_width must be positive");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("generator: noise must be >= 0");
  if (!(output_clip > 0.0) || !std::isfinite(output_clip)) throw ConfigError("generator: output_clip must be positive");
  if (!std::isfinite(trig_frequency)) throw ConfigError("generator: trig_frequency must be finite");
  if (d_g < 1 || d_o < 1) throw ConfigError("generator: d_g and d_o must be positive");
  for (Index h : inner_hidden) {
    if (h < 1) throw ConfigError("generator: inner hidden widths must be positive");
  }
}

Mat uniform_ball(std::mt19937_64& rng, Index n, Index count) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat x = gaussian(rng, n, count, 1.0);
  for (Index j = 0; j < count; ++j) {
    const double r = x.col(j).norm();
    const double radius = std::pow(u(rng), 1.0 / static_cast<double>(n));
    if (r > 0.0) x.col(j) *= kShrink * radius / r;
  }
  return x;
}

Dataset gen_dataset(const GenSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  const Mat X = uniform_ball(rng, spec.n, spec.samples);
  Mat Y;
  if (spec.generator == "teacher-two-layer") {
    TwoLayerParams t;
    t.W1 = unit_rows(rng, spec.teacher_width, spec.n);
    t.W2 = gaussian(rng, spec.d_y, spec.teacher_width, 1.0 / std::sqrt(static_cast<double>(spec.teacher_width)));
    Y = forward_two_layer(t, X);
  } else if (spec.generator == "teacher-skip") {
    const double sm = 1.0 / std::sqrt(static_cast<double>(spec.teacher_width));
    SkipNetParams t;
    t.W1 = unit_rows(rng, spec.teacher_width, spec.n);
    t.W2 = gaussian(rng, spec.d_y, spec.teacher_width, sm);
    t.V2 = gaussian(rng, spec.d_g, spec.teacher_width, sm);
    t.V1 = gaussian(rng, spec.teacher_width, spec.d_o, sm);
    std::vector<Index> sizes{spec.d_g};
    sizes.insert(sizes.end(), spec.inner_hidden.begin(), spec.inner_hidden.end());
    sizes.push_back(spec.d_o);
    for (std::size_t k = 1; k < sizes.size(); ++k) {
      t.theta.layers.push_back(gaussian(rng, sizes[k], sizes[k - 1],
                                        std::sqrt(2.0 / static_cast<double>(sizes[k - 1]))));
    }
    Y = forward_skip(t, X);
  } else {
    const Mat A = unit_rows(rng, spec.d_y, spec.n) * spec.trig_frequency;
    Y = (A * X).array().sin().matrix();
  }
  if (spec.noise > 0.0) Y += gaussian(rng, spec.d_y, spec.samples, spec.noise);
  for (Index j = 0; j < Y.cols(); ++j) {
    const double r = Y.col(j).norm();
    if (r > spec.output_clip) Y.col(j) *= kShrink * spec.output_clip / r;
  }
  return Dataset(X, Y);
}

}  // namespace skipland
