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

#include <filesystem>
#include <iosfwd>

#include "skipland/linalg.hpp"

namespace skipland {

/// Bounded regression sample. Columns of inputs()/targets() are samples.
/// Construction rejects empty or non-finite data and caches the bound
/// B = max_i max(||x_i||, ||y_i||) and the second moment (1/N) X X^T.
class Dataset {
 public:
  Dataset(Mat inputs, Mat targets);

  const Mat& inputs() const { return x_; }
  const Mat& targets() const { return y_; }
  Index size() const { return x_.cols(); }
  Index input_dim() const { return x_.rows(); }
  Index output_dim() const { return y_.rows(); }
  double bound() const { return bound_; }
  const Mat& second_moment() const { return sigma_; }

  Vec x(Index i) const { return x_.col(i); }
  Vec y(Index i) const { return y_.col(i); }

  /// The first `count` samples (or all if fewer).
  Dataset head(Index count) const;

 private:
  Mat x_;
  Mat y_;
  double bound_ = 0.0;
  Mat sigma_;
};

// Text format:
//   skipland-dataset 1
//   n <n>
//   d_y <d_y>
//   samples <N>
//   <x_1 ... x_n y_1 ... y_dy>     (one line per sample, 17 significant digits)
void write_dataset(std::ostream& out, const Dataset& d);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace skipland
