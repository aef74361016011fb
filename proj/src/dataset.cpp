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

#include "skipland/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "skipland/errors.hpp"
#include "textio.hpp"

namespace skipland {

Dataset::Dataset(Mat inputs, Mat targets) : x_(std::move(inputs)), y_(std::move(targets)) {
  if (x_.cols() < 1 || x_.rows() < 1 || y_.rows() < 1) {
    throw InvalidInput("dataset: needs at least one sample with non-empty x and y");
  }
  if (x_.cols() != y_.cols()) throw InvalidInput("dataset: x/y sample counts differ");
  require_finite(x_, "dataset inputs");
  require_finite(y_, "dataset targets");
  for (Index i = 0; i < x_.cols(); ++i) {
    bound_ = std::max({bound_, x_.col(i).norm(), y_.col(i).norm()});
  }
  sigma_ = (x_ * x_.transpose()) / static_cast<double>(x_.cols());
  sigma_ = 0.5 * (sigma_ + sigma_.transpose()).eval();
}

Dataset Dataset::head(Index count) const {
  const Index n = std::min(count, size());
  return Dataset(x_.leftCols(n), y_.leftCols(n));
}

void write_dataset(std::ostream& out, const Dataset& d) {
  out << "skipland-dataset 1\n";
  out << "n " << d.input_dim() << "\n";
  out << "d_y " << d.output_dim() << "\n";
  out << "samples " << d.size() << "\n";
  for (Index i = 0; i < d.size(); ++i) {
    for (Index j = 0; j < d.input_dim(); ++j) {
      out << (j ? " " : "") << textio::format_double(d.inputs()(j, i));
    }
    for (Index j = 0; j < d.output_dim(); ++j) {
      out << " " << textio::format_double(d.targets()(j, i));
    }
    out << "\n";
  }
}

Dataset read_dataset(std::istream& in) {
  textio::TokenReader r(in);
  r.expect("skipland-dataset");
  if (r.integer("version") != 1) throw InvalidInput("dataset: unsupported version");
  r.expect("n");
  const Index n = r.count("n");
  r.expect("d_y");
  const Index dy = r.count("d_y");
  r.expect("samples");
  const Index count = r.count("samples");
  if (n < 1 || dy < 1 || count < 1) throw InvalidInput("dataset: empty dimensions");
  Mat X(n, count);
  Mat Y(dy, count);
  for (Index i = 0; i < count; ++i) {
    for (Index j = 0; j < n; ++j) X(j, i) = r.real("x");
    for (Index j = 0; j < dy; ++j) Y(j, i) = r.real("y");
  }
  if (!r.at_end()) throw InvalidInput("dataset: trailing data after declared samples");
  return Dataset(std::move(X), std::move(Y));
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  write_dataset(out, d);
  if (!out) throw InvalidInput("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace skipland
