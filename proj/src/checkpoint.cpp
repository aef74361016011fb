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

#include "skipland/checkpoint.hpp"

#include <fstream>
#include <map>
#include <utility>
#include <vector>

#include "skipland/errors.hpp"
#include "textio.hpp"

namespace skipland {

namespace {

using Dims = std::vector<std::pair<std::string, Index>>;

Dims dims_of(const SkipNetParams& p) {
  return {{"n", p.input_dim()}, {"m", p.width()}, {"d_y", p.output_dim()},
          {"d_g", p.V2.rows()}, {"d_o", p.V1.cols()}};
}
Dims dims_of(const TwoLayerParams& p) {
  return {{"n", p.input_dim()}, {"m", p.width()}, {"d_y", p.output_dim()}};
}
Dims dims_of(const LinearSkipParams& p) {
  return {{"d_x", p.input_dim()}, {"d_y", p.output_dim()}, {"d_z", p.feature_dim()}};
}

const InnerNetParams* inner_of(const SkipNetParams& p) { return &p.theta; }
const InnerNetParams* inner_of(const TwoLayerParams&) { return nullptr; }
const InnerNetParams* inner_of(const LinearSkipParams& p) { return &p.theta; }

template <class P>
void write_typed(std::ostream& out, const P& p, const std::string& family) {
  p.validate();
  out << "skipland-checkpoint 1\nfamily " << family << "\ndims";
  for (const auto& [name, v] : dims_of(p)) out << ' ' << name << ' ' << v;
  out << '\n';
  if (const InnerNetParams* g = inner_of(p)) {
    const auto sizes = g->sizes();
    out << "inner " << sizes.size();
    for (Index s : sizes) out << ' ' << s;
    out << '\n';
  }
  const auto b = blocks(p);
  const auto names = block_names(p);
  out << "matrices " << b.size() << '\n';
  for (std::size_t k = 0; k < b.size(); ++k) {
    const Mat& M = *b[k];
    out << "matrix " << names[k] << ' ' << M.rows() << ' ' << M.cols() << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
      for (Index j = 0; j < M.cols(); ++j) out << (j ? " " : "") << textio::format_double(M(i, j));
      out << '\n';
    }
  }
}

template <class P>
void check_dims(const P& p, const Dims& declared, const std::vector<Index>& inner) {
  if (dims_of(p) != declared) throw InvalidInput("checkpoint: dims line disagrees with matrix shapes");
  const InnerNetParams* g = inner_of(p);
  if (g && g->sizes() != inner) throw InvalidInput("checkpoint: inner sizes disagree with theta shapes");
}

InnerNetParams take_theta(std::map<std::string, Mat>& mats, std::size_t count) {
  InnerNetParams g;
  for (std::size_t k = 1; k <= count; ++k) {
    const auto it = mats.find("theta" + std::to_string(k));
    if (it == mats.end()) throw InvalidInput("checkpoint: missing theta" + std::to_string(k));
    g.layers.push_back(std::move(it->second));
    mats.erase(it);
  }
  return g;
}

Mat take(std::map<std::string, Mat>& mats, const std::string& name) {
  const auto it = mats.find(name);
  if (it == mats.end()) throw InvalidInput("checkpoint: missing matrix " + name);
  Mat M = std::move(it->second);
  mats.erase(it);
  return M;
}

}  // namespace

std::string family_name(const AnyParams& p) {
  switch (p.index()) {
    case 0: return "skip";
    case 1: return "two-layer";
    default: return "linear";
  }
}

void write_checkpoint(std::ostream& out, const AnyParams& p) {
  std::visit([&](const auto& q) { write_typed(out, q, family_name(p)); }, p);
  if (!out) throw InvalidInput("checkpoint: write failed");
}

AnyParams read_checkpoint(std::istream& in) {
  textio::TokenReader r(in);
  r.expect("skipland-checkpoint");
  if (r.integer("checkpoint version") != 1) throw InvalidInput("checkpoint: unsupported version");
  r.expect("family");
  const std::string family = r.next("family");
  if (family != "skip" && family != "two-layer" && family != "linear") {
    throw InvalidInput("checkpoint: unknown family '" + family + "'");
  }
  r.expect("dims");
  Dims dims;
  const std::size_t ndims = family == "two-layer" || family == "linear" ? 3 : 5;
  for (std::size_t k = 0; k < ndims; ++k) {
    std::string name = r.next("dim name");
    dims.emplace_back(std::move(name), static_cast<Index>(r.count("dim value")));
  }
  std::vector<Index> inner;
  if (family != "two-layer") {
    r.expect("inner");
    const auto count = r.count("inner size count");
    for (long long k = 0; k < count; ++k) inner.push_back(static_cast<Index>(r.count("inner size")));
    if (inner.size() < 2) throw InvalidInput("checkpoint: inner network needs at least two sizes");
  }
  r.expect("matrices");
  const auto nmat = r.count("matrix count");
  std::map<std::string, Mat> mats;
  for (long long k = 0; k < nmat; ++k) {
    r.expect("matrix");
    const std::string name = r.next("matrix name");
    const auto rows = r.count("matrix rows");
    const auto cols = r.count("matrix cols");
    Mat M(rows, cols);
    for (Index i = 0; i < M.rows(); ++i)
      for (Index j = 0; j < M.cols(); ++j) M(i, j) = r.real("matrix " + name);
    if (!mats.emplace(name, std::move(M)).second) throw InvalidInput("checkpoint: repeated matrix " + name);
  }
  if (!r.at_end()) throw InvalidInput("checkpoint: trailing content");

  const std::size_t layers = inner.empty() ? 0 : inner.size() - 1;
  AnyParams out;
  if (family == "skip") {
    SkipNetParams p;
    p.W1 = take(mats, "W1");
    p.W2 = take(mats, "W2");
    p.V2 = take(mats, "V2");
    p.V1 = take(mats, "V1");
    p.theta = take_theta(mats, layers);
    out = std::move(p);
  } else if (family == "two-layer") {
    TwoLayerParams p;
    p.W1 = take(mats, "W1");
    p.W2 = take(mats, "W2");
    out = std::move(p);
  } else {
    LinearSkipParams p;
    p.W = take(mats, "W");
    p.V = take(mats, "V");
    p.theta = take_theta(mats, layers);
    out = std::move(p);
  }
  if (!mats.empty()) throw InvalidInput("checkpoint: unexpected matrix " + mats.begin()->first);
  std::visit(
      [&](const auto& q) {
        q.validate();
        check_dims(q, dims, inner);
      },
      out);
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const AnyParams& p) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  write_checkpoint(out, p);
}

AnyParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

namespace {
template <class P>
P load_as(const std::filesystem::path& path, const char* family) {
  AnyParams a = load_checkpoint(path);
  if (auto* p = std::get_if<P>(&a)) return std::move(*p);
  throw InvalidInput("checkpoint " + path.string() + " holds a " + family_name(a) + " network, expected " + family);
}
}  // namespace

SkipNetParams load_skip_checkpoint(const std::filesystem::path& path) { return load_as<SkipNetParams>(path, "skip"); }
TwoLayerParams load_two_layer_checkpoint(const std::filesystem::path& path) {
  return load_as<TwoLayerParams>(path, "two-layer");
}
LinearSkipParams load_linear_checkpoint(const std::filesystem::path& path) {
  return load_as<LinearSkipParams>(path, "linear");
}

}  // namespace skipland
