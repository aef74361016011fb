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
#include <cmath>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "skipland/errors.hpp"
#include "skipland/models.hpp"

namespace skipland {

enum class SegmentKind { descent, project, merge, rewire, final_layer_linear, constant };

std::string to_string(SegmentKind kind);

template <class P>
struct PathPoint {
  P params;
  bool rank_ok = true;
};

/// One piece of a path, parameterised by local s in [0, 1]. eval(0) and
/// eval(1) reproduce start and end exactly.
template <class P>
struct Segment {
  SegmentKind kind = SegmentKind::constant;
  bool reversed = false;
  P start;
  P end;
  std::function<PathPoint<P>(double)> eval;
  /// Interior local parameters where the segment has kinks.
  std::vector<double> knots;
  std::string note;

  PathPoint<P> at(double s) const { return eval(s); }
  std::string label() const { return reversed ? "reverse:" + to_string(kind) : to_string(kind); }
};

template <class P>
Segment<P> constant_segment(const P& p, SegmentKind kind = SegmentKind::constant) {
  Segment<P> s;
  s.kind = kind;
  s.start = p;
  s.end = p;
  s.eval = [p](double) { return PathPoint<P>{p, true}; };
  return s;
}

/// Straight line between two parameter points.
template <class P>
Segment<P> linear_segment(const P& a, const P& b, SegmentKind kind) {
  Segment<P> s;
  s.kind = kind;
  s.start = a;
  s.end = b;
  s.eval = [a, b](double t) { return PathPoint<P>{lerp(a, b, t), true}; };
  return s;
}

template <class P>
Segment<P> reverse(const Segment<P>& seg) {
  Segment<P> r = seg;
  r.reversed = !seg.reversed;
  r.start = seg.end;
  r.end = seg.start;
  auto f = seg.eval;
  r.eval = [f](double s) { return f(1.0 - s); };
  r.knots.clear();
  for (auto it = seg.knots.rbegin(); it != seg.knots.rend(); ++it) r.knots.push_back(1.0 - *it);
  return r;
}

/// Concatenation of segments; segment k owns global t in [k/K, (k+1)/K].
template <class P>
class ParamPath {
 public:
  ParamPath() = default;
  explicit ParamPath(std::vector<Segment<P>> segments) : segments_(std::move(segments)) {}

  const std::vector<Segment<P>>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }

  void push(Segment<P> seg) { segments_.push_back(std::move(seg)); }
  void append(const ParamPath& other) {
    segments_.insert(segments_.end(), other.segments_.begin(), other.segments_.end());
  }

  const P& front() const { return segments_.front().start; }
  const P& back() const { return segments_.back().end; }

  /// Segment index and local parameter for global t. Joints map to the
  /// start of the later segment, t = 1 to the end of the last.
  std::pair<std::size_t, double> locate(double t) const {
    if (segments_.empty()) throw InvalidInput("ParamPath: empty path");
    const double k = static_cast<double>(segments_.size());
    t = std::clamp(t, 0.0, 1.0);
    if (t >= 1.0) return {segments_.size() - 1, 1.0};
    const auto idx = std::min(static_cast<std::size_t>(std::floor(t * k)), segments_.size() - 1);
    const double s = std::clamp(t * k - static_cast<double>(idx), 0.0, 1.0);
    return {idx, s};
  }

  PathPoint<P> at(double t) const {
    const auto [idx, s] = locate(t);
    return segments_[idx].at(s);
  }

  /// Global t of every joint between segments.
  std::vector<double> joints() const {
    std::vector<double> out;
    for (std::size_t k = 1; k < segments_.size(); ++k) {
      out.push_back(static_cast<double>(k) / static_cast<double>(segments_.size()));
    }
    return out;
  }

  /// Largest entrywise mismatch between eval(1) of each segment and eval(0)
  /// of the next, and between each eval and its stored endpoints.
  double continuity_error() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const auto& seg = segments_[k];
      const P a = seg.at(0.0).params;
      const P b = seg.at(1.0).params;
      worst = std::max({worst, max_abs_diff(a, seg.start), max_abs_diff(b, seg.end)});
      if (k + 1 < segments_.size()) {
        worst = std::max(worst, max_abs_diff(b, segments_[k + 1].at(0.0).params));
      }
    }
    return worst;
  }

  ParamPath reversed() const {
    ParamPath r;
    for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) r.push(reverse(*it));
    return r;
  }

 private:
  std::vector<Segment<P>> segments_;
};

struct BarrierSample {
  double t = 0.0;
  double loss = 0.0;
  std::string segment;
  bool rank_ok = true;
};

struct BarrierReport {
  double lambda = 0.0;
  double f_star = 0.0;
  std::vector<BarrierSample> samples;  // sorted by t
  double max_loss = 0.0;
  double depth_epsilon = 0.0;
  double predicted_bound = 0.0;
  double eps_m_eta = 0.0;
  Index m = 0;
  Index n = 0;
  double eta = 0.0;
  Index perturbations = 0;
  Index rank_flagged = 0;
};

/// Samples F along the path on `grid` uniform points of [0, 1] plus every
/// joint and fills lambda, max_loss and depth_epsilon. The caller sets the
/// instance metadata.
template <class P>
BarrierReport measure_depth(const ParamPath<P>& path, const std::function<double(const P&)>& F,
                            Index grid, double f_star) {
  if (grid < 2) throw InvalidInput("measure_depth: grid must be at least 2");
  if (path.empty()) throw InvalidInput("measure_depth: empty path");
  std::vector<double> ts;
  for (Index i = 0; i < grid; ++i) ts.push_back(static_cast<double>(i) / static_cast<double>(grid - 1));
  const auto joints = path.joints();
  ts.insert(ts.end(), joints.begin(), joints.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  BarrierReport r;
  r.f_star = f_star;
  r.samples.reserve(ts.size());
  r.max_loss = -std::numeric_limits<double>::infinity();
  for (double t : ts) {
    const auto [idx, s] = path.locate(t);
    const auto pt = path.segments()[idx].at(s);
    const double f = F(pt.params);
    if (!std::isfinite(f)) throw NumericalError("measure_depth: non-finite loss along path");
    r.samples.push_back({t, f, path.segments()[idx].label(), pt.rank_ok});
    r.max_loss = std::max(r.max_loss, f);
    if (!pt.rank_ok) ++r.rank_flagged;
  }
  r.lambda = std::max(r.samples.front().loss, r.samples.back().loss);
  r.depth_epsilon = std::max(0.0, r.max_loss - std::max(r.lambda, f_star));
  return r;
}

/// barrier.csv: t,loss,segment,rank_ok
void write_barrier_csv(std::ostream& out, const BarrierReport& r);
/// key = value summary of the scalar report fields.
void write_barrier_summary(std::ostream& out, const BarrierReport& r);

}  // namespace skipland
