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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "skipland/path.hpp"

namespace toy {

// A point in R^k, enough to exercise the generic path machinery.
struct Point {
  skipland::Mat v;
};
inline std::vector<skipland::Mat*> blocks(Point& p) { return {&p.v}; }
inline std::vector<const skipland::Mat*> blocks(const Point& p) { return {&p.v}; }

inline Point pt(double x, double y) {
  Point p{skipland::Mat(2, 1)};
  p.v << x, y;
  return p;
}
inline Point pt(double x) {
  Point p{skipland::Mat(1, 1)};
  p.v << x;
  return p;
}

}  // namespace toy

using namespace skipland;
using toy::Point;

namespace {

const std::function<double(const Point&)> kSquare = [](const Point& p) { return p.v(0) * p.v(0); };

// (x^2 - 1)^2 + c x + y^2: a higher local minimum near x = +1 and a lower one near x = -1.
constexpr double kTilt = 0.3;
double well(double x, double y) { return (x * x - 1) * (x * x - 1) + kTilt * x + y * y; }
double well_dx(double x) { return 4 * x * (x * x - 1) + kTilt; }
double well_dxx(double x) { return 12 * x * x - 4; }
double newton(double x) {
  for (int i = 0; i < 100; ++i) x -= well_dx(x) / well_dxx(x);
  return x;
}
const std::function<double(const Point&)> kWell = [](const Point& p) { return well(p.v(0), p.v(1)); };

}  // namespace

TEST(Path, LocateAndJoints) {
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(0.0), toy::pt(1.0), SegmentKind::descent));
  path.push(linear_segment(toy::pt(1.0), toy::pt(3.0), SegmentKind::merge));
  EXPECT_EQ(path.joints(), std::vector<double>{0.5});
  EXPECT_DOUBLE_EQ(path.at(0.25).params.v(0), 0.5);
  EXPECT_DOUBLE_EQ(path.at(0.5).params.v(0), 1.0);
  EXPECT_DOUBLE_EQ(path.at(0.75).params.v(0), 2.0);
  EXPECT_EQ(path.at(1.0).params.v(0), 3.0);
  EXPECT_EQ(path.at(0.0).params.v(0), 0.0);
  EXPECT_EQ(path.continuity_error(), 0.0);
}

TEST(Path, ContinuityDetectsGap) {
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(0.0), toy::pt(1.0), SegmentKind::descent));
  path.push(linear_segment(toy::pt(1.5), toy::pt(3.0), SegmentKind::merge));
  EXPECT_DOUBLE_EQ(path.continuity_error(), 0.5);
}

TEST(Path, ReversalSwapsEndsAndLabels) {
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(0.0), toy::pt(1.0), SegmentKind::descent));
  path.push(linear_segment(toy::pt(1.0), toy::pt(3.0), SegmentKind::rewire));
  const auto r = path.reversed();
  EXPECT_EQ(r.front().v(0), 3.0);
  EXPECT_EQ(r.back().v(0), 0.0);
  EXPECT_EQ(r.segments()[0].label(), "reverse:rewire");
  EXPECT_EQ(r.segments()[1].label(), "reverse:descent");
  EXPECT_EQ(reverse(r.segments()[0]).label(), "rewire");
  for (double t : {0.0, 0.1, 0.3, 0.5, 0.77, 1.0}) {
    EXPECT_NEAR(r.at(t).params.v(0), path.at(1.0 - t).params.v(0), 1e-15);
  }
  EXPECT_EQ(r.continuity_error(), 0.0);
}

TEST(Depth, ConstantPathHasZeroDepth) {
  ParamPath<Point> path;
  path.push(constant_segment(toy::pt(2.0)));
  const auto r = measure_depth(path, kSquare, 50, 0.0);
  EXPECT_EQ(r.depth_epsilon, 0.0);
  EXPECT_EQ(r.max_loss, 4.0);
  EXPECT_EQ(r.lambda, 4.0);
  EXPECT_EQ(r.samples.front().t, 0.0);
  EXPECT_EQ(r.samples.back().t, 1.0);
}

TEST(Depth, TentOnQuadratic) {
  // x: 1 -> 2 -> 0 on F = x^2. Peak 4 at the joint, endpoint max 1.
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(1.0), toy::pt(2.0), SegmentKind::descent));
  path.push(linear_segment(toy::pt(2.0), toy::pt(0.0), SegmentKind::descent));
  for (Index grid : {2, 7, 100}) {
    const auto r = measure_depth(path, kSquare, grid, 0.0);
    EXPECT_NEAR(r.depth_epsilon, 3.0, 1e-9) << grid;
    EXPECT_NEAR(r.lambda, 1.0, 1e-15);
  }
  // A reference level above the peak hides the barrier.
  EXPECT_EQ(measure_depth(path, kSquare, 10, 5.0).depth_epsilon, 0.0);
}

TEST(Depth, SamplesIncludeJointsAndAreSorted) {
  ParamPath<Point> path;
  for (int k = 0; k < 3; ++k) {
    path.push(linear_segment(toy::pt(k), toy::pt(k + 1.0), SegmentKind::merge));
  }
  const auto r = measure_depth(path, kSquare, 5, 0.0);
  for (double j : path.joints()) {
    EXPECT_TRUE(std::any_of(r.samples.begin(), r.samples.end(), [j](const BarrierSample& s) { return s.t == j; }));
  }
  EXPECT_TRUE(std::is_sorted(r.samples.begin(), r.samples.end(),
                             [](const BarrierSample& a, const BarrierSample& b) { return a.t < b.t; }));
  EXPECT_GE(r.max_loss, r.lambda - 1e-12);
}

TEST(Depth, GridBelowTwoRejected) {
  ParamPath<Point> path;
  path.push(constant_segment(toy::pt(0.0)));
  EXPECT_THROW(measure_depth(path, kSquare, 1, 0.0), InvalidInput);
  EXPECT_THROW(measure_depth(ParamPath<Point>{}, kSquare, 10, 0.0), InvalidInput);
}

TEST(Depth, DoubleWellEscapeMatchesAnalyticBarrier) {
  const double xa = newton(1.0);
  const double xs = newton(0.0);
  const double xb = newton(-1.0);
  ASSERT_GT(xa, 0.5);
  ASSERT_LT(xb, -0.5);
  ASSERT_GT(well(xa, 0), well(xb, 0));
  const double barrier = well(xs, 0) - well(xa, 0);

  // The ridge crossing y = 0 is the lowest pass, so the straight escape along it is optimal.
  ParamPath<Point> joint;
  joint.push(linear_segment(toy::pt(xa, 0), toy::pt(xs, 0), SegmentKind::descent));
  joint.push(linear_segment(toy::pt(xs, 0), toy::pt(xb, 0), SegmentKind::descent));
  EXPECT_NEAR(measure_depth(joint, kWell, 10, 0.0).depth_epsilon, barrier, 1e-12);

  ParamPath<Point> straight;
  straight.push(linear_segment(toy::pt(xa, 0), toy::pt(xb, 0), SegmentKind::descent));
  EXPECT_NEAR(measure_depth(straight, kWell, 20001, 0.0).depth_epsilon, barrier, 1e-6);

  // A detour off the ridge only raises the measured barrier.
  ParamPath<Point> detour;
  detour.push(linear_segment(toy::pt(xa, 0), toy::pt(xs, 0.4), SegmentKind::descent));
  detour.push(linear_segment(toy::pt(xs, 0.4), toy::pt(xb, 0), SegmentKind::descent));
  EXPECT_GT(measure_depth(detour, kWell, 200, 0.0).depth_epsilon, barrier);
}

TEST(Depth, GridRefinementWithinModulusOfContinuity) {
  const double xa = newton(1.0);
  const double xb = newton(-1.0);
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(xa, 0), toy::pt(0.3, 0.2), SegmentKind::descent));
  path.push(linear_segment(toy::pt(0.3, 0.2), toy::pt(xb, 0), SegmentKind::descent));
  const auto coarse = measure_depth(path, kWell, 100, 0.0);
  const auto fine = measure_depth(path, kWell, 1000, 0.0);
  // Largest change of F over any window of one coarse spacing, read off the fine grid.
  const double h = 1.0 / 99.0;
  double omega = 0.0;
  for (std::size_t i = 0; i < fine.samples.size(); ++i) {
    for (std::size_t j = i + 1; j < fine.samples.size() && fine.samples[j].t - fine.samples[i].t <= h; ++j) {
      omega = std::max(omega, std::abs(fine.samples[j].loss - fine.samples[i].loss));
    }
  }
  EXPECT_GT(omega, 0.0);
  EXPECT_LE(std::abs(fine.depth_epsilon - coarse.depth_epsilon), omega);
  EXPECT_GE(fine.max_loss, coarse.max_loss - 1e-12);
}

TEST(BarrierCsv, HeaderAndRows) {
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(1.0), toy::pt(2.0), SegmentKind::final_layer_linear));
  path.push(reverse(linear_segment(toy::pt(0.0), toy::pt(2.0), SegmentKind::merge)));
  const auto r = measure_depth(path, kSquare, 3, 0.0);
  std::ostringstream os;
  write_barrier_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,loss,segment,rank_ok");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,final-layer-linear,1");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  EXPECT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows.front(), "0.5,4,reverse:merge,1");
  EXPECT_EQ(rows.back(), "1,0,reverse:merge,1");
}

TEST(BarrierCsv, RoundTripsFullPrecision) {
  ParamPath<Point> path;
  path.push(linear_segment(toy::pt(0.1), toy::pt(1.0 / 3.0), SegmentKind::descent));
  const auto r = measure_depth(path, kSquare, 7, 0.0);
  std::ostringstream os;
  write_barrier_csv(os, r);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  for (const auto& s : r.samples) {
    std::getline(in, line);
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    EXPECT_EQ(std::stod(line.substr(0, c1)), s.t);
    EXPECT_EQ(std::stod(line.substr(c1 + 1, c2 - c1 - 1)), s.loss);
  }
}
