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

#include "skipland/path.hpp"

#include <ostream>

#include "textio.hpp"

namespace skipland {

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::descent: return "descent";
    case SegmentKind::project: return "project";
    case SegmentKind::merge: return "merge";
    case SegmentKind::rewire: return "rewire";
    case SegmentKind::final_layer_linear: return "final-layer-linear";
    case SegmentKind::constant: return "constant";
  }
  return "unknown";
}

void write_barrier_csv(std::ostream& out, const BarrierReport& r) {
  out << "t,loss,segment,rank_ok\n";
  for (const auto& s : r.samples) {
    out << textio::format_double(s.t) << ',' << textio::format_double(s.loss) << ',' << s.segment
        << ',' << (s.rank_ok ? 1 : 0) << '\n';
  }
}

void write_barrier_summary(std::ostream& out, const BarrierReport& r) {
  using textio::format_double;
  out << "lambda = " << format_double(r.lambda) << '\n'
      << "f_star = " << format_double(r.f_star) << '\n'
      << "max_loss = " << format_double(r.max_loss) << '\n'
      << "depth_epsilon = " << format_double(r.depth_epsilon) << '\n'
      << "predicted_bound = " << format_double(r.predicted_bound) << '\n'
      << "eps_m_eta = " << format_double(r.eps_m_eta) << '\n'
      << "m = " << r.m << '\n'
      << "n = " << r.n << '\n'
      << "eta = " << format_double(r.eta) << '\n'
      << "perturbations = " << r.perturbations << '\n'
      << "rank_flagged = " << r.rank_flagged << '\n'
      << "samples = " << r.samples.size() << '\n';
}

}  // namespace skipland
