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

#include "skipland/scaling.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "skipland/errors.hpp"
#include "skipland/generators.hpp"
#include "skipland/objective.hpp"
#include "skipland/trainer.hpp"
#include "textio.hpp"

namespace skipland {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

double max_radial_ratio(const SkipNetParams& p, const Dataset& d, const LossConfig& cfg, double F) {
  double r = 0.0;
  for (double v : radial_residuals(p, d, cfg)) r = std::max(r, std::abs(v));
  return F > 0.0 ? r / F : r;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw InvalidInput("cannot open " + p.string() + " for writing");
  return out;
}

}  // namespace

std::string to_string(FitStatus s) {
  switch (s) {
    case FitStatus::fitted: return "fitted";
    case FitStatus::never_active: return "bound never active";
    default: return "insufficient active widths";
  }
}

std::uint64_t cell_seed(std::uint64_t base, Index m, Index seed, int side) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(side)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

ScalingFit fit_scaling(const std::vector<ScalingRow>& rows, double eta, Index n) {
  if (rows.empty()) throw InvalidInput("fit_scaling: no rows");
  ScalingFit fit;
  fit.target_slope = (eta - 1.0) / static_cast<double>(n);
  std::vector<std::pair<Index, double>> sorted;
  for (const auto& r : rows) sorted.emplace_back(r.m, r.excess);
  std::sort(sorted.begin(), sorted.end());
  bool any_active = false;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    std::vector<double> vals;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      vals.push_back(sorted[j].second);
      any_active = any_active || sorted[j].second > kExcessFloor;
      ++j;
    }
    fit.widths.push_back(sorted[i].first);
    fit.medians.push_back(median(vals));
    i = j;
  }
  fit.monotone = true;
  for (std::size_t k = 1; k < fit.medians.size(); ++k) {
    if (fit.medians[k] > fit.medians[k - 1] + kExcessFloor) fit.monotone = false;
  }
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < fit.widths.size(); ++k) {
    if (fit.medians[k] > kExcessFloor) {
      xs.push_back(std::log(static_cast<double>(fit.widths[k])));
      ys.push_back(std::log(fit.medians[k]));
    }
  }
  fit.active_widths = static_cast<Index>(xs.size());
  if (!any_active) {
    fit.status = FitStatus::never_active;
    return fit;
  }
  if (xs.size() < 3) {
    fit.status = FitStatus::insufficient;
    return fit;
  }
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += e * e;
  }
  const double se = std::sqrt(sse / (k - 2.0) / sxx);
  const boost::math::students_t dist(k - 2.0);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  fit.slope_ci_low = fit.slope - q * se;
  fit.slope_ci_high = fit.slope + q * se;
  fit.status = FitStatus::fitted;
  return fit;
}

Dataset experiment_dataset(const ExperimentConfig& cfg) {
  if (!cfg.dataset_file.empty()) {
    Dataset d = load_dataset(cfg.dataset_file);
    if (d.input_dim() != cfg.n || d.output_dim() != cfg.d_y) {
      throw ConfigError("dataset " + cfg.dataset_file + " does not match n and d_y of the config");
    }
    return d;
  }
  return gen_dataset(cfg.gen_spec(), cfg.data_seed);
}

ScalingResult run_scaling(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  if (cfg.m_list.size() < 3) throw ConfigError("scaling: m_list needs at least three widths");
  if (cfg.seeds < 3) throw ConfigError("scaling: needs at least three seeds");
  const auto t0 = std::chrono::steady_clock::now();

  const Dataset d = experiment_dataset(cfg);
  const LossConfig lc = cfg.loss_config();
  const TrainerSpec ts = cfg.trainer_spec();
  const PathOptions po = cfg.path_options();

  Index l_max = 0;
  for (Index m : cfg.m_list) {
    const Index l = po.l >= 0 ? po.l : cluster_quota(m, po.eta);
    l_max = std::max(l_max, std::min(l, m));
  }
  const auto chain = solve_lterm_chain(d, lc, l_max, po.lterm_iterations, po.lterm_restarts, cfg.seed);
  const LTermProvider provider = [&chain](Index l) { return chain.at(static_cast<std::size_t>(l)); };

  struct Cell {
    Index m, seed;
  };
  std::vector<Cell> cells;
  for (Index m : cfg.m_list)
    for (Index s = 0; s < cfg.seeds; ++s) cells.push_back({m, s});

  ScalingResult result;
  result.rows.resize(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const auto [m, s] = cells[i];
        const auto c0 = std::chrono::steady_clock::now();
        const auto a = train_skip(cfg.skip_dims(m), d, lc, ts, cell_seed(cfg.seed, m, s, 0));
        const auto b = train_skip(cfg.skip_dims(m), d, lc, ts, cell_seed(cfg.seed, m, s, 1));
        const double train_s = seconds_since(c0);
        PathOptions cell_opts = po;
        cell_opts.seed = cell_seed(cfg.seed, m, s, 2);
        const auto c1 = std::chrono::steady_clock::now();
        const ConnectResult cr = connect(a.params, b.params, d, lc, cell_opts, provider);

        ScalingRow& row = result.rows[i];
        row.m = m;
        row.seed = s;
        row.lambda = cr.report.lambda;
        row.e_l = cr.report.f_star;
        row.max_loss = cr.report.max_loss;
        row.excess = cr.report.depth_epsilon;
        row.eps_pred = cluster_radius(m, cfg.n, cfg.eta);
        row.F_a = objective(a.params, d, lc);
        row.F_b = objective(b.params, d, lc);
        row.radial_a = max_radial_ratio(a.params, d, lc, row.F_a);
        row.radial_b = max_radial_ratio(b.params, d, lc, row.F_b);
        row.predicted_bound = cr.report.predicted_bound;
        row.diag = cr.diag;
        row.train_seconds = train_s;
        row.connect_seconds = seconds_since(c1);
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *log << "m=" << m << " seed=" << s << " lambda=" << row.lambda << " e_l=" << row.e_l
               << " max_loss=" << row.max_loss << " excess=" << row.excess << " ("
               << row.train_seconds + row.connect_seconds << " s)" << std::endl;
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), cells.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  result.fit = fit_scaling(result.rows, cfg.eta, cfg.n);
  result.seconds = seconds_since(t0);
  return result;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
  using textio::format_double;
  out << "m,seed,lambda,e_l,max_loss,excess,eps_pred\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.seed << ',' << format_double(r.lambda) << ',' << format_double(r.e_l) << ','
        << format_double(r.max_loss) << ',' << format_double(r.excess) << ',' << format_double(r.eps_pred)
        << '\n';
  }
}

void write_scaling_diagnostics(std::ostream& out, const std::vector<ScalingRow>& rows) {
  using textio::format_double;
  out << "m,seed,F_a,F_b,radial_a,radial_b,predicted_bound,continuity_error,descent_max_increase,"
         "flat_max_deviation,l_effective,merge_rounds_a,merge_rounds_b,perturbations,"
         "endpoint_distance,train_seconds,connect_seconds\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.seed << ',' << format_double(r.F_a) << ',' << format_double(r.F_b) << ','
        << format_double(r.radial_a) << ',' << format_double(r.radial_b) << ','
        << format_double(r.predicted_bound) << ',' << format_double(r.diag.continuity_error) << ','
        << format_double(r.diag.descent_max_increase) << ',' << format_double(r.diag.flat_max_deviation)
        << ',' << r.diag.l_effective << ',' << r.diag.merge_rounds_a << ',' << r.diag.merge_rounds_b << ','
        << r.diag.perturbations << ',' << format_double(r.diag.endpoint_distance) << ','
        << format_double(r.train_seconds) << ',' << format_double(r.connect_seconds) << '\n';
  }
}

void write_scaling_summary(std::ostream& out, const ScalingFit& fit, double eta, Index n) {
  using textio::format_double;
  out << "status = " << to_string(fit.status) << '\n';
  out << "eta = " << format_double(eta) << '\n';
  out << "n = " << n << '\n';
  out << "target_slope = " << format_double(fit.target_slope) << '\n';
  if (fit.status == FitStatus::fitted) {
    out << "slope = " << format_double(fit.slope) << '\n';
    out << "intercept = " << format_double(fit.intercept) << '\n';
    out << "slope_ci95 = " << format_double(fit.slope_ci_low) << ',' << format_double(fit.slope_ci_high)
        << '\n';
  }
  out << "active_widths = " << fit.active_widths << '\n';
  out << "monotone = " << (fit.monotone ? "true" : "false") << '\n';
  for (std::size_t k = 0; k < fit.widths.size(); ++k) {
    out << "median_excess m=" << fit.widths[k] << " = " << format_double(fit.medians[k]) << '\n';
  }
}

void save_scaling(const std::filesystem::path& dir, const ScalingResult& r, double eta, Index n) {
  std::filesystem::create_directories(dir);
  auto csv = open_out(dir / "scaling.csv");
  write_scaling_csv(csv, r.rows);
  auto diag = open_out(dir / "scaling_diagnostics.csv");
  write_scaling_diagnostics(diag, r.rows);
  auto sum = open_out(dir / "scaling_summary.txt");
  write_scaling_summary(sum, r.fit, eta, n);
}

}  // namespace skipland
