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

#include "skipland/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <string>

#include "skipland/checkpoint.hpp"
#include "skipland/config.hpp"
#include "skipland/errors.hpp"
#include "skipland/generators.hpp"
#include "skipland/geometry.hpp"
#include "skipland/relu_bound.hpp"
#include "skipland/lterm.hpp"
#include "skipland/objective.hpp"
#include "skipland/pathbuilder.hpp"
#include "skipland/scaling.hpp"
#include "skipland/trainer.hpp"
#include "textio.hpp"

namespace skipland {

namespace {

namespace fs = std::filesystem;
using textio::format_double;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value configuration file");
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out = c.out;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw InvalidInput("cannot open " + p.string() + " for writing");
  return out;
}

fs::path prepare_out(const ExperimentConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

Index default_width(const ExperimentConfig& cfg) { return cfg.width > 0 ? cfg.width : cfg.m_list.front(); }

void require_data_dims(Index n, Index d_y, const Dataset& d) {
  if (d.input_dim() != n || d.output_dim() != d_y) {
    throw InvalidInput("checkpoint dimensions do not match the dataset");
  }
}

template <class P>
void write_joints(const fs::path& dir, const ParamPath<P>& path) {
  fs::create_directories(dir);
  const auto& segs = path.segments();
  for (std::size_t k = 0; k <= segs.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "joint_%03zu.txt", k);
    const P& p = k < segs.size() ? segs[k].start : segs.back().end;
    save_checkpoint(dir / name, AnyParams{p});
  }
}

void write_segments(std::ostream& out, const std::vector<std::string>& labels) {
  out << "index,t_start,t_end,segment\n";
  const double k = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << i << ',' << format_double(static_cast<double>(i) / k) << ','
        << format_double(static_cast<double>(i + 1) / k) << ',' << labels[i] << '\n';
  }
}

template <class P>
std::vector<std::string> segment_labels(const ParamPath<P>& path) {
  std::vector<std::string> out;
  for (const auto& s : path.segments()) out.push_back(s.label());
  return out;
}

int cmd_gen(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const Dataset d = gen_dataset(cfg.gen_spec(), cfg.data_seed);
  const fs::path dir = prepare_out(cfg);
  save_dataset(dir / "dataset.txt", d);
  out << "wrote " << (dir / "dataset.txt").string() << " (" << d.size() << " samples, bound "
      << format_double(d.bound()) << ")\n";
  return 0;
}

int cmd_train(const Common& c, const std::string& family, Index width, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const Dataset d = experiment_dataset(cfg);
  const LossConfig lc = cfg.loss_config();
  const TrainerSpec ts = cfg.trainer_spec();
  const Index m = width > 0 ? width : default_width(cfg);
  AnyParams params;
  std::vector<double> trace;
  if (family == "skip") {
    auto r = train_skip(cfg.skip_dims(m), d, lc, ts, cfg.seed);
    params = r.params;
    trace = r.loss_trace;
  } else if (family == "two-layer") {
    auto r = train_two_layer(m, d, lc, ts, cfg.seed);
    params = r.params;
    trace = r.loss_trace;
  } else {
    std::seed_seq seq{cfg.seed, std::uint64_t{0x5eed}};
    std::mt19937_64 rng(seq);
    auto r = train(init_linear(cfg.n, cfg.d_y, cfg.d_o, cfg.inner_hidden, rng), d, lc, ts, cfg.seed);
    params = r.params;
    trace = r.loss_trace;
  }
  const fs::path dir = prepare_out(cfg);
  save_checkpoint(dir / "checkpoint.txt", params);
  auto tr = open_out(dir / "train_trace.csv");
  tr << "checkpoint,objective\n";
  for (std::size_t i = 0; i < trace.size(); ++i) tr << i << ',' << format_double(trace[i]) << '\n';
  out << "family " << family << " objective " << format_double(trace.back()) << '\n';
  return 0;
}

void write_report_files(const fs::path& dir, const BarrierReport& rep) {
  auto csv = open_out(dir / "barrier.csv");
  write_barrier_csv(csv, rep);
}

int cmd_connect(const Common& c, const std::string& a_path, const std::string& b_path, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const Dataset d = experiment_dataset(cfg);
  const SkipNetParams a = load_skip_checkpoint(a_path);
  const SkipNetParams b = load_skip_checkpoint(b_path);
  require_data_dims(a.input_dim(), a.output_dim(), d);
  const ConnectResult r = connect(a, b, d, cfg.loss_config(), cfg.path_options());

  const fs::path dir = prepare_out(cfg);
  write_report_files(dir, r.report);
  auto sum = open_out(dir / "barrier_summary.txt");
  write_barrier_summary(sum, r.report);
  const auto& g = r.diag;
  sum << "continuity_error = " << format_double(g.continuity_error) << '\n'
      << "descent_max_increase = " << format_double(g.descent_max_increase) << '\n'
      << "flat_max_deviation = " << format_double(g.flat_max_deviation) << '\n'
      << "l_requested = " << g.l_requested << '\n'
      << "l_effective = " << g.l_effective << '\n'
      << "free_a = " << g.free_a << '\n'
      << "free_b = " << g.free_b << '\n'
      << "merge_rounds_a = " << g.merge_rounds_a << '\n'
      << "merge_rounds_b = " << g.merge_rounds_b << '\n'
      << "endpoint_distance = " << format_double(g.endpoint_distance) << '\n';
  auto seg = open_out(dir / "segments.csv");
  write_segments(seg, segment_labels(r.path));
  write_joints(dir / "joints", r.path);
  out << "lambda " << format_double(r.report.lambda) << " e_l " << format_double(r.report.f_star) << " max_loss "
      << format_double(r.report.max_loss) << " depth " << format_double(r.report.depth_epsilon) << '\n';
  return 0;
}

int cmd_connect_linear(const Common& c, const std::string& a_path, const std::string& b_path,
                       std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const Dataset d = experiment_dataset(cfg);
  const LinearSkipParams a = load_linear_checkpoint(a_path);
  const LinearSkipParams b = load_linear_checkpoint(b_path);
  require_data_dims(a.input_dim(), a.output_dim(), d);
  const LinearConnectResult r = connect_linear(a, b, d, cfg.loss_config(), cfg.path_options());

  const fs::path dir = prepare_out(cfg);
  write_report_files(dir, r.report);
  auto sum = open_out(dir / "barrier_summary.txt");
  write_barrier_summary(sum, r.report);
  sum << "continuity_error = " << format_double(r.continuity_error) << '\n';
  auto seg = open_out(dir / "segments.csv");
  write_segments(seg, segment_labels(r.path));
  write_joints(dir / "joints", r.path);
  out << "lambda " << format_double(r.report.lambda) << " F_star " << format_double(r.F_star) << " max_loss "
      << format_double(r.report.max_loss) << " depth " << format_double(r.report.depth_epsilon) << '\n';
  return 0;
}

int cmd_lterm(const Common& c, Index l, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const Dataset d = experiment_dataset(cfg);
  const PathOptions po = cfg.path_options();
  if (l < 0) l = po.l >= 0 ? po.l : cluster_quota(default_width(cfg), po.eta);
  const auto chain =
      solve_lterm_chain(d, cfg.loss_config(), l, po.lterm_iterations, po.lterm_restarts, cfg.seed);
  const fs::path dir = prepare_out(cfg);
  auto csv = open_out(dir / "lterm.csv");
  csv << "l,e_l\n";
  for (const auto& s : chain) csv << s.l << ',' << format_double(s.e_l) << '\n';
  if (l > 0) save_checkpoint(dir / "lterm_checkpoint.txt", AnyParams{chain.back().params()});
  out << "e(" << l << ") = " << format_double(chain.back().e_l) << '\n';
  return 0;
}

int cmd_cluster(const Common& c, const std::string& ckpt, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const AnyParams p = load_checkpoint(ckpt);
  Mat W1;
  if (const auto* s = std::get_if<SkipNetParams>(&p)) W1 = s->W1;
  else if (const auto* t = std::get_if<TwoLayerParams>(&p)) W1 = t->W1;
  else throw InvalidInput("cluster: needs a skip or two-layer checkpoint");
  const ClusterSet cs = find_cluster(W1, cfg.eta);
  const auto all = cs.all_indices();
  const double verified = max_pairwise_angle(W1, all);

  const fs::path dir = prepare_out(cfg);
  auto f = open_out(dir / "cluster.txt");
  f << "m = " << W1.rows() << '\n'
    << "eta = " << format_double(cfg.eta) << '\n'
    << "epsilon_m_eta = " << format_double(cs.epsilon_m_eta) << '\n'
    << "quota = " << cs.quota << '\n'
    << "size = " << all.size() << '\n'
    << "member_count = " << cs.member_indices.size() << '\n'
    << "meets_quota = " << (cs.meets_quota ? "true" : "false") << '\n'
    << "representative = " << cs.representative_index << '\n'
    << "max_pairwise_angle = " << format_double(verified) << '\n'
    << "angle_limit = " << format_double(2.0 * cs.epsilon_m_eta) << '\n'
    << "members =";
  for (Index i : cs.member_indices) f << ' ' << i;
  f << '\n';
  out << "cluster of " << cs.member_indices.size() << " members plus representative (quota " << cs.quota
      << "), max angle " << format_double(verified)
      << '\n';
  return 0;
}

int cmd_relu_bound(const Common& c, Index pairs, Index samples, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  ReluBoundOptions o;
  o.n = cfg.n;
  o.pairs = pairs;
  o.samples = samples;
  o.seed = cfg.seed;
  const ReluBoundResult r = run_relu_bound_check(o);
  const fs::path dir = prepare_out(cfg);
  auto csv = open_out(dir / "relu_bound.csv");
  csv << "distribution,pair,alpha,lhs,rhs\n";
  for (const auto& row : r.rows) {
    csv << row.distribution << ',' << row.pair << ',' << format_double(row.alpha) << ','
        << format_double(row.lhs) << ',' << format_double(row.rhs) << '\n';
  }
  auto sum = open_out(dir / "relu_bound_summary.txt");
  sum << "max_violation = " << format_double(r.max_violation) << '\n';
  for (std::size_t k = 0; k < r.distributions.size(); ++k) {
    sum << "slope " << r.distributions[k] << " = " << format_double(r.slopes[k]) << '\n';
  }
  out << "max(lhs - rhs) = " << format_double(r.max_violation) << '\n';
  return 0;
}

int cmd_scaling(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const ScalingResult r = run_scaling(cfg, &out);
  const fs::path dir = prepare_out(cfg);
  save_scaling(dir, r, cfg.eta, cfg.n);
  out << "status: " << to_string(r.fit.status);
  if (r.fit.status == FitStatus::fitted) out << ", slope " << format_double(r.fit.slope);
  out << " (target " << format_double(r.fit.target_slope) << "), monotone "
      << (r.fit.monotone ? "yes" : "no") << '\n';
  return 0;
}

int cmd_check(const Common& c, const std::string& ckpt, double grad_tol, std::ostream& out) {
  const ExperimentConfig cfg = resolve(c);
  const Dataset d = experiment_dataset(cfg);
  const SkipNetParams p = load_skip_checkpoint(ckpt);
  require_data_dims(p.input_dim(), p.output_dim(), d);
  const AssumptionReport a = check_assumptions(p, d, cfg.loss_config(), grad_tol);
  const fs::path dir = prepare_out(cfg);
  auto f = open_out(dir / "assumptions.txt");
  f << "objective = " << format_double(a.objective) << '\n'
    << "group_norms = " << format_double(a.group_norms[0]) << ',' << format_double(a.group_norms[1]) << ','
    << format_double(a.group_norms[2]) << ',' << format_double(a.group_norms[3]) << '\n'
    << "C_bound = " << format_double(a.C_bound) << '\n'
    << "grad_norm = " << format_double(a.grad_norm) << '\n'
    << "stationary = " << (a.stationary ? "true" : "false") << '\n'
    << "g_lipschitz_G0 = " << format_double(a.g_lipschitz_G0) << '\n'
    << "max_radial_residual = " << format_double(a.max_radial_residual) << '\n'
    << "radial_relative = " << format_double(a.objective > 0 ? a.max_radial_residual / a.objective : 0.0) << '\n';
  for (std::size_t k = 0; k < a.radial.size(); ++k) {
    f << "radial " << a.block_names[k] << " = " << format_double(a.radial[k]) << '\n';
  }
  out << "max radial residual / F = "
      << format_double(a.objective > 0 ? a.max_radial_residual / a.objective : 0.0) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"skipland: loss-landscape paths for skip-connection networks"};
  app.require_subcommand(1);

  Common common;
  std::string family = "skip", a_path, b_path, ckpt;
  Index width = 0, l = -1, pairs = 100, samples = 20000;
  double grad_tol = 1e-4;

  auto* gen = app.add_subcommand("gen", "generate a dataset");
  auto* train_cmd = app.add_subcommand("train", "train one network");
  train_cmd->add_option("--family", family, "skip, two-layer or linear")
      ->check(CLI::IsMember({"skip", "two-layer", "linear"}));
  train_cmd->add_option("--width", width, "hidden width m");
  auto* conn = app.add_subcommand("connect", "build a path between two skip checkpoints");
  auto* conn_lin = app.add_subcommand("connect-linear", "build a path between two linear checkpoints");
  for (auto* cmd : {conn, conn_lin}) {
    cmd->add_option("--a", a_path, "first checkpoint")->required();
    cmd->add_option("--b", b_path, "second checkpoint")->required();
  }
  auto* lterm = app.add_subcommand("lterm", "solve the l-unit problem");
  lterm->add_option("--l", l, "number of units; default floor(m^eta)");
  auto* cluster = app.add_subcommand("cluster", "report the row cluster of a checkpoint");
  auto* relu_cmd = app.add_subcommand("lemma4", "Monte-Carlo check of the ReLU perturbation bound");
  relu_cmd->add_option("--pairs", pairs, "unit vector pairs per distribution")->check(CLI::PositiveNumber);
  relu_cmd->add_option("--samples", samples, "inputs per distribution")->check(CLI::PositiveNumber);
  auto* scaling = app.add_subcommand("scaling", "width sweep of the depth excess");
  auto* check = app.add_subcommand("check-assumptions", "stationarity and norm report for a checkpoint");
  check->add_option("--grad-tol", grad_tol, "gradient norm counted as stationary");
  for (auto* cmd : {cluster, check}) cmd->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  for (auto* cmd : {gen, train_cmd, conn, conn_lin, lterm, cluster, relu_cmd, scaling, check}) {
    add_common(cmd, common);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen(common, out);
    if (train_cmd->parsed()) return cmd_train(common, family, width, out);
    if (conn->parsed()) return cmd_connect(common, a_path, b_path, out);
    if (conn_lin->parsed()) return cmd_connect_linear(common, a_path, b_path, out);
    if (lterm->parsed()) return cmd_lterm(common, l, out);
    if (cluster->parsed()) return cmd_cluster(common, ckpt, out);
    if (relu_cmd->parsed()) return cmd_relu_bound(common, pairs, samples, out);
    if (scaling->parsed()) return cmd_scaling(common, out);
    if (check->parsed()) return cmd_check(common, ckpt, grad_tol, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace skipland
