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

#include "skipland/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "skipland/errors.hpp"
#include "textio.hpp"

namespace skipland {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Index to_index(const std::string& v, const std::string& key) {
  try {
    return static_cast<Index>(textio::parse_int(v, key));
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

double to_real(const std::string& v, const std::string& key) {
  try {
    return textio::parse_double(v, key);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

std::vector<Index> to_list(const std::string& v, const std::string& key) {
  std::vector<Index> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_index(trim(item), key));
  return out;
}

std::string list_text(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <class T>
Field index_field(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v, const std::string& k) {
            c.*member = static_cast<T>(to_index(v, k));
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(double ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v, const std::string& k) { c.*member = to_real(v, k); },
          [member](const ExperimentConfig& c) { return textio::format_double(c.*member); }};
}

Field string_field(std::string ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v, const std::string&) { c.*member = v; },
          [member](const ExperimentConfig& c) { return c.*member; }};
}

Field list_field(std::vector<Index> ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v, const std::string& k) { c.*member = to_list(v, k); },
          [member](const ExperimentConfig& c) { return list_text(c.*member); }};
}

Field seed_field(std::uint64_t ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& v, const std::string& k) {
            const Index s = to_index(v, k);
            if (s < 0) throw ConfigError(k + " must be non-negative");
            c.*member = static_cast<std::uint64_t>(s);
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = [] {
    std::map<std::string, Field> m;
    m["seed"] = seed_field(&ExperimentConfig::seed);
    m["data_seed"] = seed_field(&ExperimentConfig::data_seed);
    m["n"] = index_field(&ExperimentConfig::n);
    m["d_y"] = index_field(&ExperimentConfig::d_y);
    m["d_g"] = index_field(&ExperimentConfig::d_g);
    m["d_o"] = index_field(&ExperimentConfig::d_o);
    m["inner_hidden"] = list_field(&ExperimentConfig::inner_hidden);
    m["m_list"] = list_field(&ExperimentConfig::m_list);
    m["seeds"] = index_field(&ExperimentConfig::seeds);
    m["eta"] = real_field(&ExperimentConfig::eta);
    m["kappa"] = real_field(&ExperimentConfig::kappa);
    m["loss"] = {[](ExperimentConfig& c, const std::string& v, const std::string&) {
                   try {
                     c.loss = parse_loss_kind(v);
                   } catch (const InvalidInput& e) {
                     throw ConfigError(e.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return to_string(c.loss); }};
    m["huber_delta"] = real_field(&ExperimentConfig::huber_delta);
    m["generator"] = string_field(&ExperimentConfig::generator);
    m["dataset_file"] = string_field(&ExperimentConfig::dataset_file);
    m["samples"] = index_field(&ExperimentConfig::samples);
    m["teacher_width"] = index_field(&ExperimentConfig::teacher_width);
    m["noise"] = real_field(&ExperimentConfig::noise);
    m["output_clip"] = real_field(&ExperimentConfig::output_clip);
    m["trig_frequency"] = real_field(&ExperimentConfig::trig_frequency);
    m["train_steps"] = index_field(&ExperimentConfig::train_steps);
    m["learning_rate"] = real_field(&ExperimentConfig::learning_rate);
    m["batch_size"] = index_field(&ExperimentConfig::batch_size);
    m["finish_steps"] = index_field(&ExperimentConfig::finish_steps);
    m["clip_norm"] = real_field(&ExperimentConfig::clip_norm);
    m["polish_iterations"] = index_field(&ExperimentConfig::polish_iterations);
    m["grid"] = index_field(&ExperimentConfig::grid);
    m["descent_budget"] = index_field(&ExperimentConfig::descent_budget);
    m["l"] = index_field(&ExperimentConfig::l);
    m["lterm_iterations"] = index_field(&ExperimentConfig::lterm_iterations);
    m["lterm_restarts"] = index_field(&ExperimentConfig::lterm_restarts);
    m["threads"] = index_field(&ExperimentConfig::threads);
    m["width"] = index_field(&ExperimentConfig::width);
    m["out"] = string_field(&ExperimentConfig::out);
    return m;
  }();
  return f;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 1 || d_y < 1 || d_g < 1 || d_o < 1) throw ConfigError("config: n, d_y, d_g, d_o must be positive");
  if (inner_hidden.empty()) throw ConfigError("config: inner_hidden must list at least one width");
  if (m_list.empty()) throw ConfigError("config: m_list must not be empty");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    if (m_list[i] < 2) throw ConfigError("config: widths in m_list must be at least 2");
    if (i > 0 && m_list[i] <= m_list[i - 1]) throw ConfigError("config: m_list must be strictly increasing");
  }
  if (seeds < 1) throw ConfigError("config: seeds must be positive");
  if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("config: eta must lie in (0, 1)");
  if (!(kappa >= 0.0)) throw ConfigError("config: kappa must be non-negative");
  if (!(huber_delta > 0.0)) throw ConfigError("config: huber_delta must be positive");
  if (threads < 1) throw ConfigError("config: threads must be positive");
  if (width < 0) throw ConfigError("config: width must be non-negative");
  if (out.empty()) throw ConfigError("config: out must not be empty");
  if (dataset_file.empty()) gen_spec().validate();
  trainer_spec().validate();
  try {
    path_options().validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

LossConfig ExperimentConfig::loss_config() const {
  LossConfig c;
  c.kind = loss;
  c.huber_delta = huber_delta;
  c.kappa = kappa;
  return c;
}

GenSpec ExperimentConfig::gen_spec() const {
  GenSpec g;
  g.generator = generator;
  g.n = n;
  g.d_y = d_y;
  g.samples = samples;
  g.teacher_width = teacher_width;
  g.noise = noise;
  g.output_clip = output_clip;
  g.trig_frequency = trig_frequency;
  g.d_g = d_g;
  g.d_o = d_o;
  g.inner_hidden = inner_hidden;
  return g;
}

TrainerSpec ExperimentConfig::trainer_spec() const {
  TrainerSpec t;
  t.steps = train_steps;
  t.learning_rate = learning_rate;
  t.batch_size = batch_size;
  t.finish_steps = finish_steps;
  t.clip_norm = clip_norm;
  t.polish_iterations = polish_iterations;
  return t;
}

PathOptions ExperimentConfig::path_options() const {
  PathOptions o;
  o.eta = eta;
  o.l = l;
  o.grid = grid;
  o.descent_budget = descent_budget;
  o.lterm_iterations = lterm_iterations;
  o.lterm_restarts = lterm_restarts;
  o.seed = seed;
  return o;
}

SkipDims ExperimentConfig::skip_dims(Index m) const {
  SkipDims s;
  s.n = n;
  s.m = m;
  s.d_y = d_y;
  s.d_g = d_g;
  s.d_o = d_o;
  s.inner_hidden = inner_hidden;
  return s;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = "config line " + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": repeated key '" + key + "'");
    if (value.empty() && key != "dataset_file") throw ConfigError(where + ": empty value for '" + key + "'");
    it->second.set(cfg, value, key);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  for (const auto& [key, field] : fields()) out << key << " = " << field.get(cfg) << '\n';
}

}  // namespace skipland
