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

#include <gtest/gtest.h>

#include <sstream>

#include "skipland/config.hpp"
#include "skipland/errors.hpp"

using namespace skipland;

namespace {
ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}
}  // namespace

TEST(Config, EmptyInputGivesDefaults) {
  const auto c = parse("# nothing\n\n");
  EXPECT_EQ(c.n, 3);
  EXPECT_EQ(c.m_list, (std::vector<Index>{64, 128, 256, 512, 1024}));
  EXPECT_EQ(c.seeds, 5);
  EXPECT_DOUBLE_EQ(c.eta, 0.5);
  EXPECT_EQ(c.grid, 200);
  EXPECT_EQ(c.samples, 2000);
  EXPECT_EQ(c.inner_hidden, (std::vector<Index>{8, 8}));
}

TEST(Config, ValuesAreParsed) {
  const auto c = parse(
      "seed = 7\n  m_list = 8, 16 ,32\neta=0.25\nloss = huber\nhuber_delta = 0.5\n"
      "generator = trig\ninner_hidden = 5\nout = results/x\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.m_list, (std::vector<Index>{8, 16, 32}));
  EXPECT_DOUBLE_EQ(c.eta, 0.25);
  EXPECT_EQ(c.loss, LossKind::huber);
  EXPECT_EQ(c.loss_config().huber_delta, 0.5);
  EXPECT_EQ(c.gen_spec().generator, "trig");
  EXPECT_EQ(c.skip_dims(8).inner_hidden, (std::vector<Index>{5}));
  EXPECT_EQ(c.out, "results/x");
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse("seed 1\n"), ConfigError);
  EXPECT_THROW(parse("seed = one\n"), ConfigError);
  EXPECT_THROW(parse("eta =\n"), ConfigError);
  EXPECT_THROW(parse("loss = l1\n"), ConfigError);
  EXPECT_THROW(parse("generator = spiral\n"), ConfigError);
  EXPECT_THROW(parse("learning_rate = nan\n"), ConfigError);
}

TEST(Config, ValidatesInvariants) {
  EXPECT_THROW(parse("m_list = 64, 64, 128\n"), ConfigError);
  EXPECT_THROW(parse("m_list = 128, 64\n"), ConfigError);
  EXPECT_THROW(parse("eta = 0\n"), ConfigError);
  EXPECT_THROW(parse("eta = 1\n"), ConfigError);
  EXPECT_THROW(parse("kappa = -1\n"), ConfigError);
  EXPECT_THROW(parse("grid = 1\n"), ConfigError);
  EXPECT_THROW(parse("threads = 0\n"), ConfigError);
  EXPECT_THROW(parse("seed = -3\n"), ConfigError);
}

TEST(Config, WriteThenParseRoundTrips) {
  auto c = parse("kappa = 0.00123456789012345678\nm_list = 3,5,9\nnoise = 0.1\n");
  std::ostringstream out;
  write_config(out, c);
  const auto d = parse(out.str());
  std::ostringstream again;
  write_config(again, d);
  EXPECT_EQ(out.str(), again.str());
  EXPECT_EQ(d.kappa, c.kappa);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(load_config("/nonexistent/skipland.cfg"), ConfigError);
}
