/*
 * Copyright 2026 The fedval-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedval/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fedval/common.h"
#include "fedval/scoring.h"
#include "gtest/gtest.h"

namespace fedval {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.task.classes = 4;
  c.task.dim = 6;
  c.task.train_samples = 800;
  c.task.separation = 4.0;
  c.task.test_per_label = 25;
  c.partition.client_count = 8;
  c.partition.seed = 3;
  c.model = MlpSpec{{6, 8, 4}, Activation::kRelu, 5};
  c.train.epochs = 2;
  c.train.batch_size = 10;
  c.train.learning_rate = 0.05;
  c.train.seed = 7;
  c.strategy.kind = StrategyKind::kFedVal;
  c.rounds = 6;
  c.clients_per_round = 4;
  c.selection_seed = 11;
  c.validation.per_label = 5;
  return c;
}

// Exact P(X >= k0), X ~ Binomial(n, num/den), in rational arithmetic.
double ExactTail(int n, int num, int den, int k0) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  cpp_rational total = 0;
  cpp_int binom = 1;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) binom = binom * (n - k + 1) / k;
    if (k < k0) continue;
    cpp_int a = 1;
    cpp_int b = 1;
    for (int i = 0; i < k; ++i) a *= num;
    for (int i = 0; i < n - k; ++i) a *= (den - num);
    for (int i = 0; i < n; ++i) b *= den;
    total += cpp_rational(binom * a, b);
  }
  return static_cast<double>(total);
}

TEST(SelectClientsTest, Examples) {
  std::vector<int> all(10);
  for (int i = 0; i < 10; ++i) all[i] = i;
  EXPECT_EQ(SelectClients(10, 10, 3, 5), all);
  const std::vector<int> a = SelectClients(40, 10, 2, 9);
  EXPECT_EQ(a, SelectClients(40, 10, 2, 9));
  EXPECT_EQ(a.size(), 10u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_NE(a, SelectClients(40, 10, 3, 9));
}

TEST(SelectClientsTest, RoughlyUniform) {
  std::vector<int> hits(20, 0);
  for (int r = 0; r < 4000; ++r)
    for (int id : SelectClients(20, 5, r, 1)) ++hits[id];
  for (int h : hits) EXPECT_NEAR(h, 1000, 120);
}

TEST(ExperimentTest, ZeroRoundsReturnsInitialModel) {
  ExperimentConfig c = SmallConfig();
  c.rounds = 0;
  const ExperimentResult r = RunExperiment(c);
  EXPECT_TRUE(r.rounds.empty());
  EXPECT_EQ(r.final_model, InitParams(c.model));
}

TEST(ExperimentTest, ReplayIsIdentical) {
  const ExperimentConfig c = SmallConfig();
  const ExperimentResult a = RunExperiment(c, 1);
  const ExperimentResult b = RunExperiment(c, 1);
  const ExperimentResult w = RunExperiment(c, 4);
  EXPECT_EQ(a.final_model, b.final_model);
  EXPECT_EQ(a.final_model, w.final_model);
  ASSERT_EQ(a.rounds.size(), 6u);
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    EXPECT_EQ(a.rounds[i].selected, b.rounds[i].selected);
    EXPECT_EQ(a.rounds[i].weights, w.rounds[i].weights);
    EXPECT_EQ(a.rounds[i].s2, w.rounds[i].s2);
  }
}

TEST(ExperimentTest, SelectionIndependentOfStrategy) {
  ExperimentConfig c = SmallConfig();
  const ExperimentResult fedval = RunExperiment(c);
  c.strategy.kind = StrategyKind::kMultiKrum;
  c.strategy.fraction = 0.25;
  const ExperimentResult krum = RunExperiment(c);
  c.strategy.kind = StrategyKind::kTrimmedMean;
  c.strategy.fraction = 0.25;
  const ExperimentResult trimmed = RunExperiment(c);
  for (std::size_t i = 0; i < fedval.rounds.size(); ++i) {
    EXPECT_EQ(fedval.rounds[i].selected, krum.rounds[i].selected);
    EXPECT_EQ(fedval.rounds[i].selected, trimmed.rounds[i].selected);
    EXPECT_EQ(fedval.rounds[i].selected,
              SelectClients(8, 4, static_cast<int>(i), 11));
  }
  EXPECT_NE(fedval.final_model, krum.final_model);
}

TEST(ExperimentTest, RoundLogContents) {
  ExperimentConfig c = SmallConfig();
  c.attack.kind = AttackKind::kPga;
  c.attack.malicious_fraction = 0.25;
  c.attack.placement_seed = 2;
  c.metrics_every = 4;
  Experiment e(c);
  EXPECT_EQ(e.malicious().size(), 2u);
  for (int r = 1; r <= 6; ++r) {
    const RoundLog log = e.RunRound();
    EXPECT_EQ(log.round, r);
    EXPECT_EQ(log.weights.size(), log.selected.size());
    EXPECT_EQ(log.s2_candidates.size(), log.s2_candidate_losses.size());
    ASSERT_TRUE(log.s2.has_value());
    EXPECT_EQ(log.metrics.has_value(), r == 4 || r == 6);
    for (int m : log.malicious_selected)
      EXPECT_TRUE(std::binary_search(e.malicious().begin(),
                                     e.malicious().end(), m));
  }
  EXPECT_EQ(e.state().completed_rounds, 6);
}

TEST(ExperimentTest, FedAvgAndFedValAgreeWhenClean) {
  ExperimentConfig c = SmallConfig();
  c.rounds = 10;
  const ExperimentResult fedval = RunExperiment(c);
  c.strategy.kind = StrategyKind::kFedAvg;
  const ExperimentResult fedavg = RunExperiment(c);
  const double a = fedval.metrics.back().mean_validation_loss;
  const double b = fedavg.metrics.back().mean_validation_loss;
  EXPECT_LE(std::abs(a - b), 0.1 * std::max(a, b));
}

TEST(ExperimentTest, CorruptedModelGetsZeroWeight) {
  const ExperimentConfig c = SmallConfig();
  Experiment e(c);
  for (int i = 0; i < 3; ++i) e.RunRound();
  const ParamVector& g = e.state().global;
  std::vector<ParamVector> models;
  std::vector<ClientUpdate> updates;
  for (int client = 0; client < 4; ++client) {
    TrainSpec t = c.train;
    t.seed = client;
    ParamVector m = LocalTrain(g, c.model, e.data().shards[client], t);
    if (client == 2)
      for (double& v : m) v *= 100.0;
    updates.push_back({client, Subtract(m, g), e.data().shards[client].size()});
    models.push_back(std::move(m));
  }
  const ValidationReport report =
      ComputeReport(models, c.model, e.data().validation, false);
  const AdaptiveResult r =
      AdaptiveAggregate(g, updates, report, ScoreParams{}, ScoreDimensions{},
                        c.model, e.data().validation);
  EXPECT_EQ(r.table.weights[2], 0.0);
}

TEST(ExperimentTest, DpPipelineRecordsBound) {
  ExperimentConfig c = SmallConfig();
  c.strategy.kind = StrategyKind::kFedAvg;
  c.strategy.pre_transforms = {PreTransform::kNormBound, PreTransform::kDpNoise};
  c.dp = DpState{0.5, 0.5, 0.2, 0.1};
  const ExperimentResult r = RunExperiment(c);
  double bound = 0.5;
  for (const RoundLog& log : r.rounds) {
    ASSERT_TRUE(log.clip_bound.has_value());
    EXPECT_GT(*log.clip_bound, 0.0);
    // One adaptation step moves the bound by at most exp(0.2 * 0.5).
    EXPECT_LE(*log.clip_bound, bound * std::exp(0.1) + 1e-12);
    EXPECT_GE(*log.clip_bound, bound * std::exp(-0.1) - 1e-12);
    bound = *log.clip_bound;
  }
}

TEST(ConfigValidateTest, NamesTheField) {
  ExperimentConfig c = SmallConfig();
  c.clients_per_round = 9;
  try {
    c.Validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("clients_per_round", 0), 0u)
        << e.what();
  }
  c = SmallConfig();
  c.strategy.pre_transforms = {PreTransform::kNormBound};
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(PrepareDataTest, HoldoutsAreDisjoint) {
  const ExperimentConfig c = SmallConfig();
  const PreparedData d = PrepareData(c);
  std::vector<std::size_t> ids(d.test.origin.begin(), d.test.origin.end());
  ids.insert(ids.end(), d.validation.data.origin.begin(),
             d.validation.data.origin.end());
  for (const Dataset& s : d.shards)
    ids.insert(ids.end(), s.origin.begin(), s.origin.end());
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  EXPECT_EQ(d.test.size(), 100u);
  EXPECT_EQ(d.validation.data.size(), 20u);
  EXPECT_EQ(d.shards.size(), 8u);
}

TEST(TailProbabilityTest, MatchesExactSum) {
  const TailProbability t = MaliciousRoundProbability(30, 0.1, 9, 25000);
  const double exact = ExactTail(30, 1, 10, 9);
  EXPECT_NEAR(t.per_round / exact, 1.0, 1e-9);
  EXPECT_NEAR(t.per_round, 2.0198e-3, 1e-6);
  EXPECT_GT(t.at_least_once, 0.99);
  EXPECT_EQ(DefaultK0(30, 0.4), 9);
  EXPECT_EQ(MaliciousRoundProbabilityForThreshold(30, 0.1, 0.4, 1).k0, 9);
  for (int k0 : {1, 5, 15, 30}) {
    EXPECT_NEAR(MaliciousRoundProbability(30, 0.25, k0, 1).per_round /
                    ExactTail(30, 1, 4, k0),
                1.0, 1e-9);
  }
}

TEST(TailProbabilityTest, EdgeCases) {
  const TailProbability z = MaliciousRoundProbability(30, 0.0, 9, 100);
  EXPECT_EQ(z.per_round, 0.0);
  EXPECT_EQ(z.at_least_once, 0.0);
  double prev = 0.0;
  for (long long rounds : {1LL, 100LL, 25000LL}) {
    const double p = MaliciousRoundProbability(30, 0.1, 9, rounds).at_least_once;
    EXPECT_GE(p, prev);
    prev = p;
  }
  EXPECT_THROW(MaliciousRoundProbability(30, 1.5, 9, 1), ConfigError);
}

}  // namespace
}  // namespace fedval
