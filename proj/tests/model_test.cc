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

#include "fedval/model.h"

#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "fedval/data.h"
#include "gtest/gtest.h"

namespace fedval {
namespace {

Dataset RandomData(std::size_t n, std::size_t dim, int k, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Dataset d;
  d.dim = dim;
  d.class_count = k;
  for (std::size_t i = 0; i < n * dim; ++i) d.features.push_back(normal(rng));
  for (std::size_t i = 0; i < n; ++i) {
    d.labels.push_back(static_cast<int>(i % static_cast<std::size_t>(k)));
    d.origin.push_back(i);
  }
  return d;
}

double Accuracy(const ParamVector& params, const MlpSpec& spec,
                const Dataset& data) {
  const Evaluation eval = EvalLosses(params, spec, data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    hits += eval.predictions[i] == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TEST(InitParamsTest, DeterministicForSeed) {
  MlpSpec spec{{2, 3, 2}, Activation::kRelu, 7};
  EXPECT_EQ(InitParams(spec), InitParams(spec));
  spec.seed = 8;
  EXPECT_NE(InitParams(MlpSpec{{2, 3, 2}, Activation::kRelu, 7}),
            InitParams(spec));
}

TEST(InitParamsTest, LayoutLength) {
  MlpSpec spec{{2, 3, 2}, Activation::kRelu, 7};
  EXPECT_EQ(spec.ParamCount(), 17u);
  EXPECT_EQ(InitParams(spec).size(), 17u);
}

TEST(InitParamsTest, WithinFanInBound) {
  MlpSpec spec{{4, 8, 8, 3}, Activation::kTanh, 3};
  const ParamVector p = InitParams(spec);
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const std::size_t in = spec.layer_sizes[l];
    const std::size_t out = spec.layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t i = 0; i < in * out + out; ++i)
      EXPECT_LE(std::abs(p[offset + i]), bound);
    offset += in * out + out;
  }
  EXPECT_EQ(offset, p.size());
}

TEST(MlpSpecTest, RejectsBadLayers) {
  EXPECT_THROW((MlpSpec{{4}, Activation::kRelu, 0}).Validate(), ConfigError);
  EXPECT_THROW((MlpSpec{{4, 0, 2}, Activation::kRelu, 0}).Validate(),
               ConfigError);
  EXPECT_THROW(ParseActivation("sigmoid"), ConfigError);
  EXPECT_EQ(ParseActivation("tanh"), Activation::kTanh);
}

TEST(ForwardTest, ZeroParamsGiveUniform) {
  MlpSpec spec{{3, 5, 4}, Activation::kRelu, 1};
  ParamVector zeros(spec.ParamCount(), 0.0);
  const std::vector<double> x = {0.3, -1.0, 2.0};
  for (double p : Forward(zeros, spec, x)) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(ForwardTest, SumsToOneAndStableForLargeLogits) {
  MlpSpec spec{{3, 4, 5}, Activation::kRelu, 2};
  ParamVector p = InitParams(spec);
  for (double scale : {1.0, 1e3, -1e3}) {
    ParamVector q = p;
    for (double& v : q) v *= scale;
    const std::vector<double> x = {1.0, -2.0, 0.5};
    const std::vector<double> out = Forward(q, spec, x);
    double total = 0.0;
    for (double v : out) {
      EXPECT_TRUE(std::isfinite(v));
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(ForwardTest, RejectsShapeMismatch) {
  MlpSpec spec{{3, 4, 2}, Activation::kRelu, 2};
  ParamVector p = InitParams(spec);
  EXPECT_THROW(Forward(p, spec, std::vector<double>{1.0, 2.0}), ConfigError);
  p.pop_back();
  EXPECT_THROW(Forward(p, spec, std::vector<double>{1.0, 2.0, 3.0}),
               ConfigError);
}

TEST(LossAndGradTest, UniformPredictionLoss) {
  MlpSpec spec{{4, 6, 10}, Activation::kRelu, 1};
  ParamVector zeros(spec.ParamCount(), 0.0);
  const Dataset data = RandomData(20, 4, 10, 3);
  const LossGrad lg = LossAndGrad(zeros, spec, data, zeros, 0.0);
  EXPECT_NEAR(lg.loss, std::log(10.0), 1e-12);
}

TEST(LossAndGradTest, ProximalTermVanishesAtGlobal) {
  MlpSpec spec{{4, 6, 3}, Activation::kTanh, 1};
  const ParamVector p = InitParams(spec);
  const Dataset data = RandomData(12, 4, 3, 4);
  const LossGrad a = LossAndGrad(p, spec, data, p, 0.0);
  const LossGrad b = LossAndGrad(p, spec, data, p, 5.0);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grad, b.grad);
}

// Central differences at step 1e-5 against the analytic gradient.
void CheckGradient(const MlpSpec& spec, double prox_mu, uint64_t seed) {
  const Dataset data = RandomData(8, spec.input_dim(), spec.class_count(),
                                  seed);
  std::mt19937_64 rng(seed + 100);
  std::normal_distribution<double> normal(0.0, 0.5);
  ParamVector p(spec.ParamCount());
  ParamVector global(spec.ParamCount());
  for (double& v : p) v = normal(rng);
  for (double& v : global) v = normal(rng);
  std::vector<std::size_t> batch(8);
  std::iota(batch.begin(), batch.end(), 0);
  const LossGrad lg = LossAndGrad(p, spec, data, batch, global, prox_mu);
  const double h = 1e-5;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ParamVector plus = p;
    ParamVector minus = p;
    plus[i] += h;
    minus[i] -= h;
    const double fd =
        (LossAndGrad(plus, spec, data, batch, global, prox_mu).loss -
         LossAndGrad(minus, spec, data, batch, global, prox_mu).loss) /
        (2 * h);
    num += (fd - lg.grad[i]) * (fd - lg.grad[i]);
    den += fd * fd + lg.grad[i] * lg.grad[i];
  }
  EXPECT_LE(std::sqrt(num / den), 1e-4) << "seed " << seed;
}

TEST(LossAndGradTest, MatchesFiniteDifferencesTanh) {
  CheckGradient(MlpSpec{{3, 5, 4, 3}, Activation::kTanh, 0}, 0.0, 1);
  CheckGradient(MlpSpec{{3, 5, 4, 3}, Activation::kTanh, 0}, 2.0, 2);
}

TEST(LossAndGradTest, MatchesFiniteDifferencesRelu) {
  CheckGradient(MlpSpec{{4, 6, 3}, Activation::kRelu, 0}, 0.0, 3);
  CheckGradient(MlpSpec{{4, 6, 3}, Activation::kRelu, 0}, 1.0, 4);
}

TEST(LocalTrainTest, ZeroEpochsReturnsGlobal) {
  MlpSpec spec{{4, 6, 3}, Activation::kRelu, 1};
  const ParamVector g = InitParams(spec);
  const Dataset data = RandomData(30, 4, 3, 5);
  TrainSpec train;
  train.epochs = 0;
  EXPECT_EQ(LocalTrain(g, spec, data, train), g);
}

TEST(LocalTrainTest, Deterministic) {
  MlpSpec spec{{4, 6, 3}, Activation::kRelu, 1};
  const ParamVector g = InitParams(spec);
  const Dataset data = RandomData(30, 4, 3, 5);
  TrainSpec train;
  train.seed = 9;
  train.epochs = 3;
  EXPECT_EQ(LocalTrain(g, spec, data, train), LocalTrain(g, spec, data, train));
}

TEST(LocalTrainTest, EmptyDatasetThrows) {
  MlpSpec spec{{4, 6, 3}, Activation::kRelu, 1};
  Dataset empty;
  empty.dim = 4;
  empty.class_count = 3;
  EXPECT_THROW(LocalTrain(InitParams(spec), spec, empty, TrainSpec{}),
               EmptyClientError);
}

TEST(LocalTrainTest, LearnsSeparableBlobs) {
  const Dataset data = GenSynthetic(2, 5, 400, 6.0, 21);
  MlpSpec spec{{5, 16, 2}, Activation::kRelu, 3};
  TrainSpec train;
  train.epochs = 10;
  train.batch_size = 16;
  train.learning_rate = 0.05;
  train.seed = 4;
  const ParamVector p = LocalTrain(InitParams(spec), spec, data, train);
  EXPECT_GE(Accuracy(p, spec, data), 0.95);
}

TEST(EvalLossesTest, ZeroModelLossIsLogK) {
  MlpSpec spec{{3, 4}, Activation::kRelu, 0};
  const Dataset data = RandomData(7, 3, 4, 8);
  const Evaluation eval =
      EvalLosses(ParamVector(spec.ParamCount(), 0.0), spec, data);
  ASSERT_EQ(eval.losses.size(), 7u);
  ASSERT_EQ(eval.predictions.size(), 7u);
  for (double l : eval.losses) EXPECT_NEAR(l, std::log(4.0), 1e-12);
}

TEST(EvalLossesTest, MeanMatchesLossAndGrad) {
  MlpSpec spec{{4, 6, 3}, Activation::kTanh, 5};
  const ParamVector p = InitParams(spec);
  const Dataset data = RandomData(25, 4, 3, 9);
  const Evaluation eval = EvalLosses(p, spec, data);
  const double mean =
      std::accumulate(eval.losses.begin(), eval.losses.end(), 0.0) /
      static_cast<double>(eval.losses.size());
  EXPECT_NEAR(mean, LossAndGrad(p, spec, data, p, 0.0).loss, 1e-9);
  EXPECT_NEAR(mean, MeanLoss(p, spec, data), 1e-12);
}

}  // namespace
}  // namespace fedval
