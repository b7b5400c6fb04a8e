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

#include "fedval/adversary.h"

#include <cmath>
#include <vector>

#include "fedval/common.h"
#include "fedval/data.h"
#include "fedval/model.h"
#include "gtest/gtest.h"

namespace fedval {
namespace {

int CountLabel(const Dataset& d, int label) {
  int n = 0;
  for (int y : d.labels) n += y == label;
  return n;
}

TEST(PoisonDatasetTest, NoSourceSamplesIsNoop) {
  Dataset d = GenSynthetic(3, 2, 90, 3.0, 1);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.labels[i] != 0) keep.push_back(i);
  const Dataset no_zero = Subset(d, keep);
  const Dataset p = PoisonDataset(no_zero, 0, 1);
  EXPECT_EQ(p.labels, no_zero.labels);
  EXPECT_EQ(p.features, no_zero.features);
}

TEST(PoisonDatasetTest, FlipsExactlySourceLabels) {
  const Dataset d = GenSynthetic(3, 2, 90, 3.0, 1);
  ASSERT_EQ(CountLabel(d, 0), 30);
  const Dataset p = PoisonDataset(d, 0, 2);
  EXPECT_EQ(p.size(), d.size());
  EXPECT_EQ(p.features, d.features);
  int changed = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (p.labels[i] != d.labels[i]) {
      ++changed;
      EXPECT_EQ(d.labels[i], 0);
      EXPECT_EQ(p.labels[i], 2);
    }
  }
  EXPECT_EQ(changed, 30);
}

TEST(PoisonDatasetTest, PoisonedClientLearnsBackdoor) {
  const Dataset all = GenSynthetic(3, 4, 1200, 5.0, 2);
  const HoldoutSplit split = BuildValidation(all, 200, true, 3);
  const Dataset& train = split.remainder;
  const Dataset& test = split.validation.data;
  const MlpSpec spec{{4, 8, 3}, Activation::kRelu, 1};
  TrainSpec t;
  t.epochs = 5;
  t.learning_rate = 0.05;
  auto backdoor = [&](const Dataset& data) {
    const ParamVector p = LocalTrain(InitParams(spec), spec, data, t);
    const Evaluation e = EvalLosses(p, spec, test);
    int src = 0;
    int hit = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (test.labels[i] != 0) continue;
      ++src;
      hit += e.predictions[i] == 1;
    }
    return static_cast<double>(hit) / src;
  };
  EXPECT_GT(backdoor(PoisonDataset(train, 0, 1)), backdoor(train) + 0.5);
}

TEST(AttackSpecTest, Validate) {
  AttackSpec a;
  a.kind = AttackKind::kLabelFlip;
  a.source_label = 2;
  a.target_label = 2;
  EXPECT_THROW(a.Validate(10), ConfigError);
  a.target_label = 10;
  EXPECT_THROW(a.Validate(10), ConfigError);
  a.target_label = 3;
  EXPECT_NO_THROW(a.Validate(10));
  a.malicious_fraction = 1.5;
  EXPECT_THROW(a.Validate(10), ConfigError);
  EXPECT_THROW(ParseAttackKind("sybil"), ConfigError);
}

class PgaTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = GenSynthetic(3, 4, 300, 4.0, 5);
    spec_ = MlpSpec{{4, 8, 3}, Activation::kTanh, 2};
    train_.epochs = 3;
    train_.learning_rate = 0.05;
    train_.seed = 8;
    global_ = LocalTrain(InitParams(spec_), spec_, data_, train_);
  }
  Dataset data_;
  MlpSpec spec_;
  TrainSpec train_;
  ParamVector global_;
};

TEST_F(PgaTest, NormMatchesBenign) {
  const PgaResult r = PgaUpdate(global_, spec_, data_, train_, 1.0, 2);
  ASSERT_FALSE(r.degenerate);
  const ParamVector benign = LocalTrain(global_, spec_, data_, train_);
  const double benign_norm = L2Norm(Subtract(benign, global_));
  EXPECT_NEAR(L2Norm(Subtract(r.params, global_)), benign_norm, 1e-6);
  const PgaResult r3 = PgaUpdate(global_, spec_, data_, train_, 3.0, 2);
  EXPECT_NEAR(L2Norm(Subtract(r3.params, global_)), 3.0 * benign_norm, 1e-6);
}

TEST_F(PgaTest, ZeroScaleReturnsGlobal) {
  EXPECT_EQ(PgaUpdate(global_, spec_, data_, train_, 0.0, 2).params, global_);
}

TEST_F(PgaTest, AscentRaisesLossEveryEpoch) {
  std::vector<double> losses;
  GradientAscent(global_, spec_, data_, train_, 5, &losses);
  ASSERT_EQ(losses.size(), 6u);
  for (std::size_t i = 1; i < losses.size(); ++i)
    EXPECT_GT(losses[i], losses[i - 1]);
}

TEST(PlaceMaliciousTest, Examples) {
  EXPECT_TRUE(PlaceMalicious(40, 0.0, 3).empty());
  const std::vector<int> ids = PlaceMalicious(40, 0.8, 3);
  EXPECT_EQ(ids.size(), 32u);
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  EXPECT_EQ(std::adjacent_find(ids.begin(), ids.end()), ids.end());
  EXPECT_EQ(ids, PlaceMalicious(40, 0.8, 3));
  EXPECT_EQ(PlaceMalicious(40, 0.4, 3).size(), 16u);
  EXPECT_THROW(PlaceMalicious(40, -0.1, 3), ConfigError);
}

}  // namespace
}  // namespace fedval
