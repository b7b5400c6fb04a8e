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

#include "fedval/metrics.h"

#include <vector>

#include "fedval/common.h"
#include "gtest/gtest.h"

namespace fedval {
namespace {

std::vector<int> BalancedLabels(int k, int per) {
  std::vector<int> y;
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < per; ++i) y.push_back(c);
  return y;
}

TEST(EvaluatePredictionsTest, PerfectClassifier) {
  const std::vector<int> y = BalancedLabels(10, 5);
  const MetricRecord m =
      EvaluatePredictions(y, y, 10, {}, 0, BackdoorTarget{4, 5});
  EXPECT_EQ(m.overall_accuracy, 1.0);
  for (double a : m.per_label_accuracy) EXPECT_EQ(a, 1.0);
  EXPECT_EQ(m.label_accuracy_mad, 0.0);
  ASSERT_TRUE(m.backdoor_accuracy.has_value());
  EXPECT_EQ(*m.backdoor_accuracy, 0.0);
}

TEST(EvaluatePredictionsTest, ConstantPredictor) {
  const std::vector<int> y = BalancedLabels(10, 5);
  const MetricRecord m =
      EvaluatePredictions(y, std::vector<int>(y.size(), 0), 10);
  EXPECT_NEAR(m.overall_accuracy, 0.1, 1e-12);
  EXPECT_EQ(m.per_label_accuracy[0], 1.0);
  for (int k = 1; k < 10; ++k) EXPECT_EQ(m.per_label_accuracy[k], 0.0);
  EXPECT_NEAR(m.label_accuracy_mad, 0.18, 1e-12);
  EXPECT_FALSE(m.backdoor_accuracy.has_value());
}

TEST(EvaluatePredictionsTest, BackdoorRatio) {
  std::vector<int> y(50, 3);
  std::vector<int> pred(50, 3);
  for (int i = 0; i < 20; ++i) pred[i] = 7;
  for (int label = 0; label < 8; ++label) {
    if (label == 3) continue;
    y.push_back(label);
    pred.push_back(label);
  }
  const MetricRecord m = EvaluatePredictions(y, pred, 8, {}, 0,
                                             BackdoorTarget{3, 7});
  ASSERT_TRUE(m.backdoor_accuracy.has_value());
  EXPECT_NEAR(*m.backdoor_accuracy, 0.4, 1e-12);
}

TEST(EvaluatePredictionsTest, MissingLabelThrows) {
  EXPECT_THROW(EvaluatePredictions(std::vector<int>{0, 0, 1},
                                   std::vector<int>{0, 0, 1}, 3),
               ConfigError);
}

TEST(EvaluatePredictionsTest, GroupRecall) {
  const std::vector<int> y = {1, 1, 0, 1, 1, 0};
  const std::vector<int> p = {1, 0, 0, 1, 1, 1};
  const std::vector<int> g = {0, 0, 0, 1, 1, 1};
  const MetricRecord m = EvaluatePredictions(y, p, 2, g, 2);
  ASSERT_EQ(m.per_group_recall.size(), 2u);
  EXPECT_NEAR(m.per_group_recall.at(0), 0.5, 1e-12);
  EXPECT_NEAR(m.per_group_recall.at(1), 1.0, 1e-12);
}

MetricRecord Record(double acc) {
  MetricRecord r;
  r.overall_accuracy = acc;
  r.per_label_accuracy = {acc, 1.0 - acc};
  r.label_accuracy_mad = acc / 2;
  r.mean_validation_loss = 2 * acc;
  return r;
}

TEST(SummarizeTest, Examples) {
  const std::vector<MetricRecord> s = {Record(0.2), Record(0.4), Record(0.6)};
  EXPECT_NEAR(Summarize(s, 3).overall_accuracy, 0.4, 1e-12);
  EXPECT_NEAR(Summarize(s, 3).per_label_accuracy[1], 0.6, 1e-12);
  EXPECT_NEAR(Summarize(s, 1).overall_accuracy, 0.6, 1e-12);
  EXPECT_NEAR(Summarize(s, 1).mean_validation_loss, 1.2, 1e-12);
  const std::vector<MetricRecord> flat(4, Record(0.3));
  const MetricRecord f = Summarize(flat, 4);
  EXPECT_NEAR(f.overall_accuracy, 0.3, 1e-12);
  EXPECT_NEAR(f.label_accuracy_mad, 0.15, 1e-12);
}

}  // namespace
}  // namespace fedval
