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

#include "fedval/privacy.h"

#include <cmath>
#include <random>
#include <vector>

#include "fedval/common.h"
#include "gtest/gtest.h"

namespace fedval {
namespace {

TEST(ClipTest, Examples) {
  const ClipResult big = Clip(std::vector<double>{6.0, 8.0}, 5.0);
  EXPECT_TRUE(big.clipped);
  EXPECT_NEAR(big.delta[0], 3.0, 1e-12);
  EXPECT_NEAR(big.delta[1], 4.0, 1e-12);
  const ClipResult small = Clip(std::vector<double>{0.0, 3.0}, 5.0);
  EXPECT_FALSE(small.clipped);
  EXPECT_EQ(small.delta, (std::vector<double>{0.0, 3.0}));
  const ClipResult zero = Clip(std::vector<double>(4, 0.0), 5.0);
  EXPECT_FALSE(zero.clipped);
  EXPECT_EQ(zero.delta, std::vector<double>(4, 0.0));
  EXPECT_THROW(Clip(std::vector<double>{1.0}, 0.0), ConfigError);
}

TEST(ClipTest, BoundRespectedOnRandomVectors) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> v(7);
    const double s = scale(rng);
    for (double& x : v) x = s * normal(rng);
    const ClipResult r = Clip(v, 3.0);
    EXPECT_LE(L2Norm(r.delta), 3.0 + 1e-9);
  }
}

TEST(AdaptBoundTest, Examples) {
  DpState s;
  s.clip_bound = 2.0;
  // Half clipped with q = 0.5 leaves the bound alone.
  EXPECT_DOUBLE_EQ(AdaptBound(s, {true, false, true, false}), 2.0);
  EXPECT_NEAR(AdaptBound(s, {false, false, false}), 2.0 * std::exp(-0.1),
              1e-12);
  EXPECT_NEAR(AdaptBound(s, {true, true}), 2.0 * std::exp(0.1), 1e-12);
}

TEST(AddNoiseTest, ZeroMultiplierIsIdentity) {
  const std::vector<double> v = {1.0, -2.0, 3.5};
  EXPECT_EQ(AddNoise(v, 0.0, 1.0, 10, 4), v);
}

TEST(AddNoiseTest, DeterministicAndCalibrated) {
  const std::vector<double> zeros(10000, 0.0);
  const ParamVector a = AddNoise(zeros, 1.5, 2.0, 10, 7);
  EXPECT_EQ(a, AddNoise(zeros, 1.5, 2.0, 10, 7));
  EXPECT_NE(a, AddNoise(zeros, 1.5, 2.0, 10, 8));
  double mean = 0.0;
  for (double x : a) mean += x / a.size();
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean) / (a.size() - 1);
  EXPECT_NEAR(std::sqrt(var), 1.5 * 2.0 / 10.0, 0.05 * 0.3);
}

TEST(DpStateTest, Validate) {
  DpState s;
  EXPECT_NO_THROW(s.Validate());
  s.target_quantile = 1.0;
  EXPECT_THROW(s.Validate(), ConfigError);
  s.target_quantile = 0.5;
  s.noise_multiplier = -1.0;
  EXPECT_THROW(s.Validate(), ConfigError);
}

}  // namespace
}  // namespace fedval
