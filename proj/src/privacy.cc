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

namespace fedval {

void DpState::Validate() const {
  if (!(clip_bound > 0.0)) throw ConfigError("clip_bound must be > 0");
  if (!(target_quantile > 0.0 && target_quantile < 1.0))
    throw ConfigError("target_quantile must be in (0, 1)");
  if (!(adapt_rate > 0.0)) throw ConfigError("adapt_rate must be > 0");
  if (!(noise_multiplier >= 0.0))
    throw ConfigError("noise_multiplier must be >= 0");
}

ClipResult Clip(std::span<const double> delta, double bound) {
  if (!(bound > 0.0)) throw ConfigError("clip bound must be > 0");
  ClipResult r;
  r.delta.assign(delta.begin(), delta.end());
  const double norm = L2Norm(delta);
  if (norm > bound) {
    const double s = bound / norm;
    for (auto& x : r.delta) x *= s;
    r.clipped = true;
  }
  return r;
}

double AdaptBound(const DpState& state, const std::vector<bool>& clipped_flags) {
  if (clipped_flags.empty())
    throw ConfigError("adapt_bound needs at least one clip flag");
  std::size_t unclipped = 0;
  for (bool c : clipped_flags) {
    if (!c) ++unclipped;
  }
  const double frac =
      static_cast<double>(unclipped) / static_cast<double>(clipped_flags.size());
  return state.clip_bound *
         std::exp(-state.adapt_rate * (frac - state.target_quantile));
}

ParamVector AddNoise(std::span<const double> delta, double noise_multiplier,
                     double bound, std::size_t participant_count,
                     uint64_t seed) {
  if (!(noise_multiplier >= 0.0))
    throw ConfigError("noise_multiplier must be >= 0");
  ParamVector out(delta.begin(), delta.end());
  if (noise_multiplier == 0.0) return out;
  if (participant_count == 0) throw ConfigError("participant_count is zero");
  const double sd =
      noise_multiplier * bound / static_cast<double>(participant_count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sd);
  for (auto& x : out) x += normal(rng);
  return out;
}

}  // namespace fedval
