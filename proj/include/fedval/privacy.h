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

#ifndef FEDVAL_PRIVACY_H_
#define FEDVAL_PRIVACY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fedval/common.h"

namespace fedval {

// Adaptive quantile clipping and Gaussian noise state.
struct DpState {
  double clip_bound = 1.0;
  double target_quantile = 0.5;
  double adapt_rate = 0.2;
  double noise_multiplier = 0.0;

  void Validate() const;
};

struct ClipResult {
  ParamVector delta;
  bool clipped = false;
};

// Scales `delta` onto the L2 ball of radius `bound` when it lies outside.
ClipResult Clip(std::span<const double> delta, double bound);

// Geometric quantile update C * exp(-rate * (unclipped_fraction - q)).
double AdaptBound(const DpState& state, const std::vector<bool>& clipped_flags);

// Adds iid N(0, (z * bound / participant_count)^2) noise per coordinate.
ParamVector AddNoise(std::span<const double> delta, double noise_multiplier,
                     double bound, std::size_t participant_count,
                     uint64_t seed);

}  // namespace fedval

#endif  // FEDVAL_PRIVACY_H_
