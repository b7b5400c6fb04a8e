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

#ifndef FEDVAL_AGGREGATORS_H_
#define FEDVAL_AGGREGATORS_H_

#include <span>
#include <string>
#include <vector>

#include "fedval/common.h"
#include "fedval/data.h"
#include "fedval/model.h"

namespace fedval {

enum class StrategyKind { kFedAvg, kFedVal, kMultiKrum, kLfr, kTrimmedMean };

enum class PreTransform { kNormBound, kDpNoise };

struct Strategy {
  StrategyKind kind = StrategyKind::kFedAvg;
  // remove_fraction for multi_krum / lfr, trim_fraction for trimmed_mean.
  double fraction = 0.0;
  std::vector<PreTransform> pre_transforms;

  void Validate() const;
};

std::string ToString(StrategyKind kind);
StrategyKind ParseStrategyKind(const std::string& name);
std::string ToString(PreTransform t);
PreTransform ParsePreTransform(const std::string& name);

// Sample-count weighted mean of the full client models theta_g + delta_d.
ParamVector FedAvg(std::span<const double> global,
                   const std::vector<ClientUpdate>& updates);

// Per-client FedAvg weights |D_d| / sum |D|.
std::vector<double> SampleWeights(const std::vector<ClientUpdate>& updates);

struct KrumSelection {
  std::vector<std::size_t> selected;  // ascending
  std::vector<double> scores;         // per update
  std::size_t neighbours = 0;
  bool fallback = false;  // n - f - 2 < 1, nearest neighbour only
};

// Krum scores (sum of squared distances to the n - f - 2 nearest other
// updates) and the n - f lowest-scoring updates, ties by index.
KrumSelection MultiKrum(const std::vector<ClientUpdate>& updates,
                        double remove_fraction);

// theta_g + mean of the selected deltas (equal weights).
ParamVector MeanOfSelected(std::span<const double> global,
                           const std::vector<ClientUpdate>& updates,
                           std::span<const std::size_t> selected);

struct LfrResult {
  ParamVector model;
  std::vector<double> losses;        // mean validation loss per client
  std::vector<std::size_t> kept;     // ascending
  std::vector<std::size_t> dropped;  // ascending
};

// Drops the ceil(remove_fraction * n) clients with the highest validation
// loss and FedAvgs the rest.
LfrResult Lfr(std::span<const double> global,
              const std::vector<ClientUpdate>& updates, const MlpSpec& spec,
              const Dataset& validation, double remove_fraction,
              int workers = 1);

// Same with precomputed per-client validation losses.
LfrResult LfrFromLosses(std::span<const double> global,
                        const std::vector<ClientUpdate>& updates,
                        std::vector<double> losses, double remove_fraction);

// Coordinate-wise trimmed mean of the deltas, added to theta_g.
ParamVector TrimmedMean(std::span<const double> global,
                        const std::vector<ClientUpdate>& updates,
                        double trim_fraction);

}  // namespace fedval

#endif  // FEDVAL_AGGREGATORS_H_
