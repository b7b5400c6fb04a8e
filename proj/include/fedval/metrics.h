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

#ifndef FEDVAL_METRICS_H_
#define FEDVAL_METRICS_H_

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fedval/data.h"
#include "fedval/model.h"

namespace fedval {

struct MetricRecord {
  int round = 0;
  double overall_accuracy = 0.0;
  std::vector<double> per_label_accuracy;
  double label_accuracy_mad = 0.0;
  std::map<int, double> per_group_recall;
  std::optional<double> backdoor_accuracy;
  double mean_validation_loss = 0.0;
};

struct BackdoorTarget {
  int source_label = 0;
  int target_label = 0;
};

// Accuracy metrics of `params` on `test`. mean_validation_loss is the mean
// loss on `test`; the orchestrator overwrites it with the loss on its
// validation set. Every label must be present in `test`.
MetricRecord Evaluate(std::span<const double> params, const MlpSpec& spec,
                      const Dataset& test,
                      std::optional<BackdoorTarget> backdoor = std::nullopt);

// Metrics from labels and predictions alone.
MetricRecord EvaluatePredictions(std::span<const int> labels,
                                 std::span<const int> predictions,
                                 int class_count,
                                 std::span<const int> group_ids = {},
                                 int group_count = 0,
                                 std::optional<BackdoorTarget> backdoor =
                                     std::nullopt);

// Trailing-window means of every metric. per_group_recall and
// backdoor_accuracy average over the records that carry them.
MetricRecord Summarize(std::span<const MetricRecord> records,
                       std::size_t window);

}  // namespace fedval

#endif  // FEDVAL_METRICS_H_
