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

#include <numeric>

#include "fedval/common.h"
#include "fedval/scoring.h"

namespace fedval {

MetricRecord EvaluatePredictions(std::span<const int> labels,
                                 std::span<const int> predictions,
                                 int class_count,
                                 std::span<const int> group_ids,
                                 int group_count,
                                 std::optional<BackdoorTarget> backdoor) {
  if (labels.empty()) throw ConfigError("evaluation needs a non-empty test set");
  std::vector<std::size_t> total(class_count, 0);
  std::vector<std::size_t> hits(class_count, 0);
  std::size_t correct = 0;
  std::size_t source = 0;
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    ++total[y];
    if (predictions[i] == y) {
      ++hits[y];
      ++correct;
    }
    if (backdoor && y == backdoor->source_label) {
      ++source;
      if (predictions[i] == backdoor->target_label) ++flipped;
    }
  }
  MetricRecord rec;
  rec.overall_accuracy =
      static_cast<double>(correct) / static_cast<double>(labels.size());
  rec.per_label_accuracy.resize(class_count);
  for (int k = 0; k < class_count; ++k) {
    if (total[k] == 0)
      throw ConfigError("label " + std::to_string(k) +
                        " is missing from the test set");
    rec.per_label_accuracy[k] =
        static_cast<double>(hits[k]) / static_cast<double>(total[k]);
  }
  rec.label_accuracy_mad = Mad(rec.per_label_accuracy);
  if (!group_ids.empty()) {
    std::vector<std::vector<std::size_t>> rows(group_count);
    for (std::size_t i = 0; i < group_ids.size(); ++i)
      rows[group_ids[i]].push_back(i);
    for (int g = 0; g < group_count; ++g) {
      const double r = GroupRecall(labels, predictions, rows[g], class_count);
      if (r >= 0.0) rec.per_group_recall[g] = r;
    }
  }
  if (backdoor) {
    rec.backdoor_accuracy =
        source == 0 ? 0.0
                    : static_cast<double>(flipped) / static_cast<double>(source);
  }
  return rec;
}

MetricRecord Evaluate(std::span<const double> params, const MlpSpec& spec,
                      const Dataset& test,
                      std::optional<BackdoorTarget> backdoor) {
  const Evaluation ev = EvalLosses(params, spec, test);
  MetricRecord rec =
      EvaluatePredictions(test.labels, ev.predictions, spec.class_count(),
                          test.group_ids, test.group_count, backdoor);
  rec.mean_validation_loss =
      std::accumulate(ev.losses.begin(), ev.losses.end(), 0.0) /
      static_cast<double>(ev.losses.size());
  return rec;
}

MetricRecord Summarize(std::span<const MetricRecord> records,
                       std::size_t window) {
  if (window < 1 || window > records.size())
    throw ConfigError("summary window must be in [1, record count]");
  const auto tail = records.subspan(records.size() - window);
  MetricRecord out;
  out.round = tail.back().round;
  out.per_label_accuracy.assign(tail.front().per_label_accuracy.size(), 0.0);
  std::map<int, int> recall_counts;
  int backdoor_count = 0;
  double backdoor_sum = 0.0;
  const double w = 1.0 / static_cast<double>(window);
  for (const auto& r : tail) {
    out.overall_accuracy += w * r.overall_accuracy;
    out.label_accuracy_mad += w * r.label_accuracy_mad;
    out.mean_validation_loss += w * r.mean_validation_loss;
    for (std::size_t k = 0; k < out.per_label_accuracy.size(); ++k)
      out.per_label_accuracy[k] += w * r.per_label_accuracy.at(k);
    for (const auto& [g, v] : r.per_group_recall) {
      out.per_group_recall[g] += v;
      ++recall_counts[g];
    }
    if (r.backdoor_accuracy) {
      backdoor_sum += *r.backdoor_accuracy;
      ++backdoor_count;
    }
  }
  for (auto& [g, v] : out.per_group_recall) v /= recall_counts[g];
  if (backdoor_count > 0) out.backdoor_accuracy = backdoor_sum / backdoor_count;
  return out;
}

}  // namespace fedval
