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

#ifndef FEDVAL_DATA_H_
#define FEDVAL_DATA_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedval {

// Row-major feature matrix with integer labels and optional group ids.
//
// `origin` records, for every row, the row index in the dataset this one was
// carved out of. It lets callers verify that partitions and holdouts are
// disjoint and cover their source.
struct Dataset {
  std::size_t dim = 0;
  int class_count = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<int> group_ids;  // empty when the task has no groups
  int group_count = 0;
  std::vector<std::size_t> origin;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  bool has_groups() const { return !group_ids.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  // Throws ConfigError when the invariants do not hold.
  void Validate() const;
};

// Rows `indices` of `data`; origin is composed with data.origin.
Dataset Subset(const Dataset& data, std::span<const std::size_t> indices);

// Per-label row indices of `data`.
std::vector<std::vector<std::size_t>> IndicesByLabel(const Dataset& data);

// Gaussian class blobs, unit covariance. Class means sit at pairwise
// distance `separation` on a random orthonormal frame (d >= k). For d < k
// the means are random unit directions scaled by separation / sqrt(2).
Dataset GenSynthetic(int classes, std::size_t dim, std::size_t samples,
                     double separation, uint64_t seed);

enum class PartitionScheme { kIid, kLda, kMissingLabels, kQuantitySkew };

struct PartitionSpec {
  PartitionScheme scheme = PartitionScheme::kIid;
  double alpha = 1.0;                // lda and quantity_skew
  std::vector<int> missing_labels;   // missing_labels
  double affected_fraction = 0.0;    // missing_labels
  int client_count = 1;
  uint64_t seed = 0;
};

std::string ToString(PartitionScheme scheme);
PartitionScheme ParsePartitionScheme(const std::string& name);

// Splits `data` into disjoint, non-empty client shards whose union is the
// whole dataset.
std::vector<Dataset> Partition(const Dataset& data, const PartitionSpec& spec);

// Number of clients that lose the missing labels under the missing_labels
// scheme.
int AffectedClientCount(const PartitionSpec& spec);

struct ValidationSet {
  Dataset data;
  std::vector<std::vector<std::size_t>> label_indices;
  std::vector<std::vector<std::size_t>> group_indices;
};

ValidationSet MakeValidationSet(Dataset data);

struct HoldoutSplit {
  ValidationSet validation;
  Dataset remainder;
};

// Holds out a validation set. Balanced mode takes exactly `per_label` rows
// of every label. Otherwise `per_label * K` rows are taken proportionally to
// the source label distribution (largest remainder, at least one per label
// present in the source).
HoldoutSplit BuildValidation(const Dataset& data, std::size_t per_label,
                             bool balanced, uint64_t seed);

struct CsvSchema {
  std::vector<std::string> feature_columns;
  std::string label_column;
  std::optional<std::string> group_column;
};

// Loads a headered CSV. Features are standardized per column (constant
// columns become zeros). Group values are mapped to ids in sorted order.
Dataset LoadCsv(const std::string& path, const CsvSchema& schema);

}  // namespace fedval

#endif  // FEDVAL_DATA_H_
