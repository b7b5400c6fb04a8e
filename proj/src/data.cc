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

#include "fedval/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fedval/common.h"

namespace fedval {
namespace {

constexpr int kMaxRedraws = 1000;

// Largest-remainder apportionment of `total` items by `weights`; ties go to
// the lower index.
std::vector<std::size_t> Apportion(std::size_t total,
                                   std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size(), 0);
  if (weights.empty()) return counts;
  std::vector<double> quota(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i)
    quota[i] = sum > 0.0 ? weights[i] / sum * static_cast<double>(total)
                         : static_cast<double>(total) / weights.size();
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < quota.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::floor(quota[i]));
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
  });
  for (std::size_t j = 0; assigned < total; ++j, ++assigned)
    ++counts[order[j % order.size()]];
  return counts;
}

std::vector<double> SampleDirichlet(double alpha, std::size_t n,
                                    std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = gamma(rng);
    sum += x;
  }
  if (sum <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));
  } else {
    for (auto& x : v) x /= sum;
  }
  return v;
}

std::vector<Dataset> Materialize(
    const Dataset& data, const std::vector<std::vector<std::size_t>>& shards) {
  std::vector<Dataset> out;
  out.reserve(shards.size());
  for (auto rows : shards) {
    std::sort(rows.begin(), rows.end());
    out.push_back(Subset(data, rows));
  }
  return out;
}

std::vector<std::vector<std::size_t>> ShuffledByLabel(const Dataset& data,
                                                      std::mt19937_64& rng) {
  auto by_label = IndicesByLabel(data);
  for (auto& rows : by_label) std::shuffle(rows.begin(), rows.end(), rng);
  return by_label;
}

bool AnyEmpty(const std::vector<std::vector<std::size_t>>& shards) {
  return std::any_of(shards.begin(), shards.end(),
                     [](const auto& s) { return s.empty(); });
}

std::vector<std::vector<std::size_t>> PartitionIid(const Dataset& data,
                                                   const PartitionSpec& spec,
                                                   std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> shards(spec.client_count);
  std::size_t next = 0;
  for (const auto& rows : ShuffledByLabel(data, rng)) {
    for (std::size_t r : rows) shards[next++ % shards.size()].push_back(r);
  }
  return shards;
}

std::vector<std::vector<std::size_t>> PartitionLda(const Dataset& data,
                                                   const PartitionSpec& spec,
                                                   std::mt19937_64& rng) {
  const std::size_t n_clients = spec.client_count;
  const std::size_t k = data.class_count;
  const auto by_label = ShuffledByLabel(data, rng);
  std::vector<std::vector<double>> props(n_clients);
  for (auto& row : props) row = SampleDirichlet(spec.alpha, k, rng);

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    std::vector<std::vector<std::size_t>> shards(n_clients);
    std::vector<double> column(n_clients);
    for (std::size_t label = 0; label < k; ++label) {
      for (std::size_t c = 0; c < n_clients; ++c) column[c] = props[c][label];
      const auto counts = Apportion(by_label[label].size(), column);
      std::size_t pos = 0;
      for (std::size_t c = 0; c < n_clients; ++c) {
        for (std::size_t j = 0; j < counts[c]; ++j)
          shards[c].push_back(by_label[label][pos++]);
      }
    }
    if (!AnyEmpty(shards)) return shards;
    // Re-draw the proportions of every client that came out empty.
    for (std::size_t c = 0; c < n_clients; ++c) {
      if (shards[c].empty()) props[c] = SampleDirichlet(spec.alpha, k, rng);
    }
  }
  throw ConfigError(
      "lda partition left a client without samples after repeated re-draws");
}

std::vector<std::vector<std::size_t>> PartitionMissingLabels(
    const Dataset& data, const PartitionSpec& spec, std::mt19937_64& rng) {
  const std::size_t n_clients = spec.client_count;
  const std::set<int> missing(spec.missing_labels.begin(),
                              spec.missing_labels.end());
  for (int label : missing) {
    if (label < 0 || label >= data.class_count)
      throw ConfigError("missing label " + std::to_string(label) +
                        " is outside [0, K)");
  }
  const std::size_t affected = AffectedClientCount(spec);
  std::vector<int> clients(n_clients);
  std::iota(clients.begin(), clients.end(), 0);
  std::shuffle(clients.begin(), clients.end(), rng);
  std::vector<int> unaffected(clients.begin() + affected, clients.end());
  std::sort(unaffected.begin(), unaffected.end());

  const auto by_label = ShuffledByLabel(data, rng);
  std::vector<std::vector<std::size_t>> shards(n_clients);
  std::size_t next_all = 0;
  std::size_t next_unaffected = 0;
  for (std::size_t label = 0; label < by_label.size(); ++label) {
    const auto& rows = by_label[label];
    if (missing.count(static_cast<int>(label))) {
      if (!rows.empty() && unaffected.empty())
        throw ConfigError(
            "missing_labels: every client is affected but the missing labels "
            "have samples");
      for (std::size_t r : rows)
        shards[unaffected[next_unaffected++ % unaffected.size()]].push_back(r);
    } else {
      for (std::size_t r : rows) shards[next_all++ % n_clients].push_back(r);
    }
  }
  if (AnyEmpty(shards))
    throw ConfigError("missing_labels partition left a client without samples");
  return shards;
}

std::vector<std::vector<std::size_t>> PartitionQuantitySkew(
    const Dataset& data, const PartitionSpec& spec, std::mt19937_64& rng) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const auto props = SampleDirichlet(spec.alpha, spec.client_count, rng);
    const auto counts = Apportion(data.size(), props);
    if (std::find(counts.begin(), counts.end(), 0u) != counts.end()) continue;
    std::vector<std::vector<std::size_t>> shards(spec.client_count);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      shards[c].assign(order.begin() + pos, order.begin() + pos + counts[c]);
      pos += counts[c];
    }
    return shards;
  }
  throw ConfigError(
      "quantity_skew partition left a client without samples after repeated "
      "re-draws");
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? "" : f.substr(b, e - b + 1);
  }
  return fields;
}

}  // namespace

void Dataset::Validate() const {
  if (empty()) throw ConfigError("dataset is empty");
  if (class_count < 1) throw ConfigError("dataset class_count must be >= 1");
  if (features.size() != size() * dim)
    throw ConfigError("feature matrix size does not match n x d");
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw ConfigError("label out of range");
  }
  if (has_groups()) {
    if (group_ids.size() != size())
      throw ConfigError("group_ids length does not match n");
    for (int g : group_ids) {
      if (g < 0 || g >= group_count) throw ConfigError("group id out of range");
    }
  }
}

Dataset Subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.dim = data.dim;
  out.class_count = data.class_count;
  out.group_count = data.group_count;
  out.features.reserve(indices.size() * data.dim);
  out.labels.reserve(indices.size());
  out.origin.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[i]);
    if (data.has_groups()) out.group_ids.push_back(data.group_ids[i]);
    out.origin.push_back(data.origin.empty() ? i : data.origin[i]);
  }
  return out;
}

std::vector<std::vector<std::size_t>> IndicesByLabel(const Dataset& data) {
  std::vector<std::vector<std::size_t>> by_label(data.class_count);
  for (std::size_t i = 0; i < data.size(); ++i)
    by_label[data.labels[i]].push_back(i);
  return by_label;
}

Dataset GenSynthetic(int classes, std::size_t dim, std::size_t samples,
                     double separation, uint64_t seed) {
  if (classes < 2) throw ConfigError("synthetic task needs k >= 2");
  if (dim < 1) throw ConfigError("synthetic task needs d >= 1");
  if (samples < static_cast<std::size_t>(classes))
    throw ConfigError("synthetic task needs n >= k");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double radius = separation / std::sqrt(2.0);

  std::vector<std::vector<double>> means(classes, std::vector<double>(dim));
  for (auto& m : means)
    for (auto& x : m) x = normal(rng);
  if (dim >= static_cast<std::size_t>(classes)) {
    // Gram-Schmidt on the Gaussian draws gives a random orthonormal frame.
    for (int c = 0; c < classes; ++c) {
      for (int p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t j = 0; j < dim; ++j) dot += means[c][j] * means[p][j];
        for (std::size_t j = 0; j < dim; ++j) means[c][j] -= dot * means[p][j];
      }
      const double norm = L2Norm(means[c]);
      for (auto& x : means[c]) x /= norm;
    }
  } else {
    for (auto& m : means) {
      const double norm = L2Norm(m);
      for (auto& x : m) x /= norm;
    }
  }
  for (auto& m : means)
    for (auto& x : m) x *= radius;

  Dataset data;
  data.dim = dim;
  data.class_count = classes;
  data.labels.resize(samples);
  for (std::size_t i = 0; i < samples; ++i)
    data.labels[i] = static_cast<int>(i % classes);
  std::shuffle(data.labels.begin(), data.labels.end(), rng);
  data.features.resize(samples * dim);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto& m = means[data.labels[i]];
    for (std::size_t j = 0; j < dim; ++j)
      data.features[i * dim + j] = m[j] + normal(rng);
  }
  data.origin.resize(samples);
  std::iota(data.origin.begin(), data.origin.end(), std::size_t{0});
  return data;
}

std::string ToString(PartitionScheme scheme) {
  switch (scheme) {
    case PartitionScheme::kIid:
      return "iid";
    case PartitionScheme::kLda:
      return "lda";
    case PartitionScheme::kMissingLabels:
      return "missing_labels";
    case PartitionScheme::kQuantitySkew:
      return "quantity_skew";
  }
  return "iid";
}

PartitionScheme ParsePartitionScheme(const std::string& name) {
  if (name == "iid") return PartitionScheme::kIid;
  if (name == "lda") return PartitionScheme::kLda;
  if (name == "missing_labels") return PartitionScheme::kMissingLabels;
  if (name == "quantity_skew") return PartitionScheme::kQuantitySkew;
  throw ConfigError("unknown partition scheme '" + name + "'");
}

int AffectedClientCount(const PartitionSpec& spec) {
  return static_cast<int>(
      std::floor(spec.affected_fraction * spec.client_count + 1e-9));
}

std::vector<Dataset> Partition(const Dataset& data, const PartitionSpec& spec) {
  data.Validate();
  if (spec.client_count < 1) throw ConfigError("client_count must be >= 1");
  if (data.size() < static_cast<std::size_t>(spec.client_count))
    throw ConfigError("fewer samples than clients");
  if ((spec.scheme == PartitionScheme::kLda ||
       spec.scheme == PartitionScheme::kQuantitySkew) &&
      !(spec.alpha > 0.0))
    throw ConfigError("partition alpha must be > 0");
  if (spec.scheme == PartitionScheme::kMissingLabels &&
      !(spec.affected_fraction >= 0.0 && spec.affected_fraction <= 1.0))
    throw ConfigError("affected_fraction must be in [0, 1]");

  std::mt19937_64 rng(spec.seed);
  switch (spec.scheme) {
    case PartitionScheme::kIid:
      return Materialize(data, PartitionIid(data, spec, rng));
    case PartitionScheme::kLda:
      return Materialize(data, PartitionLda(data, spec, rng));
    case PartitionScheme::kMissingLabels:
      return Materialize(data, PartitionMissingLabels(data, spec, rng));
    case PartitionScheme::kQuantitySkew:
      return Materialize(data, PartitionQuantitySkew(data, spec, rng));
  }
  throw ConfigError("unknown partition scheme");
}

ValidationSet MakeValidationSet(Dataset data) {
  ValidationSet val;
  val.label_indices = IndicesByLabel(data);
  if (data.has_groups()) {
    val.group_indices.resize(data.group_count);
    for (std::size_t i = 0; i < data.size(); ++i)
      val.group_indices[data.group_ids[i]].push_back(i);
  }
  val.data = std::move(data);
  return val;
}

HoldoutSplit BuildValidation(const Dataset& data, std::size_t per_label,
                             bool balanced, uint64_t seed) {
  data.Validate();
  if (per_label < 1) throw ConfigError("per_label must be >= 1");
  std::mt19937_64 rng(seed);
  const auto by_label = ShuffledByLabel(data, rng);
  std::vector<std::size_t> take(by_label.size());
  if (balanced) {
    for (std::size_t k = 0; k < by_label.size(); ++k) {
      if (by_label[k].size() < per_label)
        throw ConfigError("not enough samples of label " + std::to_string(k) +
                          " for a balanced validation set");
      take[k] = per_label;
    }
  } else {
    std::vector<double> weights(by_label.size());
    for (std::size_t k = 0; k < by_label.size(); ++k)
      weights[k] = static_cast<double>(by_label[k].size());
    take = Apportion(per_label * by_label.size(), weights);
    for (std::size_t k = 0; k < by_label.size(); ++k) {
      if (take[k] == 0 && !by_label[k].empty()) take[k] = 1;
      if (take[k] > by_label[k].size())
        throw ConfigError("not enough samples for the validation set");
    }
  }
  std::vector<std::size_t> chosen;
  std::vector<bool> used(data.size(), false);
  for (std::size_t k = 0; k < by_label.size(); ++k) {
    for (std::size_t j = 0; j < take[k]; ++j) {
      chosen.push_back(by_label[k][j]);
      used[by_label[k][j]] = true;
    }
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!used[i]) rest.push_back(i);
  }
  HoldoutSplit split;
  split.validation = MakeValidationSet(Subset(data, chosen));
  split.remainder = Subset(data, rest);
  return split;
}

Dataset LoadCsv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv file has no header row");
  const auto header = SplitCsvLine(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ConfigError("csv column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
  };
  if (schema.feature_columns.empty())
    throw ConfigError("csv schema needs at least one feature column");
  std::vector<std::size_t> feature_cols;
  for (const auto& name : schema.feature_columns)
    feature_cols.push_back(column(name));
  const std::size_t label_col = column(schema.label_column);
  std::optional<std::size_t> group_col;
  if (schema.group_column) group_col = column(*schema.group_column);

  Dataset data;
  data.dim = feature_cols.size();
  std::vector<std::string> group_values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = SplitCsvLine(line);
    const std::string where = "csv row " + std::to_string(line_no) + ": ";
    if (fields.size() != header.size())
      throw ConfigError(where + "expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
    for (std::size_t c : feature_cols) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[c], &used);
      } catch (...) {
        used = 0;
      }
      if (used == 0 || used != fields[c].size() || !std::isfinite(v))
        throw ConfigError(where + "non-numeric feature '" + fields[c] + "'");
      data.features.push_back(v);
    }
    long long label = -1;
    std::size_t used = 0;
    try {
      label = std::stoll(fields[label_col], &used);
    } catch (...) {
      used = 0;
    }
    if (used == 0 || used != fields[label_col].size() || label < 0 ||
        label > 1'000'000)
      throw ConfigError(where + "unknown label '" + fields[label_col] + "'");
    data.labels.push_back(static_cast<int>(label));
    if (group_col) group_values.push_back(fields[*group_col]);
  }
  if (data.empty()) throw ConfigError("csv file has no data rows");
  data.class_count = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  if (group_col) {
    std::map<std::string, int> ids;
    for (const auto& g : group_values) ids.emplace(g, 0);
    int next = 0;
    for (auto& [name, id] : ids) id = next++;
    data.group_count = next;
    for (const auto& g : group_values) data.group_ids.push_back(ids.at(g));
  }
  const std::size_t n = data.size();
  for (std::size_t j = 0; j < data.dim; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.features[i * data.dim + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = data.features[i * data.dim + j] - mean;
      var += d * d;
    }
    double sd = std::sqrt(var / static_cast<double>(n));
    if (sd < 1e-12) sd = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      data.features[i * data.dim + j] = (data.features[i * data.dim + j] - mean) / sd;
  }
  data.origin.resize(n);
  std::iota(data.origin.begin(), data.origin.end(), std::size_t{0});
  return data;
}

}  // namespace fedval
