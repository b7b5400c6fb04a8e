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

#include "fedval/aggregators.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedval/parallel.h"

namespace fedval {
namespace {

void CheckUpdates(std::span<const double> global,
                  const std::vector<ClientUpdate>& updates) {
  if (updates.empty()) throw ConfigError("aggregation needs >= 1 update");
  for (const auto& u : updates) {
    if (u.delta.size() != global.size())
      throw ConfigError("client update length does not match the model");
  }
}

std::size_t FloorCount(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * n + 1e-9));
}

}  // namespace

void Strategy::Validate() const {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw ConfigError("strategy fraction must be in [0, 1)");
}

std::string ToString(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFedAvg:
      return "fedavg";
    case StrategyKind::kFedVal:
      return "fedval";
    case StrategyKind::kMultiKrum:
      return "multi_krum";
    case StrategyKind::kLfr:
      return "lfr";
    case StrategyKind::kTrimmedMean:
      return "trimmed_mean";
  }
  return "fedavg";
}

StrategyKind ParseStrategyKind(const std::string& name) {
  if (name == "fedavg") return StrategyKind::kFedAvg;
  if (name == "fedval") return StrategyKind::kFedVal;
  if (name == "multi_krum") return StrategyKind::kMultiKrum;
  if (name == "lfr") return StrategyKind::kLfr;
  if (name == "trimmed_mean") return StrategyKind::kTrimmedMean;
  throw ConfigError("unknown strategy '" + name + "'");
}

std::string ToString(PreTransform t) {
  return t == PreTransform::kNormBound ? "norm_bound" : "dp_noise";
}

PreTransform ParsePreTransform(const std::string& name) {
  if (name == "norm_bound") return PreTransform::kNormBound;
  if (name == "dp_noise") return PreTransform::kDpNoise;
  throw ConfigError("unknown pre-transform '" + name + "'");
}

std::vector<double> SampleWeights(const std::vector<ClientUpdate>& updates) {
  double total = 0.0;
  for (const auto& u : updates) total += static_cast<double>(u.sample_count);
  if (!(total > 0.0)) throw ConfigError("fedavg: total sample count is zero");
  std::vector<double> w(updates.size());
  for (std::size_t d = 0; d < updates.size(); ++d)
    w[d] = static_cast<double>(updates[d].sample_count) / total;
  return w;
}

ParamVector FedAvg(std::span<const double> global,
                   const std::vector<ClientUpdate>& updates) {
  CheckUpdates(global, updates);
  const auto w = SampleWeights(updates);
  ParamVector out(global.size(), 0.0);
  for (std::size_t d = 0; d < updates.size(); ++d) {
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] += w[d] * (global[j] + updates[d].delta[j]);
  }
  return out;
}

KrumSelection MultiKrum(const std::vector<ClientUpdate>& updates,
                        double remove_fraction) {
  if (updates.empty()) throw ConfigError("multi_krum needs >= 1 update");
  if (!(remove_fraction >= 0.0 && remove_fraction < 1.0))
    throw ConfigError("multi_krum remove_fraction must be in [0, 1)");
  const std::size_t n = updates.size();
  const std::size_t f = FloorCount(remove_fraction, n);
  const std::size_t keep = n - f;
  if (keep < 1) throw ConfigError("multi_krum must keep at least one client");

  KrumSelection sel;
  sel.scores.assign(n, 0.0);
  if (n == 1) {
    sel.selected = {0};
    return sel;
  }
  if (n < f + 3) {
    sel.fallback = true;
    sel.neighbours = 1;
  } else {
    sel.neighbours = n - f - 2;
  }
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] =
          SquaredDistance(updates[i].delta, updates[j].delta);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(dist[i][j]);
    }
    std::partial_sort(others.begin(), others.begin() + sel.neighbours,
                      others.end());
    sel.scores[i] = std::accumulate(others.begin(),
                                    others.begin() + sel.neighbours, 0.0);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sel.scores[a] < sel.scores[b];
  });
  sel.selected.assign(order.begin(), order.begin() + keep);
  std::sort(sel.selected.begin(), sel.selected.end());
  return sel;
}

ParamVector MeanOfSelected(std::span<const double> global,
                           const std::vector<ClientUpdate>& updates,
                           std::span<const std::size_t> selected) {
  CheckUpdates(global, updates);
  if (selected.empty()) throw ConfigError("no update selected");
  ParamVector out(global.begin(), global.end());
  const double w = 1.0 / static_cast<double>(selected.size());
  for (std::size_t i : selected) Axpy(w, updates.at(i).delta, out);
  return out;
}

LfrResult LfrFromLosses(std::span<const double> global,
                        const std::vector<ClientUpdate>& updates,
                        std::vector<double> losses, double remove_fraction) {
  CheckUpdates(global, updates);
  if (!(remove_fraction >= 0.0 && remove_fraction < 1.0))
    throw ConfigError("lfr remove_fraction must be in [0, 1)");
  const std::size_t n = updates.size();
  const auto drop = static_cast<std::size_t>(
      std::ceil(remove_fraction * static_cast<double>(n) - 1e-9));
  if (drop >= n)
    throw ConfigError("lfr remove_fraction drops every client for n = " +
                      std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return losses[a] < losses[b];
  });
  LfrResult result;
  result.kept.assign(order.begin(), order.end() - drop);
  result.dropped.assign(order.end() - drop, order.end());
  std::sort(result.kept.begin(), result.kept.end());
  std::sort(result.dropped.begin(), result.dropped.end());
  std::vector<ClientUpdate> kept;
  kept.reserve(result.kept.size());
  for (std::size_t i : result.kept) kept.push_back(updates[i]);
  result.model = FedAvg(global, kept);
  result.losses = std::move(losses);
  return result;
}

LfrResult Lfr(std::span<const double> global,
              const std::vector<ClientUpdate>& updates, const MlpSpec& spec,
              const Dataset& validation, double remove_fraction, int workers) {
  CheckUpdates(global, updates);
  std::vector<double> losses(updates.size());
  ParallelFor(updates.size(), workers, [&](std::size_t d) {
    losses[d] = MeanLoss(Add(global, updates[d].delta), spec, validation);
  });
  return LfrFromLosses(global, updates, std::move(losses), remove_fraction);
}

ParamVector TrimmedMean(std::span<const double> global,
                        const std::vector<ClientUpdate>& updates,
                        double trim_fraction) {
  CheckUpdates(global, updates);
  const std::size_t n = updates.size();
  if (!(trim_fraction >= 0.0 && trim_fraction < 1.0))
    throw ConfigError("trim_fraction must be in [0, 1)");
  const std::size_t t = FloorCount(trim_fraction, n);
  if (2 * t >= n) throw ConfigError("trimmed_mean trims every value");
  ParamVector out(global.begin(), global.end());
  std::vector<double> column(n);
  const double w = 1.0 / static_cast<double>(n - 2 * t);
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t d = 0; d < n; ++d) column[d] = updates[d].delta[j];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (std::size_t d = t; d < n - t; ++d) s += column[d];
    out[j] += s * w;
  }
  return out;
}

}  // namespace fedval
