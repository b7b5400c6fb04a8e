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

#include "fedval/scoring.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedval/parallel.h"

namespace fedval {
namespace {

constexpr double kRecallFloor = 1e-3;
constexpr double kTieTolerance = 1e-12;

double Mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Mean and MAD across clients of column `j` of a [client][j] table.
void ColumnStats(const std::vector<std::vector<double>>& table, std::size_t j,
                 double* mean, double* mad) {
  std::vector<double> col(table.size());
  for (std::size_t d = 0; d < table.size(); ++d) col[d] = table[d][j];
  *mean = Mean(col);
  *mad = Mad(col);
}

// One scoring dimension: bias * s1 * div / mad + c * s1, or only the
// baseline when the clients do not deviate.
double DimensionScore(double bias, double s1, double div, double mad,
                      double c) {
  if (mad < kMadEpsilon) return c * s1;
  return bias * s1 * div / mad + c * s1;
}

}  // namespace

double Mad(std::span<const double> values) {
  if (values.empty()) throw ConfigError("mad of an empty list");
  const double mean = Mean(values);
  double sum = 0.0;
  for (double v : values) sum += std::abs(v - mean);
  return sum / static_cast<double>(values.size());
}

double GroupRecall(std::span<const int> labels, std::span<const int> predictions,
                   std::span<const std::size_t> rows, int class_count) {
  if (class_count == 2) {
    std::size_t positives = 0;
    std::size_t hits = 0;
    for (std::size_t r : rows) {
      if (labels[r] != 1) continue;
      ++positives;
      if (predictions[r] == 1) ++hits;
    }
    if (positives == 0) return -1.0;
    return static_cast<double>(hits) / static_cast<double>(positives);
  }
  std::vector<std::size_t> positives(class_count, 0);
  std::vector<std::size_t> hits(class_count, 0);
  for (std::size_t r : rows) {
    ++positives[labels[r]];
    if (predictions[r] == labels[r]) ++hits[labels[r]];
  }
  double sum = 0.0;
  int present = 0;
  for (int k = 0; k < class_count; ++k) {
    if (positives[k] == 0) continue;
    sum += static_cast<double>(hits[k]) / static_cast<double>(positives[k]);
    ++present;
  }
  return present == 0 ? -1.0 : sum / present;
}

ValidationReport ReportFromEvaluations(const std::vector<Evaluation>& evals,
                                       const ValidationSet& val,
                                       bool recall_dim) {
  if (evals.empty()) throw ConfigError("validation report needs >= 1 client");
  const std::size_t k = val.label_indices.size();
  for (std::size_t label = 0; label < k; ++label) {
    if (val.label_indices[label].empty())
      throw ConfigError("label " + std::to_string(label) +
                        " is absent from the validation set");
  }
  ValidationReport report;
  const std::size_t n = evals.size();
  report.label_loss.assign(n, std::vector<double>(k, 0.0));
  report.overall_loss.assign(n, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    const auto& losses = evals[d].losses;
    for (std::size_t label = 0; label < k; ++label) {
      double s = 0.0;
      for (std::size_t r : val.label_indices[label]) s += losses[r];
      report.label_loss[d][label] =
          s / static_cast<double>(val.label_indices[label].size());
    }
    report.overall_loss[d] = Mean(losses);
  }

  if (recall_dim) {
    if (val.group_indices.empty()) {
      report.warnings.push_back(
          "recall dimension requested but the validation set has no groups; "
          "dimension dropped");
    }
    for (std::size_t g = 0; g < val.group_indices.size(); ++g) {
      const auto& rows = val.group_indices[g];
      std::vector<double> recalls(n);
      bool defined = true;
      for (std::size_t d = 0; d < n && defined; ++d) {
        recalls[d] = GroupRecall(val.data.labels, evals[d].predictions, rows,
                                 val.data.class_count);
        defined = recalls[d] >= 0.0;
      }
      if (!defined) {
        report.warnings.push_back("group " + std::to_string(g) +
                                  " has no positive validation samples; "
                                  "recall dimension dropped");
        continue;
      }
      report.recall_groups.push_back(static_cast<int>(g));
      if (report.group_recall.empty()) report.group_recall.resize(n);
      for (std::size_t d = 0; d < n; ++d)
        report.group_recall[d].push_back(recalls[d]);
    }
  }

  report.mean_label_loss.resize(k);
  report.mad_label_loss.resize(k);
  for (std::size_t label = 0; label < k; ++label)
    ColumnStats(report.label_loss, label, &report.mean_label_loss[label],
                &report.mad_label_loss[label]);
  report.mean_overall_loss = Mean(report.overall_loss);
  report.mad_overall_loss = Mad(report.overall_loss);
  const std::size_t groups = report.recall_groups.size();
  report.mean_group_recall.resize(groups);
  report.mad_group_recall.resize(groups);
  for (std::size_t g = 0; g < groups; ++g)
    ColumnStats(report.group_recall, g, &report.mean_group_recall[g],
                &report.mad_group_recall[g]);
  return report;
}

ValidationReport ComputeReport(const std::vector<ParamVector>& client_models,
                               const MlpSpec& spec, const ValidationSet& val,
                               bool recall_dim, int workers) {
  if (client_models.empty())
    throw ConfigError("validation report needs >= 1 client");
  std::vector<Evaluation> evals(client_models.size());
  ParallelFor(client_models.size(), workers, [&](std::size_t d) {
    evals[d] = EvalLosses(client_models[d], spec, val.data);
  });
  return ReportFromEvaluations(evals, val, recall_dim);
}

void ScoreParams::Validate() const {
  if (!(s1_label > 0.0)) throw ConfigError("s1_label must be > 0");
  if (!(s1_avg > 0.0)) throw ConfigError("s1_avg must be > 0");
  if (!(c >= 0.0)) throw ConfigError("c must be >= 0");
  if (!std::isfinite(s2) || !std::isfinite(s2_recall))
    throw ConfigError("score exponents must be finite");
  if (s2 < kMinS2) throw ConfigError("s2 must be >= 0.5");
  if (s2_recall < 0.0) throw ConfigError("s2_recall must be >= 0");
}

double BiasReducer(double ratio, double exponent) {
  if (!(ratio > 1.0)) return 1.0;
  const double v = std::pow(ratio, exponent);
  if (!(v < kMaxBiasReducer)) return kMaxBiasReducer;
  return std::max(1.0, v);
}

ScoreTable Score(const ValidationReport& report, const ScoreParams& params,
                 const ScoreDimensions& dims) {
  const std::size_t n = report.client_count();
  ScoreTable table;
  table.s2 = params.s2;
  table.raw.assign(n, 0.0);

  std::vector<double> label_bias(report.label_count(), 1.0);
  if (report.mean_overall_loss > 0.0) {
    for (std::size_t k = 0; k < label_bias.size(); ++k)
      label_bias[k] = BiasReducer(
          report.mean_label_loss[k] / report.mean_overall_loss, params.s2);
  }
  const std::size_t groups = report.recall_groups.size();
  std::vector<double> recall_bias(groups, 1.0);
  if (dims.recall && groups > 0) {
    const double avg = Mean(report.mean_group_recall);
    for (std::size_t g = 0; g < groups; ++g)
      recall_bias[g] = BiasReducer(
          avg / std::max(report.mean_group_recall[g], kRecallFloor),
          params.s2_recall);
  }

  for (std::size_t d = 0; d < n; ++d) {
    double s = 0.0;
    if (dims.labels) {
      for (std::size_t k = 0; k < report.label_count(); ++k) {
        const double div =
            report.mean_label_loss[k] - report.label_loss[d][k];
        s += DimensionScore(label_bias[k], params.s1_label, div,
                            report.mad_label_loss[k], params.c);
      }
    }
    if (dims.overall) {
      const double div = report.mean_overall_loss - report.overall_loss[d];
      s += DimensionScore(1.0, params.s1_avg, div, report.mad_overall_loss,
                          params.c);
    }
    if (dims.recall) {
      for (std::size_t g = 0; g < groups; ++g) {
        // Higher recall is better, so the deviation sign is flipped
        // relative to the loss dimensions.
        const double div =
            report.group_recall[d][g] - report.mean_group_recall[g];
        s += DimensionScore(recall_bias[g], params.s1_label, div,
                            report.mad_group_recall[g], params.c);
      }
    }
    table.raw[d] = s;
  }

  table.clamped.resize(n);
  double total = 0.0;
  for (std::size_t d = 0; d < n; ++d) {
    table.clamped[d] = std::max(table.raw[d], params.clamp_floor);
    total += table.clamped[d];
  }
  table.weights.assign(n, 0.0);
  if (total > 0.0 && std::isfinite(total)) {
    for (std::size_t d = 0; d < n; ++d)
      table.weights[d] = table.clamped[d] / total;
  } else {
    table.zero_update = true;
  }
  return table;
}

ParamVector WeightedAggregate(std::span<const double> global,
                              const std::vector<ClientUpdate>& updates,
                              std::span<const double> weights) {
  if (weights.size() != updates.size())
    throw ConfigError("one weight per client update is required");
  ParamVector out(global.begin(), global.end());
  for (std::size_t d = 0; d < updates.size(); ++d) {
    if (updates[d].delta.size() != global.size())
      throw ConfigError("client update length does not match the model");
    if (weights[d] == 0.0) continue;
    Axpy(weights[d], updates[d].delta, out);
  }
  return out;
}

std::vector<double> S2Candidates(double current) {
  std::vector<double> out;
  for (double c : {current, current + 0.5, current - 0.5, current - 5.0,
                   current + 5.0}) {
    c = std::max(c, kMinS2);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

std::size_t SelectS2(std::span<const double> candidates,
                     std::span<const double> losses, double current) {
  if (candidates.empty() || candidates.size() != losses.size())
    throw ConfigError("one validation loss per s2 candidate is required");
  const double best = *std::min_element(losses.begin(), losses.end());
  const double tol = kTieTolerance * std::max(1.0, std::abs(best));
  std::size_t chosen = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(losses[i] - best <= tol)) continue;
    if (chosen == candidates.size()) {
      chosen = i;
      continue;
    }
    const double di = std::abs(candidates[i] - current);
    const double dc = std::abs(candidates[chosen] - current);
    if (di < dc || (di == dc && candidates[i] < candidates[chosen])) chosen = i;
  }
  return chosen;
}

AdaptiveResult AdaptiveAggregate(std::span<const double> global,
                                 const std::vector<ClientUpdate>& updates,
                                 const ValidationReport& report,
                                 const ScoreParams& params,
                                 const ScoreDimensions& dims,
                                 const MlpSpec& spec, const ValidationSet& val,
                                 int workers) {
  AdaptiveResult result;
  result.candidates = S2Candidates(params.s2);
  const std::size_t m = result.candidates.size();
  std::vector<ScoreTable> tables(m);
  std::vector<ParamVector> models(m);
  result.candidate_losses.assign(m, 0.0);
  ParallelFor(m, workers, [&](std::size_t i) {
    ScoreParams p = params;
    p.s2 = result.candidates[i];
    tables[i] = Score(report, p, dims);
    models[i] = tables[i].zero_update
                    ? ParamVector(global.begin(), global.end())
                    : WeightedAggregate(global, updates, tables[i].weights);
    result.candidate_losses[i] = MeanLoss(models[i], spec, val.data);
  });
  const std::size_t best =
      SelectS2(result.candidates, result.candidate_losses, params.s2);
  result.s2 = result.candidates[best];
  result.table = std::move(tables[best]);
  result.model = std::move(models[best]);
  return result;
}

}  // namespace fedval
