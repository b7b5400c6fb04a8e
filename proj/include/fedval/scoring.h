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

#ifndef FEDVAL_SCORING_H_
#define FEDVAL_SCORING_H_

#include <span>
#include <string>
#include <vector>

#include "fedval/common.h"
#include "fedval/data.h"
#include "fedval/model.h"

namespace fedval {

// Validation losses (and optionally group recalls) of every client model in
// a round, plus the cross-client means and mean absolute deviations.
struct ValidationReport {
  // [client][label] mean validation loss restricted to that label.
  std::vector<std::vector<double>> label_loss;
  // [client] mean validation loss over the whole validation set.
  std::vector<double> overall_loss;
  // [client][i] recall within recall_groups[i]; empty when inactive.
  std::vector<std::vector<double>> group_recall;
  std::vector<int> recall_groups;

  std::vector<double> mean_label_loss;
  std::vector<double> mad_label_loss;
  double mean_overall_loss = 0.0;
  double mad_overall_loss = 0.0;
  std::vector<double> mean_group_recall;
  std::vector<double> mad_group_recall;

  std::vector<std::string> warnings;

  std::size_t client_count() const { return overall_loss.size(); }
  std::size_t label_count() const { return mean_label_loss.size(); }
};

// Mean absolute deviation from the arithmetic mean.
double Mad(std::span<const double> values);

// Recall of `predictions` against `labels` over `rows`: the positive-class
// (label 1) true-positive rate for binary tasks, macro-averaged per-class
// recall otherwise. Returns a negative value when no row has a label the
// recall is defined over.
double GroupRecall(std::span<const int> labels, std::span<const int> predictions,
                   std::span<const std::size_t> rows, int class_count);

// Builds a report from per-client evaluations on `val`. Fills the
// cross-client fields.
ValidationReport ReportFromEvaluations(const std::vector<Evaluation>& evals,
                                       const ValidationSet& val,
                                       bool recall_dim);

ValidationReport ComputeReport(const std::vector<ParamVector>& client_models,
                               const MlpSpec& spec, const ValidationSet& val,
                               bool recall_dim, int workers = 1);

struct ScoreParams {
  double s1_label = 3.0;
  double s1_avg = 5.0;
  double s2 = 3.0;
  double s2_recall = 30.0;
  double c = 3.0;
  double clamp_floor = 0.0;

  void Validate() const;
};

struct ScoreDimensions {
  bool labels = true;
  bool overall = true;
  bool recall = false;
};

struct ScoreTable {
  std::vector<double> raw;
  std::vector<double> clamped;
  std::vector<double> weights;
  double s2 = 0.0;
  // Set when no clamped score is positive; weights are all zero and the
  // global model stays unchanged this round.
  bool zero_update = false;
};

// Dimensions whose MAD is below this contribute only their baseline C * s1.
inline constexpr double kMadEpsilon = 1e-9;

// Largest value the bias reducer may take; keeps scores finite for large
// exponents.
inline constexpr double kMaxBiasReducer = 1e100;

// max(1, (ratio)^exponent), capped at kMaxBiasReducer.
double BiasReducer(double ratio, double exponent);

ScoreTable Score(const ValidationReport& report, const ScoreParams& params,
                 const ScoreDimensions& dims);

// theta_g + sum_d weights[d] * delta_d.
ParamVector WeightedAggregate(std::span<const double> global,
                              const std::vector<ClientUpdate>& updates,
                              std::span<const double> weights);

// Candidate exponents around `current`: {s, s+0.5, s-0.5, s-5, s+5}, each
// clamped to >= kMinS2, duplicates removed, order kept.
std::vector<double> S2Candidates(double current);

inline constexpr double kMinS2 = 0.5;

// Index of the candidate with the lowest validation loss. Ties (relative
// 1e-12) go to the candidate closest to `current`, then the smaller value.
std::size_t SelectS2(std::span<const double> candidates,
                     std::span<const double> losses, double current);

struct AdaptiveResult {
  ParamVector model;
  ScoreTable table;
  double s2 = 0.0;
  std::vector<double> candidates;
  std::vector<double> candidate_losses;
};

// One score-weighted aggregation round with adaptive exponent selection:
// scores and aggregates once per candidate exponent, validates each
// candidate global model, keeps the best.
AdaptiveResult AdaptiveAggregate(std::span<const double> global,
                                 const std::vector<ClientUpdate>& updates,
                                 const ValidationReport& report,
                                 const ScoreParams& params,
                                 const ScoreDimensions& dims,
                                 const MlpSpec& spec, const ValidationSet& val,
                                 int workers = 1);

}  // namespace fedval

#endif  // FEDVAL_SCORING_H_
