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

#ifndef FEDVAL_ORCHESTRATOR_H_
#define FEDVAL_ORCHESTRATOR_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedval/adversary.h"
#include "fedval/aggregators.h"
#include "fedval/common.h"
#include "fedval/data.h"
#include "fedval/metrics.h"
#include "fedval/model.h"
#include "fedval/privacy.h"
#include "fedval/scoring.h"

namespace fedval {

enum class TaskKind { kSynthetic, kCsv };

struct TaskConfig {
  TaskKind kind = TaskKind::kSynthetic;
  // synthetic
  int classes = 10;
  std::size_t dim = 20;
  std::size_t train_samples = 4000;
  double separation = 4.0;
  uint64_t seed = 1;
  // csv
  std::string csv_path;
  CsvSchema schema;
  // Balanced test holdout taken before partitioning.
  std::size_t test_per_label = 100;
  uint64_t test_seed = 3;
};

struct ValidationConfig {
  std::size_t per_label = 10;
  bool balanced = true;
  uint64_t seed = 2;
};

struct ExperimentConfig {
  TaskConfig task;
  PartitionSpec partition;
  MlpSpec model;
  TrainSpec train;
  Strategy strategy;
  ScoreParams score;
  ScoreDimensions score_dims;
  AttackSpec attack;
  std::optional<DpState> dp;
  int rounds = 60;
  int clients_per_round = 10;
  uint64_t selection_seed = 0;
  ValidationConfig validation;
  int metrics_every = 1;

  // Checks everything that does not need the data. Messages start with the
  // offending field path.
  void Validate() const;
};

struct PreparedData {
  std::vector<Dataset> shards;
  ValidationSet validation;
  Dataset test;
};

// Generates or loads the task data, holds out validation and test sets,
// partitions the rest across clients.
PreparedData PrepareData(const ExperimentConfig& config);

struct RoundLog {
  int round = 0;
  std::vector<int> selected;
  std::vector<int> malicious_selected;
  // Aggregation weight per selected client (same order); empty for
  // strategies without per-client weights.
  std::vector<double> weights;
  // FedVal only.
  std::vector<double> raw_scores;
  std::vector<double> clamped_scores;
  std::optional<double> s2;
  std::vector<double> s2_candidates;
  std::vector<double> s2_candidate_losses;
  // Clients excluded by multi_krum / lfr.
  std::vector<int> excluded;
  std::optional<double> clip_bound;
  bool zero_update = false;
  std::vector<std::string> events;
  std::optional<MetricRecord> metrics;
};

// Uniform sample without replacement from {0..population-1}, depending only
// on (seed, round_index). Returned ascending.
std::vector<int> SelectClients(int population, int count, int round_index,
                               uint64_t selection_seed);

struct ExperimentState {
  ParamVector global;
  double s2 = 3.0;
  double clip_bound = 0.0;
  int completed_rounds = 0;
};

// One simulated federation: data, malicious placement, and round state.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config, int workers = 1);

  // Runs the next communication round.
  RoundLog RunRound();

  const ExperimentState& state() const { return state_; }
  const ExperimentConfig& config() const { return config_; }
  const PreparedData& data() const { return data_; }
  const std::vector<int>& malicious() const { return malicious_; }

  MetricRecord EvaluateGlobal(int round) const;

 private:
  ParamVector TrainClient(int client, int round) const;

  ExperimentConfig config_;
  int workers_;
  PreparedData data_;
  std::vector<int> malicious_;
  std::vector<bool> is_malicious_;
  ExperimentState state_;
};

struct ExperimentResult {
  ParamVector final_model;
  std::vector<MetricRecord> metrics;
  std::vector<RoundLog> rounds;
};

// Runs config.rounds rounds; `on_round` (optional) sees each log as it is
// produced.
ExperimentResult RunExperiment(
    const ExperimentConfig& config, int workers = 1,
    const std::function<void(const RoundLog&)>& on_round = nullptr);

struct TailProbability {
  int k0 = 0;
  double per_round = 0.0;
  double at_least_once = 0.0;
};

// k0 = ceil(0.75 * threshold * n); gives 9 for n = 30, threshold = 0.4.
int DefaultK0(int n_selected, double threshold_fraction);

// P(X >= k0) for X ~ Binomial(n_selected, fraction_malicious), summed in
// log space, and 1 - (1 - P)^rounds.
TailProbability MaliciousRoundProbability(int n_selected,
                                          double fraction_malicious,
                                          int k0, long long rounds);

TailProbability MaliciousRoundProbabilityForThreshold(
    int n_selected, double fraction_malicious, double threshold_fraction,
    long long rounds);

}  // namespace fedval

#endif  // FEDVAL_ORCHESTRATOR_H_
