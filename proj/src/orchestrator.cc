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

#include "fedval/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fedval/parallel.h"

namespace fedval {
namespace {

void Require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field + ": " + message);
}

// Re-throws a module-level ConfigError with the config field it came from.
template <typename Fn>
void WithField(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

bool HasTransform(const Strategy& s, PreTransform t) {
  return std::find(s.pre_transforms.begin(), s.pre_transforms.end(), t) !=
         s.pre_transforms.end();
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (task.kind == TaskKind::kSynthetic) {
    Require(task.classes >= 2, "task.classes", "must be >= 2");
    Require(task.dim >= 1, "task.dim", "must be >= 1");
    Require(task.train_samples >= static_cast<std::size_t>(std::max(
                                      partition.client_count, task.classes)),
            "task.train_samples", "must be >= client_count and >= classes");
  } else {
    Require(!task.csv_path.empty(), "task.csv_path", "must be set");
    Require(!task.schema.feature_columns.empty(), "task.feature_columns",
            "must list at least one column");
    Require(!task.schema.label_column.empty(), "task.label_column",
            "must be set");
  }
  Require(task.test_per_label >= 1, "task.test_per_label", "must be >= 1");
  Require(partition.client_count >= 1, "partition.client_count",
          "must be >= 1");
  if (partition.scheme == PartitionScheme::kLda ||
      partition.scheme == PartitionScheme::kQuantitySkew)
    Require(partition.alpha > 0.0, "partition.alpha", "must be > 0");
  if (partition.scheme == PartitionScheme::kMissingLabels)
    Require(partition.affected_fraction >= 0.0 &&
                partition.affected_fraction <= 1.0,
            "partition.affected_fraction", "must be in [0, 1]");
  WithField("model", [&] { model.Validate(); });
  if (task.kind == TaskKind::kSynthetic) {
    Require(model.input_dim() == static_cast<int>(task.dim),
            "model.layer_sizes", "first entry must equal task.dim");
    Require(model.class_count() == task.classes, "model.layer_sizes",
            "last entry must equal task.classes");
  }
  WithField("train", [&] { train.Validate(); });
  WithField("strategy", [&] { strategy.Validate(); });
  Require(strategy.pre_transforms.empty() || dp.has_value(),
          "strategy.pre_transforms", "requires a dp section");
  WithField("score", [&] { score.Validate(); });
  if (task.kind == TaskKind::kSynthetic)
    WithField("attack", [&] { attack.Validate(task.classes); });
  if (dp) WithField("dp", [&] { dp->Validate(); });
  Require(rounds >= 0, "rounds", "must be >= 0");
  Require(clients_per_round >= 1, "clients_per_round", "must be >= 1");
  Require(clients_per_round <= partition.client_count, "clients_per_round",
          "must be <= partition.client_count");
  Require(validation.per_label >= 1, "validation.per_label", "must be >= 1");
  Require(metrics_every >= 1, "metrics_every", "must be >= 1");
}

PreparedData PrepareData(const ExperimentConfig& config) {
  Dataset all;
  if (config.task.kind == TaskKind::kSynthetic) {
    const std::size_t k = config.task.classes;
    const std::size_t total =
        config.task.train_samples +
        k * (config.validation.per_label + config.task.test_per_label);
    all = GenSynthetic(config.task.classes, config.task.dim, total,
                       config.task.separation, config.task.seed);
  } else {
    WithField("task", [&] {
      all = LoadCsv(config.task.csv_path, config.task.schema);
    });
  }
  PreparedData data;
  HoldoutSplit test_split;
  WithField("task.test_per_label", [&] {
    test_split = BuildValidation(all, config.task.test_per_label, true,
                                 config.task.test_seed);
  });
  data.test = std::move(test_split.validation.data);
  HoldoutSplit val_split;
  WithField("validation", [&] {
    val_split =
        BuildValidation(test_split.remainder, config.validation.per_label,
                        config.validation.balanced, config.validation.seed);
  });
  data.validation = std::move(val_split.validation);
  WithField("partition", [&] {
    data.shards = Partition(val_split.remainder, config.partition);
  });
  return data;
}

std::vector<int> SelectClients(int population, int count, int round_index,
                               uint64_t selection_seed) {
  if (count < 0 || count > population)
    throw ConfigError("cannot select more clients than the population");
  std::vector<int> ids(population);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(
      DeriveSeed(selection_seed, {static_cast<uint64_t>(round_index)}));
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

Experiment::Experiment(ExperimentConfig config, int workers)
    : config_(std::move(config)), workers_(std::max(workers, 1)) {
  config_.Validate();
  data_ = PrepareData(config_);
  const Dataset& probe = data_.test;
  Require(config_.model.input_dim() == static_cast<int>(probe.dim),
          "model.layer_sizes", "first entry must equal the feature dimension");
  Require(config_.model.class_count() == probe.class_count,
          "model.layer_sizes", "last entry must equal the class count");
  if (config_.task.kind == TaskKind::kCsv)
    WithField("attack", [&] { config_.attack.Validate(probe.class_count); });

  const int n = config_.partition.client_count;
  is_malicious_.assign(n, false);
  if (config_.attack.kind != AttackKind::kNone) {
    malicious_ = PlaceMalicious(n, config_.attack.malicious_fraction,
                                config_.attack.placement_seed);
    for (int id : malicious_) is_malicious_[id] = true;
  }
  if (config_.attack.kind == AttackKind::kLabelFlip) {
    for (int id : malicious_)
      data_.shards[id] =
          PoisonDataset(data_.shards[id], config_.attack.source_label,
                        config_.attack.target_label);
  }
  state_.global = InitParams(config_.model);
  state_.s2 = config_.score.s2;
  if (config_.dp) state_.clip_bound = config_.dp->clip_bound;
}

ParamVector Experiment::TrainClient(int client, int round) const {
  TrainSpec train = config_.train;
  train.seed = DeriveSeed(config_.train.seed, {static_cast<uint64_t>(round),
                                               static_cast<uint64_t>(client)});
  const Dataset& shard = data_.shards[client];
  if (is_malicious_[client] && config_.attack.kind == AttackKind::kPga) {
    return PgaUpdate(state_.global, config_.model, shard, train,
                     config_.attack.scale_factor, config_.attack.ascent_epochs)
        .params;
  }
  return LocalTrain(state_.global, config_.model, shard, train);
}

MetricRecord Experiment::EvaluateGlobal(int round) const {
  std::optional<BackdoorTarget> backdoor;
  if (config_.attack.kind == AttackKind::kLabelFlip)
    backdoor = BackdoorTarget{config_.attack.source_label,
                              config_.attack.target_label};
  MetricRecord rec =
      Evaluate(state_.global, config_.model, data_.test, backdoor);
  rec.round = round;
  rec.mean_validation_loss =
      MeanLoss(state_.global, config_.model, data_.validation.data);
  return rec;
}

RoundLog Experiment::RunRound() {
  const int round = state_.completed_rounds;
  RoundLog log;
  log.round = round + 1;
  log.selected = SelectClients(config_.partition.client_count,
                               config_.clients_per_round, round,
                               config_.selection_seed);
  for (int id : log.selected) {
    if (is_malicious_[id]) log.malicious_selected.push_back(id);
  }

  const std::size_t n = log.selected.size();
  std::vector<std::optional<ParamVector>> trained(n);
  ParallelFor(n, workers_, [&](std::size_t i) {
    try {
      trained[i] = TrainClient(log.selected[i], round);
    } catch (const EmptyClientError&) {
      trained[i].reset();
    }
  });

  // Positions (into log.selected) of clients that produced an update.
  std::vector<std::size_t> active;
  std::vector<ClientUpdate> updates;
  for (std::size_t i = 0; i < n; ++i) {
    const int id = log.selected[i];
    if (!trained[i]) {
      log.events.push_back("client " + std::to_string(id) +
                           " skipped: empty dataset");
      continue;
    }
    active.push_back(i);
    updates.push_back(ClientUpdate{id, Subtract(*trained[i], state_.global),
                                   data_.shards[id].size()});
  }

  const Strategy& strategy = config_.strategy;
  if (!updates.empty() && config_.dp) {
    if (HasTransform(strategy, PreTransform::kNormBound)) {
      log.clip_bound = state_.clip_bound;
      std::vector<bool> flags(updates.size());
      for (std::size_t i = 0; i < updates.size(); ++i) {
        ClipResult c = Clip(updates[i].delta, state_.clip_bound);
        updates[i].delta = std::move(c.delta);
        flags[i] = c.clipped;
      }
      DpState dp = *config_.dp;
      dp.clip_bound = state_.clip_bound;
      state_.clip_bound = AdaptBound(dp, flags);
    }
    if (HasTransform(strategy, PreTransform::kDpNoise)) {
      for (auto& u : updates) {
        u.delta = AddNoise(
            u.delta, config_.dp->noise_multiplier, state_.clip_bound,
            updates.size(),
            DeriveSeed(config_.selection_seed,
                       {0xd9ULL, static_cast<uint64_t>(round),
                        static_cast<uint64_t>(u.client_id)}));
      }
    }
  }

  auto spread = [&](const std::vector<double>& per_update) {
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < active.size(); ++j)
      out[active[j]] = per_update[j];
    return out;
  };

  ParamVector next = state_.global;
  if (updates.empty()) {
    log.zero_update = true;
    log.events.push_back("no client produced an update; global unchanged");
  } else {
    try {
      switch (strategy.kind) {
        case StrategyKind::kFedAvg:
          next = FedAvg(state_.global, updates);
          log.weights = spread(SampleWeights(updates));
          break;
        case StrategyKind::kFedVal: {
          std::vector<ParamVector> models;
          models.reserve(updates.size());
          for (const auto& u : updates)
            models.push_back(Add(state_.global, u.delta));
          const ValidationReport report =
              ComputeReport(models, config_.model, data_.validation,
                            config_.score_dims.recall, workers_);
          for (const auto& w : report.warnings) log.events.push_back(w);
          ScoreParams params = config_.score;
          params.s2 = state_.s2;
          AdaptiveResult r = AdaptiveAggregate(
              state_.global, updates, report, params, config_.score_dims,
              config_.model, data_.validation, workers_);
          state_.s2 = r.s2;
          log.s2 = r.s2;
          log.s2_candidates = r.candidates;
          log.s2_candidate_losses = r.candidate_losses;
          log.raw_scores = spread(r.table.raw);
          log.clamped_scores = spread(r.table.clamped);
          log.weights = spread(r.table.weights);
          log.zero_update = r.table.zero_update;
          if (r.table.zero_update)
            log.events.push_back(
                "all clamped scores are zero; global unchanged");
          next = std::move(r.model);
          break;
        }
        case StrategyKind::kMultiKrum: {
          const KrumSelection sel = MultiKrum(updates, strategy.fraction);
          if (sel.fallback)
            log.events.push_back(
                "multi_krum: too few clients for n - f - 2 neighbours; "
                "using the nearest neighbour");
          next = MeanOfSelected(state_.global, updates, sel.selected);
          std::vector<double> w(updates.size(), 0.0);
          for (std::size_t i : sel.selected)
            w[i] = 1.0 / static_cast<double>(sel.selected.size());
          log.weights = spread(w);
          for (std::size_t i = 0; i < updates.size(); ++i) {
            if (w[i] == 0.0) log.excluded.push_back(updates[i].client_id);
          }
          break;
        }
        case StrategyKind::kLfr: {
          LfrResult r = Lfr(state_.global, updates, config_.model,
                            data_.validation.data, strategy.fraction, workers_);
          std::vector<ClientUpdate> kept;
          for (std::size_t i : r.kept) kept.push_back(updates[i]);
          const auto kept_w = SampleWeights(kept);
          std::vector<double> w(updates.size(), 0.0);
          for (std::size_t j = 0; j < r.kept.size(); ++j) w[r.kept[j]] = kept_w[j];
          log.weights = spread(w);
          for (std::size_t i : r.dropped)
            log.excluded.push_back(updates[i].client_id);
          next = std::move(r.model);
          break;
        }
        case StrategyKind::kTrimmedMean:
          next = TrimmedMean(state_.global, updates, strategy.fraction);
          break;
      }
    } catch (const ConfigError& e) {
      throw ConfigError("round " + std::to_string(round + 1) + ": " +
                        e.what());
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("round " + std::to_string(round + 1) + ": " +
                               e.what());
    }
  }
  state_.global = std::move(next);
  state_.completed_rounds = round + 1;

  if ((round + 1) % config_.metrics_every == 0 ||
      round + 1 == config_.rounds)
    log.metrics = EvaluateGlobal(round + 1);
  return log;
}

ExperimentResult RunExperiment(
    const ExperimentConfig& config, int workers,
    const std::function<void(const RoundLog&)>& on_round) {
  Experiment experiment(config, workers);
  ExperimentResult result;
  for (int t = 0; t < config.rounds; ++t) {
    RoundLog log = experiment.RunRound();
    if (on_round) on_round(log);
    if (log.metrics) result.metrics.push_back(*log.metrics);
    result.rounds.push_back(std::move(log));
  }
  result.final_model = experiment.state().global;
  return result;
}

int DefaultK0(int n_selected, double threshold_fraction) {
  return static_cast<int>(
      std::ceil(0.75 * threshold_fraction * n_selected - 1e-9));
}

TailProbability MaliciousRoundProbability(int n_selected,
                                          double fraction_malicious, int k0,
                                          long long rounds) {
  if (n_selected < 0) throw ConfigError("n must be >= 0");
  if (!(fraction_malicious >= 0.0 && fraction_malicious <= 1.0))
    throw ConfigError("malicious fraction must be in [0, 1]");
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  TailProbability out;
  out.k0 = k0;
  const double p = fraction_malicious;
  if (k0 <= 0) {
    out.per_round = 1.0;
  } else if (k0 > n_selected || p == 0.0) {
    out.per_round = 0.0;
  } else if (p == 1.0) {
    out.per_round = 1.0;
  } else {
    const double n = n_selected;
    std::vector<double> logs;
    for (int k = k0; k <= n_selected; ++k) {
      logs.push_back(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                     std::lgamma(n - k + 1.0) + k * std::log(p) +
                     (n - k) * std::log1p(-p));
    }
    const double mx = *std::max_element(logs.begin(), logs.end());
    double s = 0.0;
    for (double l : logs) s += std::exp(l - mx);
    out.per_round = std::min(1.0, std::exp(mx + std::log(s)));
  }
  if (rounds == 0 || out.per_round == 0.0) {
    out.at_least_once = 0.0;
  } else if (out.per_round >= 1.0) {
    out.at_least_once = 1.0;
  } else {
    out.at_least_once =
        -std::expm1(static_cast<double>(rounds) * std::log1p(-out.per_round));
  }
  return out;
}

TailProbability MaliciousRoundProbabilityForThreshold(
    int n_selected, double fraction_malicious, double threshold_fraction,
    long long rounds) {
  return MaliciousRoundProbability(n_selected, fraction_malicious,
                                   DefaultK0(n_selected, threshold_fraction),
                                   rounds);
}

}  // namespace fedval
