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

#include "fedval/config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fedval {
namespace {

using nlohmann::json;

// Typed field access on one JSON object that remembers which keys were
// read, so leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Where() + "expected an object");
  }

  template <typename T>
  void Read(const std::string& key, T* out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) throw std::invalid_argument("expected a string");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!it->is_number_unsigned())
          throw std::invalid_argument("expected a non-negative integer");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer())
          throw std::invalid_argument("expected an integer");
      }
      *out = it->get<T>();
    } catch (const std::exception& e) {
      throw ConfigError(Path(key) + ": " + e.what());
    }
  }

  const json* Child(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(Path(key) + ": unknown key");
    }
  }

 private:
  std::string Where() const { return path_.empty() ? "" : path_ + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto Parsed(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

void ReadTask(const json& j, TaskConfig* t) {
  ObjectReader r(j, "task");
  std::string kind = t->kind == TaskKind::kSynthetic ? "synthetic" : "csv";
  r.Read("kind", &kind);
  if (kind == "synthetic") {
    t->kind = TaskKind::kSynthetic;
  } else if (kind == "csv") {
    t->kind = TaskKind::kCsv;
  } else {
    throw ConfigError("task.kind: unknown task kind '" + kind + "'");
  }
  r.Read("classes", &t->classes);
  r.Read("dim", &t->dim);
  r.Read("train_samples", &t->train_samples);
  r.Read("separation", &t->separation);
  r.Read("seed", &t->seed);
  r.Read("path", &t->csv_path);
  r.Read("feature_columns", &t->schema.feature_columns);
  r.Read("label_column", &t->schema.label_column);
  std::string group;
  r.Read("group_column", &group);
  if (!group.empty()) t->schema.group_column = group;
  r.Read("test_per_label", &t->test_per_label);
  r.Read("test_seed", &t->test_seed);
  r.Finish();
}

// Population used when the partition section omits client_count.
constexpr int kDefaultClientCount = 40;

void ReadPartition(const json& j, PartitionSpec* p) {
  ObjectReader r(j, "partition");
  std::string scheme = ToString(p->scheme);
  r.Read("scheme", &scheme);
  p->scheme = Parsed("partition.scheme",
                     [&] { return ParsePartitionScheme(scheme); });
  r.Read("alpha", &p->alpha);
  r.Read("missing_labels", &p->missing_labels);
  r.Read("affected_fraction", &p->affected_fraction);
  r.Read("client_count", &p->client_count);
  r.Read("seed", &p->seed);
  r.Finish();
}

void ReadModel(const json& j, MlpSpec* m) {
  ObjectReader r(j, "model");
  r.Read("layer_sizes", &m->layer_sizes);
  std::string act = ToString(m->activation);
  r.Read("activation", &act);
  m->activation =
      Parsed("model.activation", [&] { return ParseActivation(act); });
  r.Read("seed", &m->seed);
  r.Finish();
}

void ReadTrain(const json& j, TrainSpec* t) {
  ObjectReader r(j, "train");
  r.Read("epochs", &t->epochs);
  r.Read("batch_size", &t->batch_size);
  r.Read("learning_rate", &t->learning_rate);
  r.Read("prox_mu", &t->prox_mu);
  r.Read("seed", &t->seed);
  r.Finish();
}

void ReadStrategy(const json& j, Strategy* s) {
  ObjectReader r(j, "strategy");
  std::string kind = ToString(s->kind);
  r.Read("kind", &kind);
  s->kind = Parsed("strategy.kind", [&] { return ParseStrategyKind(kind); });
  r.Read("fraction", &s->fraction);
  std::vector<std::string> transforms;
  r.Read("pre_transforms", &transforms);
  s->pre_transforms.clear();
  for (const auto& t : transforms)
    s->pre_transforms.push_back(
        Parsed("strategy.pre_transforms", [&] { return ParsePreTransform(t); }));
  r.Finish();
}

void ReadScore(const json& j, ScoreParams* p, ScoreDimensions* dims) {
  ObjectReader r(j, "score");
  r.Read("s1_label", &p->s1_label);
  r.Read("s1_avg", &p->s1_avg);
  r.Read("s2", &p->s2);
  r.Read("s2_recall", &p->s2_recall);
  r.Read("c", &p->c);
  r.Read("clamp_floor", &p->clamp_floor);
  if (const json* d = r.Child("dimensions")) {
    ObjectReader dr(*d, "score.dimensions");
    dr.Read("labels", &dims->labels);
    dr.Read("overall", &dims->overall);
    dr.Read("recall", &dims->recall);
    dr.Finish();
  }
  r.Finish();
}

void ReadAttack(const json& j, AttackSpec* a) {
  ObjectReader r(j, "attack");
  std::string kind = ToString(a->kind);
  r.Read("kind", &kind);
  a->kind = Parsed("attack.kind", [&] { return ParseAttackKind(kind); });
  r.Read("source_label", &a->source_label);
  r.Read("target_label", &a->target_label);
  r.Read("scale_factor", &a->scale_factor);
  r.Read("ascent_epochs", &a->ascent_epochs);
  r.Read("malicious_fraction", &a->malicious_fraction);
  r.Read("placement_seed", &a->placement_seed);
  r.Finish();
}

void ReadDp(const json& j, DpState* d) {
  ObjectReader r(j, "dp");
  r.Read("clip_bound", &d->clip_bound);
  r.Read("target_quantile", &d->target_quantile);
  r.Read("adapt_rate", &d->adapt_rate);
  r.Read("noise_multiplier", &d->noise_multiplier);
  r.Finish();
}

void ReadValidation(const json& j, ValidationConfig* v) {
  ObjectReader r(j, "validation");
  r.Read("per_label", &v->per_label);
  r.Read("balanced", &v->balanced);
  r.Read("seed", &v->seed);
  r.Finish();
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

ExperimentConfig ConfigFromJson(const json& j) {
  ExperimentConfig c;
  c.partition.client_count = kDefaultClientCount;
  ObjectReader r(j, "");
  if (const json* x = r.Child("task")) ReadTask(*x, &c.task);
  if (const json* x = r.Child("partition")) ReadPartition(*x, &c.partition);
  if (const json* x = r.Child("model")) ReadModel(*x, &c.model);
  if (const json* x = r.Child("train")) ReadTrain(*x, &c.train);
  if (const json* x = r.Child("strategy")) ReadStrategy(*x, &c.strategy);
  if (const json* x = r.Child("score")) ReadScore(*x, &c.score, &c.score_dims);
  if (const json* x = r.Child("attack")) ReadAttack(*x, &c.attack);
  if (const json* x = r.Child("dp"); x && !x->is_null()) {
    DpState dp;
    ReadDp(*x, &dp);
    c.dp = dp;
  }
  if (const json* x = r.Child("validation")) ReadValidation(*x, &c.validation);
  r.Read("rounds", &c.rounds);
  r.Read("clients_per_round", &c.clients_per_round);
  r.Read("selection_seed", &c.selection_seed);
  r.Read("metrics_every", &c.metrics_every);
  r.Finish();
  if (c.model.layer_sizes.empty() && c.task.kind == TaskKind::kSynthetic)
    c.model.layer_sizes = {static_cast<int>(c.task.dim), 32, c.task.classes};
  return c;
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromJson(j);
}

json ConfigToJson(const ExperimentConfig& c) {
  json task = {{"kind", c.task.kind == TaskKind::kSynthetic ? "synthetic" : "csv"},
               {"test_per_label", c.task.test_per_label},
               {"test_seed", c.task.test_seed}};
  if (c.task.kind == TaskKind::kSynthetic) {
    task["classes"] = c.task.classes;
    task["dim"] = c.task.dim;
    task["train_samples"] = c.task.train_samples;
    task["separation"] = c.task.separation;
    task["seed"] = c.task.seed;
  } else {
    task["path"] = c.task.csv_path;
    task["feature_columns"] = c.task.schema.feature_columns;
    task["label_column"] = c.task.schema.label_column;
    if (c.task.schema.group_column)
      task["group_column"] = *c.task.schema.group_column;
  }
  std::vector<std::string> transforms;
  for (auto t : c.strategy.pre_transforms) transforms.push_back(ToString(t));
  json j = {
      {"task", task},
      {"partition",
       {{"scheme", ToString(c.partition.scheme)},
        {"alpha", c.partition.alpha},
        {"missing_labels", c.partition.missing_labels},
        {"affected_fraction", c.partition.affected_fraction},
        {"client_count", c.partition.client_count},
        {"seed", c.partition.seed}}},
      {"model",
       {{"layer_sizes", c.model.layer_sizes},
        {"activation", ToString(c.model.activation)},
        {"seed", c.model.seed}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"learning_rate", c.train.learning_rate},
        {"prox_mu", c.train.prox_mu},
        {"seed", c.train.seed}}},
      {"strategy",
       {{"kind", ToString(c.strategy.kind)},
        {"fraction", c.strategy.fraction},
        {"pre_transforms", transforms}}},
      {"score",
       {{"s1_label", c.score.s1_label},
        {"s1_avg", c.score.s1_avg},
        {"s2", c.score.s2},
        {"s2_recall", c.score.s2_recall},
        {"c", c.score.c},
        {"clamp_floor", c.score.clamp_floor},
        {"dimensions",
         {{"labels", c.score_dims.labels},
          {"overall", c.score_dims.overall},
          {"recall", c.score_dims.recall}}}}},
      {"attack",
       {{"kind", ToString(c.attack.kind)},
        {"source_label", c.attack.source_label},
        {"target_label", c.attack.target_label},
        {"scale_factor", c.attack.scale_factor},
        {"ascent_epochs", c.attack.ascent_epochs},
        {"malicious_fraction", c.attack.malicious_fraction},
        {"placement_seed", c.attack.placement_seed}}},
      {"validation",
       {{"per_label", c.validation.per_label},
        {"balanced", c.validation.balanced},
        {"seed", c.validation.seed}}},
      {"rounds", c.rounds},
      {"clients_per_round", c.clients_per_round},
      {"selection_seed", c.selection_seed},
      {"metrics_every", c.metrics_every},
  };
  if (c.dp) {
    j["dp"] = {{"clip_bound", c.dp->clip_bound},
               {"target_quantile", c.dp->target_quantile},
               {"adapt_rate", c.dp->adapt_rate},
               {"noise_multiplier", c.dp->noise_multiplier}};
  }
  return j;
}

std::string CanonicalConfigString(const ExperimentConfig& config) {
  return ConfigToJson(config).dump();
}

std::string ConfigHash(const ExperimentConfig& config) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : CanonicalConfigString(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return Hex64(h);
}

std::string ApplyStrategyOverride(const std::string& spec,
                                  ExperimentConfig* config) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  std::optional<double> value;
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      value = std::stod(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1) throw std::invalid_argument("");
    } catch (...) {
      throw ConfigError("strategy '" + spec + "': bad parameter");
    }
  }
  Strategy& s = config->strategy;
  s.pre_transforms.clear();
  config->train.prox_mu = 0.0;
  if (name == "fedavg" || name == "fedval") {
    s.kind = ParseStrategyKind(name);
    s.fraction = 0.0;
  } else if (name == "multi_krum") {
    s.kind = StrategyKind::kMultiKrum;
    s.fraction = value.value_or(0.5);
  } else if (name == "lfr") {
    s.kind = StrategyKind::kLfr;
    s.fraction = value.value_or(0.4);
  } else if (name == "trimmed_mean") {
    s.kind = StrategyKind::kTrimmedMean;
    s.fraction = value.value_or(0.1);
  } else if (name == "fedprox") {
    s.kind = StrategyKind::kFedAvg;
    s.fraction = 0.0;
    config->train.prox_mu = value.value_or(1.0);
  } else if (name == "norm_bound") {
    s.kind = StrategyKind::kFedAvg;
    s.fraction = 0.0;
    s.pre_transforms = {PreTransform::kNormBound};
    if (!config->dp) config->dp = DpState{};
  } else {
    throw ConfigError("unknown strategy '" + name + "'");
  }
  std::string safe = spec;
  for (char& ch : safe) {
    if (ch == ':') ch = '_';
  }
  return safe;
}

}  // namespace fedval
