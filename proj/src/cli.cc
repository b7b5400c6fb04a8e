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

#include "fedval/cli.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "fedval/config.h"

namespace fedval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::vector<int> RecallGroups(const Experiment& experiment) {
  std::vector<int> groups;
  for (int g = 0; g < experiment.data().test.group_count; ++g)
    groups.push_back(g);
  return groups;
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> MetricsCsvColumns(int class_count,
                                           std::span<const int> groups) {
  std::vector<std::string> cols = {"round", "overall_accuracy"};
  for (int k = 0; k < class_count; ++k)
    cols.push_back("per_label_accuracy_" + std::to_string(k));
  cols.push_back("label_accuracy_mad");
  for (int g : groups) cols.push_back("per_group_recall_" + std::to_string(g));
  cols.push_back("backdoor_accuracy");
  cols.push_back("mean_validation_loss");
  return cols;
}

std::vector<std::string> MetricsCsvRow(const MetricRecord& r, int class_count,
                                       std::span<const int> groups) {
  std::vector<std::string> row = {std::to_string(r.round),
                                  FormatDouble(r.overall_accuracy)};
  for (int k = 0; k < class_count; ++k)
    row.push_back(FormatDouble(r.per_label_accuracy.at(k)));
  row.push_back(FormatDouble(r.label_accuracy_mad));
  for (int g : groups) {
    const auto it = r.per_group_recall.find(g);
    row.push_back(it == r.per_group_recall.end() ? "" : FormatDouble(it->second));
  }
  row.push_back(r.backdoor_accuracy ? FormatDouble(*r.backdoor_accuracy) : "");
  row.push_back(FormatDouble(r.mean_validation_loss));
  return row;
}

void WriteMetricsCsv(std::ostream& out, std::span<const MetricRecord> records,
                     int class_count, std::span<const int> groups) {
  auto write = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i)
      out << (i ? "," : "") << fields[i];
    out << '\n';
  };
  write(MetricsCsvColumns(class_count, groups));
  for (const auto& r : records) write(MetricsCsvRow(r, class_count, groups));
}

json RoundLogToJson(const RoundLog& log) {
  json j = {{"round", log.round},
            {"selected", log.selected},
            {"malicious_selected", log.malicious_selected},
            {"malicious_count", log.malicious_selected.size()},
            {"weights", log.weights},
            {"zero_update", log.zero_update},
            {"excluded", log.excluded},
            {"events", log.events}};
  if (!log.raw_scores.empty()) {
    j["raw_scores"] = log.raw_scores;
    j["clamped_scores"] = log.clamped_scores;
  }
  if (log.s2) {
    j["s2"] = *log.s2;
    j["s2_candidates"] = log.s2_candidates;
    j["s2_candidate_losses"] = log.s2_candidate_losses;
  }
  if (log.clip_bound) j["clip_bound"] = *log.clip_bound;
  if (log.metrics) {
    const auto& m = *log.metrics;
    j["metrics"] = {{"overall_accuracy", m.overall_accuracy},
                    {"per_label_accuracy", m.per_label_accuracy},
                    {"label_accuracy_mad", m.label_accuracy_mad},
                    {"mean_validation_loss", m.mean_validation_loss}};
    if (m.backdoor_accuracy)
      j["metrics"]["backdoor_accuracy"] = *m.backdoor_accuracy;
  }
  return j;
}

json RunManifest::ToJson() const {
  return {{"config_hash", config_hash},
          {"artifacts",
           {{"metrics", metrics_path},
            {"rounds", rounds_path},
            {"final_model", model_path}}},
          {"tool_version", tool_version},
          {"wall_clock_seconds", wall_clock_seconds}};
}

RunManifest RunToDirectory(const ExperimentConfig& config,
                           const std::string& out_dir, int workers) {
  const auto start = std::chrono::steady_clock::now();
  Experiment experiment(config, workers);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  RunManifest manifest;
  manifest.config_hash = ConfigHash(config);
  manifest.metrics_path = (dir / "metrics.csv").string();
  manifest.rounds_path = (dir / "rounds.jsonl").string();
  manifest.model_path = (dir / "final_model.json").string();

  std::ofstream rounds = OpenOut(manifest.rounds_path);
  std::vector<MetricRecord> records;
  for (int t = 0; t < config.rounds; ++t) {
    const RoundLog log = experiment.RunRound();
    rounds << RoundLogToJson(log).dump() << '\n';
    if (log.metrics) records.push_back(*log.metrics);
  }
  const auto groups = RecallGroups(experiment);
  std::ofstream metrics = OpenOut(manifest.metrics_path);
  WriteMetricsCsv(metrics, records, config.model.class_count(), groups);
  std::ofstream model = OpenOut(manifest.model_path);
  model << json{{"layer_sizes", config.model.layer_sizes},
                {"activation", ToString(config.model.activation)},
                {"params", experiment.state().global}}
               .dump()
        << '\n';
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ofstream man = OpenOut(dir / "manifest.json");
  man << manifest.ToJson().dump(2) << '\n';
  return manifest;
}

RunManifest CmdRun(const std::string& config_path, const std::string& out_dir,
                   int workers) {
  return RunToDirectory(LoadConfigFile(config_path), out_dir, workers);
}

std::vector<RunManifest> CmdCompare(const std::string& config_path,
                                    const std::vector<std::string>& strategies,
                                    const std::string& out_dir, int workers) {
  if (strategies.empty())
    throw ConfigError("compare needs at least one strategy");
  const ExperimentConfig base = LoadConfigFile(config_path);
  std::vector<std::pair<std::string, ExperimentConfig>> variants;
  std::set<std::string> names;
  for (const auto& s : strategies) {
    ExperimentConfig c = base;
    std::string name = ApplyStrategyOverride(s, &c);
    if (!names.insert(name).second)
      throw ConfigError("strategy '" + s + "' listed twice");
    c.Validate();
    variants.emplace_back(std::move(name), std::move(c));
  }
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::vector<RunManifest> manifests;
  std::ofstream combined = OpenOut(dir / "combined.csv");
  combined << "strategy,round,metric,value\n";
  for (const auto& [name, config] : variants) {
    manifests.push_back(RunToDirectory(config, (dir / name).string(), workers));
    std::ifstream in(manifests.back().metrics_path);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) header.push_back(f);
    }
    while (std::getline(in, line)) {
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string f;
      while (std::getline(ss, f, ',')) fields.push_back(f);
      fields.resize(header.size());
      for (std::size_t i = 1; i < header.size(); ++i) {
        if (fields[i].empty()) continue;
        combined << name << ',' << fields[0] << ',' << header[i] << ','
                 << fields[i] << '\n';
      }
    }
  }
  return manifests;
}

void CmdProb(std::ostream& out, int n, double p, int k0,
             std::span<const long long> rounds) {
  out << "n=" << n << " p=" << FormatDouble(p) << " k0=" << k0 << '\n';
  out << "rounds,per_round_p,at_least_once_p\n";
  for (long long r : rounds) {
    const TailProbability t = MaliciousRoundProbability(n, p, k0, r);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%lld,%.10g,%.10g\n", r, t.per_round,
                  t.at_least_once);
    out << buf;
  }
}

}  // namespace fedval
