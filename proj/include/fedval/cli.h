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

#ifndef FEDVAL_CLI_H_
#define FEDVAL_CLI_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "fedval/metrics.h"
#include "fedval/orchestrator.h"

namespace fedval {

inline constexpr const char* kToolVersion = "0.1.0";

// Column names of metrics.csv for K labels and the given recall groups.
std::vector<std::string> MetricsCsvColumns(int class_count,
                                           std::span<const int> groups);

// Values of one record in MetricsCsvColumns order; absent values are "".
std::vector<std::string> MetricsCsvRow(const MetricRecord& record,
                                       int class_count,
                                       std::span<const int> groups);

void WriteMetricsCsv(std::ostream& out, std::span<const MetricRecord> records,
                     int class_count, std::span<const int> groups);

nlohmann::json RoundLogToJson(const RoundLog& log);

struct RunManifest {
  std::string config_hash;
  std::string metrics_path;
  std::string rounds_path;
  std::string model_path;
  std::string tool_version = kToolVersion;
  double wall_clock_seconds = 0.0;

  nlohmann::json ToJson() const;
};

// Runs one experiment and writes metrics.csv, rounds.jsonl,
// final_model.json and manifest.json into out_dir.
RunManifest RunToDirectory(const ExperimentConfig& config,
                           const std::string& out_dir, int workers);

RunManifest CmdRun(const std::string& config_path, const std::string& out_dir,
                   int workers);

// Runs every strategy override under the base config's seeds, one
// sub-directory each, plus combined.csv in long format
// (strategy,round,metric,value).
std::vector<RunManifest> CmdCompare(const std::string& config_path,
                                    const std::vector<std::string>& strategies,
                                    const std::string& out_dir, int workers);

// Prints the per-round and at-least-once probabilities for each rounds
// value.
void CmdProb(std::ostream& out, int n, double p, int k0,
             std::span<const long long> rounds);

// Formats a double with 17 significant digits.
std::string FormatDouble(double v);

}  // namespace fedval

#endif  // FEDVAL_CLI_H_
