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

#ifndef FEDVAL_CONFIG_H_
#define FEDVAL_CONFIG_H_

#include <string>

#include "json.hpp"
#include "fedval/orchestrator.h"

namespace fedval {

// Parses an experiment config. Missing keys take their defaults; unknown
// keys and wrongly typed values raise ConfigError naming the field path.
ExperimentConfig ConfigFromJson(const nlohmann::json& j);
ExperimentConfig LoadConfigFile(const std::string& path);

// Full (all defaults spelled out) canonical form.
nlohmann::json ConfigToJson(const ExperimentConfig& config);
std::string CanonicalConfigString(const ExperimentConfig& config);

// FNV-1a 64 of the canonical string, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& config);

// Applies a strategy override of the form name[:value]:
//   fedavg, fedval, multi_krum[:remove_fraction=0.5], lfr[:remove=0.4],
//   trimmed_mean[:trim=0.1], fedprox[:mu=1] (fedavg with proximal term),
//   norm_bound (fedavg with adaptive norm bounding).
// Returns a filesystem-safe name for the variant.
std::string ApplyStrategyOverride(const std::string& spec,
                                  ExperimentConfig* config);

}  // namespace fedval

#endif  // FEDVAL_CONFIG_H_
