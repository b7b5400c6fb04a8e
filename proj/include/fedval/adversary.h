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

#ifndef FEDVAL_ADVERSARY_H_
#define FEDVAL_ADVERSARY_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedval/common.h"
#include "fedval/data.h"
#include "fedval/model.h"

namespace fedval {

enum class AttackKind { kNone, kLabelFlip, kPga };

std::string ToString(AttackKind kind);
AttackKind ParseAttackKind(const std::string& name);

struct AttackSpec {
  AttackKind kind = AttackKind::kNone;
  int source_label = 0;
  int target_label = 1;
  double scale_factor = 1.0;
  int ascent_epochs = 1;
  double malicious_fraction = 0.0;
  uint64_t placement_seed = 0;

  void Validate(int class_count) const;
};

// Relabels every `source_label` sample as `target_label`.
Dataset PoisonDataset(const Dataset& data, int source_label, int target_label);

struct PgaResult {
  ParamVector params;
  double benign_norm = 0.0;
  double ascent_norm = 0.0;
  bool degenerate = false;  // zero ascent direction; params == global
};

// Gradient-ascent model poisoning. The ascent delta is rescaled so that its
// norm is scale_factor times the norm of the attacker's own benign update
// (obtained by ordinary local training from the same global model).
PgaResult PgaUpdate(std::span<const double> global, const MlpSpec& spec,
                    const Dataset& data, const TrainSpec& train,
                    double scale_factor, int ascent_epochs);

// floor(fraction * client_count) distinct ids, ascending.
std::vector<int> PlaceMalicious(int client_count, double fraction,
                                uint64_t seed);

}  // namespace fedval

#endif  // FEDVAL_ADVERSARY_H_
