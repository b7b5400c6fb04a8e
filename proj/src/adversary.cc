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

#include "fedval/adversary.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fedval {

std::string ToString(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kLabelFlip:
      return "label_flip";
    case AttackKind::kPga:
      return "pga";
  }
  return "none";
}

AttackKind ParseAttackKind(const std::string& name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "label_flip") return AttackKind::kLabelFlip;
  if (name == "pga") return AttackKind::kPga;
  throw ConfigError("unknown attack kind '" + name + "'");
}

void AttackSpec::Validate(int class_count) const {
  if (!(malicious_fraction >= 0.0 && malicious_fraction <= 1.0))
    throw ConfigError("malicious_fraction must be in [0, 1]");
  if (kind == AttackKind::kLabelFlip) {
    if (source_label == target_label)
      throw ConfigError("label_flip source and target labels must differ");
    if (source_label < 0 || source_label >= class_count || target_label < 0 ||
        target_label >= class_count)
      throw ConfigError("label_flip labels must be in [0, K)");
  }
  if (kind == AttackKind::kPga) {
    if (!(scale_factor >= 0.0)) throw ConfigError("scale_factor must be >= 0");
    if (ascent_epochs < 1) throw ConfigError("ascent_epochs must be >= 1");
  }
}

Dataset PoisonDataset(const Dataset& data, int source_label, int target_label) {
  Dataset out = data;
  for (int& y : out.labels) {
    if (y == source_label) y = target_label;
  }
  return out;
}

PgaResult PgaUpdate(std::span<const double> global, const MlpSpec& spec,
                    const Dataset& data, const TrainSpec& train,
                    double scale_factor, int ascent_epochs) {
  if (data.empty()) throw EmptyClientError("client dataset is empty");
  PgaResult result;
  const ParamVector benign = LocalTrain(global, spec, data, train);
  result.benign_norm = L2Norm(Subtract(benign, global));
  TrainSpec ascent = train;
  ascent.seed = DeriveSeed(train.seed, {0xa5cefULL});
  const ParamVector malicious =
      GradientAscent(global, spec, data, ascent, ascent_epochs);
  const ParamVector delta = Subtract(malicious, global);
  result.ascent_norm = L2Norm(delta);
  result.params.assign(global.begin(), global.end());
  if (!(result.ascent_norm > 0.0)) {
    result.degenerate = true;
    return result;
  }
  Axpy(scale_factor * result.benign_norm / result.ascent_norm, delta,
       result.params);
  return result;
}

std::vector<int> PlaceMalicious(int client_count, double fraction,
                                uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ConfigError("malicious fraction must be in [0, 1]");
  const auto count =
      static_cast<std::size_t>(std::floor(fraction * client_count + 1e-9));
  std::vector<int> ids(client_count);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace fedval
