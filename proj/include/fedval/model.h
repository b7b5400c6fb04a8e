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

#ifndef FEDVAL_MODEL_H_
#define FEDVAL_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedval/common.h"
#include "fedval/data.h"

namespace fedval {

enum class Activation { kRelu, kTanh };

std::string ToString(Activation activation);
Activation ParseActivation(const std::string& name);

// Fully connected softmax classifier. layer_sizes = {input, hidden..., K}.
// Parameters are laid out layer by layer, each layer as its row-major
// (out x in) weight matrix followed by its bias vector.
struct MlpSpec {
  std::vector<int> layer_sizes;
  Activation activation = Activation::kRelu;
  uint64_t seed = 0;

  void Validate() const;
  std::size_t ParamCount() const;
  int input_dim() const { return layer_sizes.front(); }
  int class_count() const { return layer_sizes.back(); }
};

struct TrainSpec {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 0.005;
  double prox_mu = 0.0;  // FedProx proximal weight; 0 means plain SGD
  uint64_t seed = 0;

  void Validate() const;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
ParamVector InitParams(const MlpSpec& spec);

// Softmax class probabilities for one sample.
std::vector<double> Forward(std::span<const double> params,
                            const MlpSpec& spec, std::span<const double> x);

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Mean cross-entropy over `batch` rows of `data` plus
// (prox_mu / 2) * ||params - global||^2, with its analytic gradient.
LossGrad LossAndGrad(std::span<const double> params, const MlpSpec& spec,
                     const Dataset& data, std::span<const std::size_t> batch,
                     std::span<const double> global, double prox_mu);

// Same over every row of `data`.
LossGrad LossAndGrad(std::span<const double> params, const MlpSpec& spec,
                     const Dataset& data, std::span<const double> global,
                     double prox_mu);

// Mini-batch SGD from `global` for train.epochs epochs. Deterministic in
// train.seed. Throws EmptyClientError on an empty dataset.
ParamVector LocalTrain(std::span<const double> global, const MlpSpec& spec,
                       const Dataset& data, const TrainSpec& train);

// Mini-batch gradient ascent on the cross-entropy (no proximal term) for
// `epochs` epochs. When `epoch_losses` is set it receives the full-data mean
// loss before the first epoch and after each epoch.
ParamVector GradientAscent(std::span<const double> global, const MlpSpec& spec,
                           const Dataset& data, const TrainSpec& train,
                           int epochs,
                           std::vector<double>* epoch_losses = nullptr);

struct Evaluation {
  std::vector<double> losses;  // per-sample cross-entropy
  std::vector<int> predictions;
};

Evaluation EvalLosses(std::span<const double> params, const MlpSpec& spec,
                      const Dataset& data);

double MeanLoss(std::span<const double> params, const MlpSpec& spec,
                const Dataset& data);

// Upper bound of the per-sample loss: -log(1e-12).
inline constexpr double kMaxSampleLoss = 27.631021115928547;

}  // namespace fedval

#endif  // FEDVAL_MODEL_H_
