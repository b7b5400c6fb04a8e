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

#include "fedval/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fedval {
namespace {

constexpr double kProbFloor = 1e-12;

// Offsets of each layer's weight block and bias block inside ParamVector.
struct LayerOffsets {
  std::size_t weights;
  std::size_t biases;
  int in;
  int out;
};

std::vector<LayerOffsets> Layout(const MlpSpec& spec) {
  std::vector<LayerOffsets> layers;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    LayerOffsets lo{offset, offset + static_cast<std::size_t>(in) * out, in,
                    out};
    layers.push_back(lo);
    offset = lo.biases + out;
  }
  return layers;
}

double Activate(Activation a, double z) {
  return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the activation output.
double ActivateGrad(Activation a, double out) {
  return a == Activation::kRelu ? (out > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

// Forward pass keeping every layer's output. acts[0] is the input, the last
// entry holds raw logits.
class ForwardCache {
 public:
  ForwardCache(const MlpSpec& spec) : spec_(spec), layers_(Layout(spec)) {
    acts_.resize(spec.layer_sizes.size());
    for (std::size_t l = 0; l < acts_.size(); ++l)
      acts_[l].resize(spec.layer_sizes[l]);
    deltas_ = acts_;
  }

  void Run(std::span<const double> params, std::span<const double> x) {
    std::copy(x.begin(), x.end(), acts_[0].begin());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& lo = layers_[l];
      const double* w = params.data() + lo.weights;
      const double* b = params.data() + lo.biases;
      const auto& in = acts_[l];
      auto& out = acts_[l + 1];
      const bool last = l + 1 == layers_.size();
      for (int o = 0; o < lo.out; ++o) {
        double z = b[o];
        const double* wrow = w + static_cast<std::size_t>(o) * lo.in;
        for (int i = 0; i < lo.in; ++i) z += wrow[i] * in[i];
        out[o] = last ? z : Activate(spec_.activation, z);
      }
    }
  }

  const std::vector<double>& logits() const { return acts_.back(); }

  // Accumulates scale * d(loss)/d(params) into grad, given d(loss)/d(logits).
  void Backward(std::span<const double> params, std::span<const double> dlogits,
                double scale, std::span<double> grad) {
    std::copy(dlogits.begin(), dlogits.end(), deltas_.back().begin());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& lo = layers_[l];
      const auto& in = acts_[l];
      const auto& dout = deltas_[l + 1];
      double* gw = grad.data() + lo.weights;
      double* gb = grad.data() + lo.biases;
      for (int o = 0; o < lo.out; ++o) {
        const double d = scale * dout[o];
        if (d == 0.0) continue;
        double* grow = gw + static_cast<std::size_t>(o) * lo.in;
        for (int i = 0; i < lo.in; ++i) grow[i] += d * in[i];
        gb[o] += d;
      }
      if (l == 0) break;
      const double* w = params.data() + lo.weights;
      auto& din = deltas_[l];
      std::fill(din.begin(), din.end(), 0.0);
      for (int o = 0; o < lo.out; ++o) {
        const double d = dout[o];
        if (d == 0.0) continue;
        const double* wrow = w + static_cast<std::size_t>(o) * lo.in;
        for (int i = 0; i < lo.in; ++i) din[i] += d * wrow[i];
      }
      for (int i = 0; i < lo.in; ++i)
        din[i] *= ActivateGrad(spec_.activation, in[i]);
    }
  }

 private:
  const MlpSpec& spec_;
  std::vector<LayerOffsets> layers_;
  std::vector<std::vector<double>> acts_;
  std::vector<std::vector<double>> deltas_;
};

// Stable softmax into probs; returns log-sum-exp of the logits.
double Softmax(std::span<const double> logits, std::span<double> probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    probs[k] = std::exp(logits[k] - mx);
    sum += probs[k];
  }
  for (auto& p : probs) p /= sum;
  return mx + std::log(sum);
}

double SampleLoss(double lse, double logit_y) {
  return std::min(lse - logit_y, -std::log(kProbFloor));
}

void CheckInputs(std::span<const double> params, const MlpSpec& spec,
                 const Dataset& data) {
  if (params.size() != spec.ParamCount())
    throw ConfigError("parameter vector length does not match the model");
  if (data.dim != static_cast<std::size_t>(spec.input_dim()))
    throw ConfigError("feature dimension does not match the model input");
}

enum class Direction { kDescend, kAscend };

ParamVector RunSgd(std::span<const double> global, const MlpSpec& spec,
                   const Dataset& data, const TrainSpec& train, int epochs,
                   Direction direction, std::vector<double>* epoch_losses) {
  if (data.empty()) throw EmptyClientError("client dataset is empty");
  CheckInputs(global, spec, data);
  ParamVector params(global.begin(), global.end());
  const double prox = direction == Direction::kDescend ? train.prox_mu : 0.0;
  const double sign = direction == Direction::kDescend ? -1.0 : 1.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(train.seed);
  const std::size_t batch = static_cast<std::size_t>(train.batch_size);
  if (epoch_losses) epoch_losses->push_back(MeanLoss(params, spec, data));
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const LossGrad lg = LossAndGrad(params, spec, data, idx, global, prox);
      Axpy(sign * train.learning_rate, lg.grad, params);
    }
    if (epoch_losses) epoch_losses->push_back(MeanLoss(params, spec, data));
  }
  return params;
}

}  // namespace

std::string ToString(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

Activation ParseActivation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

void MlpSpec::Validate() const {
  if (layer_sizes.size() < 2)
    throw ConfigError("layer_sizes needs at least an input and output size");
  for (int s : layer_sizes) {
    if (s < 1) throw ConfigError("layer_sizes entries must be >= 1");
  }
}

std::size_t MlpSpec::ParamCount() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] +
         layer_sizes[l + 1];
  return n;
}

void TrainSpec::Validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(prox_mu >= 0.0)) throw ConfigError("prox_mu must be >= 0");
}

ParamVector InitParams(const MlpSpec& spec) {
  spec.Validate();
  ParamVector params(spec.ParamCount());
  std::mt19937_64 rng(spec.seed);
  for (const auto& lo : Layout(spec)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(lo.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = lo.weights; i < lo.biases + lo.out; ++i)
      params[i] = dist(rng);
  }
  return params;
}

std::vector<double> Forward(std::span<const double> params,
                            const MlpSpec& spec, std::span<const double> x) {
  if (params.size() != spec.ParamCount())
    throw ConfigError("parameter vector length does not match the model");
  if (x.size() != static_cast<std::size_t>(spec.input_dim()))
    throw ConfigError("feature vector length does not match the model input");
  ForwardCache cache(spec);
  cache.Run(params, x);
  std::vector<double> probs(spec.class_count());
  Softmax(cache.logits(), probs);
  return probs;
}

LossGrad LossAndGrad(std::span<const double> params, const MlpSpec& spec,
                     const Dataset& data, std::span<const std::size_t> batch,
                     std::span<const double> global, double prox_mu) {
  CheckInputs(params, spec, data);
  if (batch.empty()) throw ConfigError("loss requested on an empty batch");
  const int k = spec.class_count();
  LossGrad out;
  out.grad.assign(params.size(), 0.0);
  ForwardCache cache(spec);
  std::vector<double> probs(k);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    const int y = data.labels[i];
    if (y < 0 || y >= k) throw ConfigError("label out of range");
    cache.Run(params, data.row(i));
    const double lse = Softmax(cache.logits(), probs);
    out.loss += SampleLoss(lse, cache.logits()[y]);
    probs[y] -= 1.0;
    cache.Backward(params, probs, scale, out.grad);
  }
  out.loss *= scale;
  if (prox_mu > 0.0) {
    if (global.size() != params.size())
      throw ConfigError("global parameter vector length mismatch");
    double sq = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
      const double d = params[j] - global[j];
      sq += d * d;
      out.grad[j] += prox_mu * d;
    }
    out.loss += 0.5 * prox_mu * sq;
  }
  return out;
}

LossGrad LossAndGrad(std::span<const double> params, const MlpSpec& spec,
                     const Dataset& data, std::span<const double> global,
                     double prox_mu) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return LossAndGrad(params, spec, data, all, global, prox_mu);
}

ParamVector LocalTrain(std::span<const double> global, const MlpSpec& spec,
                       const Dataset& data, const TrainSpec& train) {
  train.Validate();
  return RunSgd(global, spec, data, train, train.epochs, Direction::kDescend,
                nullptr);
}

ParamVector GradientAscent(std::span<const double> global, const MlpSpec& spec,
                           const Dataset& data, const TrainSpec& train,
                           int epochs, std::vector<double>* epoch_losses) {
  train.Validate();
  return RunSgd(global, spec, data, train, epochs, Direction::kAscend,
                epoch_losses);
}

Evaluation EvalLosses(std::span<const double> params, const MlpSpec& spec,
                      const Dataset& data) {
  CheckInputs(params, spec, data);
  const int k = spec.class_count();
  Evaluation ev;
  ev.losses.resize(data.size());
  ev.predictions.resize(data.size());
  ForwardCache cache(spec);
  std::vector<double> probs(k);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.labels[i];
    if (y < 0 || y >= k) throw ConfigError("label out of range");
    cache.Run(params, data.row(i));
    const auto& logits = cache.logits();
    const double lse = Softmax(logits, probs);
    ev.losses[i] = SampleLoss(lse, logits[y]);
    ev.predictions[i] = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  return ev;
}

double MeanLoss(std::span<const double> params, const MlpSpec& spec,
                const Dataset& data) {
  if (data.empty()) throw ConfigError("loss requested on an empty dataset");
  const Evaluation ev = EvalLosses(params, spec, data);
  return std::accumulate(ev.losses.begin(), ev.losses.end(), 0.0) /
         static_cast<double>(ev.losses.size());
}

}  // namespace fedval
