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

#ifndef FEDVAL_COMMON_H_
#define FEDVAL_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedval {

// Flat model parameter vector. Updates, deltas and aggregates all use it.
using ParamVector = std::vector<double>;

// Raised for invalid configuration or inputs that make an operation
// undefined (bad layer sizes, infeasible partitions, unknown labels, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a client has no local data to train on.
class EmptyClientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One client's round output.
struct ClientUpdate {
  int client_id = 0;
  ParamVector delta;
  std::size_t sample_count = 0;
};

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a seed from a base seed and a sequence of stream tags, e.g.
// DeriveSeed(train_seed, {round, client}).
inline uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> tags) {
  uint64_t s = MixSeed(base);
  for (uint64_t t : tags) s = MixSeed(s ^ MixSeed(t + 0x632be59bd9b4e019ULL));
  return s;
}

double L2Norm(std::span<const double> v);
double SquaredDistance(std::span<const double> a, std::span<const double> b);

// out += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> out);

ParamVector Add(std::span<const double> a, std::span<const double> b);
ParamVector Subtract(std::span<const double> a, std::span<const double> b);

bool AllFinite(std::span<const double> v);

}  // namespace fedval

#endif  // FEDVAL_COMMON_H_
