// Copyright 2026 The Amortex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMORTEX_RANDOM_H_
#define AMORTEX_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace amortex {

// Seed derivation: every component receives its own stream via
//   DeriveSeed(parent, "component-name")
// which hashes the name with FNV-1a and mixes it into the parent seed with
// splitmix64. Streams keyed by integers (epoch, node id) use the integer
// overload. The scheme is stable across platforms and releases.
uint64_t DeriveSeed(uint64_t parent, std::string_view name);
uint64_t DeriveSeed(uint64_t parent, uint64_t key);

// Thin wrapper over mt19937_64. All distributions are implemented here on
// top of raw 64-bit draws so that results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Fair coin.
  bool Coin() { return (engine_() >> 63) != 0; }

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();

  // Standard normal via Box-Muller.
  double Normal();

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace amortex

#endif  // AMORTEX_RANDOM_H_
