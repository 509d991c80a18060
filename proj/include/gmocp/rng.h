// Copyright 2026 The GMOCP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GMOCP_RNG_H_
#define GMOCP_RNG_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>

namespace gmocp {

// Named random streams. Each (seed, stream, t, sub) tuple addresses an
// independent sequence, so any step of a run can be replayed in isolation.
enum class StreamId : std::uint64_t {
  kScoreU = 1,
  kGraph = 2,
  kNode = 3,
  kModel = 4,
  kVote = 5,
  kLabel = 6,
  kNoise = 7,
  kRunSeed = 8,
  kOracle = 9,
};

inline std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based generator: a keyed splitmix64 over an incrementing counter.
class Rng {
 public:
  Rng(std::uint64_t seed, StreamId stream, std::uint64_t t,
      std::uint64_t sub = 0)
      : key_(Mix64(Mix64(Mix64(Mix64(seed) ^ static_cast<std::uint64_t>(stream)) ^
                         t) ^
                   sub)) {}

  std::uint64_t NextU64() { return Mix64(key_ ^ Mix64(++counter_)); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; both uniforms are consumed per call.
  double Normal() {
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Draws an index from a non-negative weight vector (need not be
  // normalized). Zero-mass entries are never returned.
  std::size_t Categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = Uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      acc += weights[i];
      if (target < acc) return i;
    }
    return last_positive;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace gmocp

#endif  // GMOCP_RNG_H_
