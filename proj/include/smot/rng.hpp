/* Copyright 2026 The SMOT Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>

namespace smot {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stateless generator: draw k of stream s under seed is a pure function of
// (seed, s, k), so results never depend on call order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(seed ^ splitmix64(stream + 0x5F3759DFull))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ + splitmix64(counter));
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform01(counter);
  }

 private:
  std::uint64_t key_;
};

}  // namespace smot
