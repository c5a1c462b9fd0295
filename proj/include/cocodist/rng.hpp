// Copyright (c) 2026, the cocodist authors. All rights reserved.
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

#ifndef COCODIST_RNG_HPP_
#define COCODIST_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace cocodist {

// One SplitMix64 step: advance the state by the golden gamma and mix.
// Constants are the published reference values, so streams can be
// reproduced bit-for-bit in any language.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-image, per-cell seed: one SplitMix64 step applied to
// global_seed XOR image_id XOR (kind_index << 32) XOR (level << 40).
// Independent of scheduling order by construction.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::int64_t image_id,
                                 int kind_index, int level) {
  std::uint64_t s = global_seed ^ static_cast<std::uint64_t>(image_id) ^
                    (static_cast<std::uint64_t>(kind_index) << 32) ^
                    (static_cast<std::uint64_t>(level) << 40);
  return splitmix64_next(s);
}

// Deterministic random stream used by every generator. Draw order is part
// of each generator's contract; all derived draws are documented below so
// the streams can be replayed elsewhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64_next(state_); }

  // Uniform in [0,1): top 53 bits as the mantissa.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0,n): modulo reduction. The bias is below 2^-53 for every
  // n used here and accepted for the sake of a trivially portable rule.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  // Uniform integer in [lo, hi], inclusive.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Standard normal via Box-Muller; pairs are generated together and the
  // second value is served on the following call.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cocodist

#endif  // COCODIST_RNG_HPP_
