// Copyright 2026 The dpspace Authors
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

// Portable counter-based random number generation.
//
// Every random draw in the library comes from a `Rng`. The generator is a
// pure function of (key, counter):
//
//   output(key, c) = Mix64(key + (c + 1) * kGolden)
//
// where Mix64 is the SplitMix64 finalizer (constants 0xbf58476d1ce4e5b9 and
// 0x94d049bb133111eb, shifts 30/27/31) and kGolden = 0x9e3779b97f4a7c15.
// Because the state is two integers, a generator can be serialized into an
// estimator snapshot and restored bit-exactly, and substreams for parallel
// work are obtained by deriving new keys rather than by splitting state.
//
// Keys are derived from an experiment seed with a labeled hash:
//
//   DeriveKey(seed, label, index) =
//       Mix64(Mix64(seed ^ Fnv1a64(label)) + (index + 1) * kGolden)
//
// Adding a new label never perturbs draws made under existing labels.

#ifndef DPSPACE_RNG_H_
#define DPSPACE_RNG_H_

#include <cstdint>
#include <limits>
#include <string_view>

namespace dpspace {

inline constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, 64-bit.
constexpr uint64_t Fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t DeriveKey(uint64_t seed, std::string_view label,
                             uint64_t index = 0) {
  return Mix64(Mix64(seed ^ Fnv1a64(label)) + (index + 1) * kGolden);
}

class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t key, uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return Mix64(key_ + (++counter_) * kGolden); }

  // 53-bit uniform on [0, 1).
  double Uniform01() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // 53-bit uniform on the open interval (0, 1).
  double UniformOpen01() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n > 0. Lemire's multiply-shift with rejection.
  uint64_t UniformInt(uint64_t n);

  bool Bernoulli(double p) { return Uniform01() < p; }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  uint64_t key_;
  uint64_t counter_;
};

}  // namespace dpspace

#endif  // DPSPACE_RNG_H_
