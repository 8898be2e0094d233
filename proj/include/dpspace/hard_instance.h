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

// Hard-instance construction for CountDistinct.
//
// A heavy set C of k users and P disjoint light sets S_1..S_P of 3h users
// are drawn from [N]. Phase i consists of w repetitions over the active set
// S_i u C (n = 3h + k users, processed in increasing id order):
//
//   1. draw a prior p from the configured distribution, then one
//      Bernoulli(p) bit per active user;
//   2. insertion pass: (u, +1) for bit 1, an empty update for bit 0;
//   3. query the estimator, truncate to [0, n], normalize by n;
//   4. revoke pass, same order: (u, -1) for bit 1, an empty update for 0.
//
// Each repetition is therefore exactly 2n updates and the whole stream has
// length T = 2 P w (3h + k). Phases are numbered from 0.

#ifndef DPSPACE_HARD_INSTANCE_H_
#define DPSPACE_HARD_INSTANCE_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dpspace/algorithms.h"
#include "dpspace/core_model.h"
#include "dpspace/rng.h"

namespace dpspace {

enum class Prior { kUniform, kLogistic };

std::string_view PriorName(Prior prior);
Prior ParsePrior(std::string_view name);

struct InstanceParams {
  uint32_t w = 0;  // repetitions per phase
  uint32_t k = 0;  // |C|
  uint32_t h = 0;  // accuracy scale; |S_i| = 3h
  uint32_t P = 0;  // phases
  uint32_t N = 0;  // universe size
  uint64_t T = 0;  // stream length, 2 P w (3h + k)
  Prior prior = Prior::kUniform;

  uint32_t group_size() const { return 3 * h + k; }
  friend bool operator==(const InstanceParams&, const InstanceParams&) = default;
};

// Validates sqrt(w) <= k <= h, P >= 10 h^2 / w and N >= k + 3hP, and fills
// in T. N = 0 selects the minimal universe k + 3hP. Throws
// std::invalid_argument naming the violated constraint.
InstanceParams DeriveParams(uint32_t w, uint32_t k, uint32_t h, uint32_t P,
                            Prior prior, uint32_t N = 0);

struct InstanceSupport {
  std::vector<UserId> heavy;               // C, sorted
  std::vector<std::vector<UserId>> light;  // S_1..S_P, each sorted

  // Sorted S_phase u C.
  std::vector<UserId> ActiveSet(uint32_t phase) const;
  friend bool operator==(const InstanceSupport&, const InstanceSupport&) = default;
};

// Uniform sampling without replacement of k + 3hP distinct ids from [N]
// under the "support" substream of `seed`.
InstanceSupport SampleSupport(const InstanceParams& params, uint64_t seed);

struct PhaseTranscript {
  uint32_t phase = 0;
  std::vector<UserId> users;        // sorted active set, n entries
  std::vector<double> priors;       // p(i, j), w entries
  std::vector<uint8_t> bits;        // b(u, i, j), row-major w x n
  std::vector<double> raw;          // r(i, j) in [0, n]
  std::vector<double> normalized;   // a(i, j) = r / n
  uint64_t stream_begin = 0;        // [begin, end) within the instance stream
  uint64_t stream_end = 0;

  size_t repetitions() const { return priors.size(); }
  uint8_t bit(size_t rep, size_t user_index) const {
    return bits[rep * users.size() + user_index];
  }
  friend bool operator==(const PhaseTranscript&, const PhaseTranscript&) = default;
};

// t uniform on [-ln(5n), ln(5n)], p = e^t / (1 + e^t). Requires n >= 2.
double SampleLogisticPrior(uint32_t n, Rng& rng);
double SamplePrior(Prior prior, uint32_t n, Rng& rng);

// Random substream of phase `phase` (priors and bits).
inline Rng PhaseRng(uint64_t seed, uint32_t phase) {
  return Rng(DeriveKey(seed, "phase", phase));
}

// Runs one phase over an explicit active set; the set is canonically sorted
// first, so only its contents matter. Appends the phase's updates to `sink`
// when given.
PhaseTranscript RunPhase(Estimator& estimator, std::span<const UserId> active,
                         const InstanceParams& params, uint32_t phase, Rng& rng,
                         Stream* sink = nullptr);

PhaseTranscript RunPhase(Estimator& estimator, const InstanceSupport& support,
                         const InstanceParams& params, uint32_t phase, Rng& rng,
                         Stream* sink = nullptr);

struct InstanceRun {
  InstanceSupport support;
  std::vector<PhaseTranscript> phases;
};

// Samples the support from `seed` and runs all P phases on one estimator.
InstanceRun RunInstance(Estimator& estimator, const InstanceParams& params,
                        uint64_t seed, Stream* sink = nullptr);

}  // namespace dpspace

#endif  // DPSPACE_HARD_INSTANCE_H_
