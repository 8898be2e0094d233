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

// Fingerprinting-based rounding of phase transcripts into subsets.
//
// For phase i and active user u the score is
//   s(u, i) = sum_j a(i, j) * (b(u, i, j) - p(i, j)),
// clipped to [-R, R] with R = sqrt(w ln(2 / beta)). The user joins Y_i
// independently with probability (R + s) / (2R). Each phase draws its
// inclusion coins from its own substream, so the parallel and serial
// drivers produce identical reports.

#ifndef DPSPACE_ATTACK_H_
#define DPSPACE_ATTACK_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dpspace/core_model.h"
#include "dpspace/hard_instance.h"
#include "dpspace/rng.h"

namespace dpspace {

struct AttackConfig {
  double beta = 0.0;
  double radius = 0.0;  // R

  void Validate() const;
};

// beta = 1 / T^2.
AttackConfig DefaultAttackConfig(uint32_t w, uint64_t T);
AttackConfig AttackConfigForBeta(uint32_t w, double beta);

// Scores aligned with tr.users.
std::vector<double> PhaseScores(const PhaseTranscript& tr);

double InclusionProbability(double score, const AttackConfig& cfg);

std::vector<UserId> RoundToSubset(std::span<const UserId> users,
                                  std::span<const double> scores,
                                  const AttackConfig& cfg, Rng& rng);

// xi(u) = sum over all phases and repetitions of a (b - p). Throws
// std::invalid_argument if u is not active in every phase (not heavy).
double HeavyTotalScore(std::span<const PhaseTranscript> transcripts, UserId user);

inline Rng RoundingRng(uint64_t seed, uint32_t phase) {
  return Rng(DeriveKey(seed, "rounding", phase));
}

struct PhaseRounding {
  std::vector<double> scores;    // aligned with the transcript's users
  std::vector<uint8_t> clipped;  // |s| > R
  std::vector<UserId> subset;    // Y_i, sorted
  double total_score = 0.0;      // sum_u s(u, i), unclipped
};

PhaseRounding RoundPhase(const PhaseTranscript& tr, const AttackConfig& cfg,
                         Rng& rng);

// 1/(2 sqrt(P)) + sqrt(ln(20 P k) / (2P)).
double FlaggingEps2(uint32_t P, uint32_t k);

struct AttackReport {
  AttackConfig config;
  std::vector<PhaseRounding> phases;
  std::map<UserId, uint32_t> appearances;  // all users; heavy ones even at 0
  std::map<UserId, double> heavy_totals;   // xi(u) for u in C
  double measured_eps1 = 0.0;              // mean |Y_i| / n - 1/2
  double flag_eps2 = 0.0;
  std::vector<UserId> flagged;  // heavy users with > (1/2 + flag_eps2) P
};

// Phases are rounded in parallel (OpenMP).
AttackReport RunRoundingAttack(std::span<const PhaseTranscript> transcripts,
                               std::span<const UserId> heavy,
                               const AttackConfig& cfg, uint64_t seed);

// Single-threaded reference with the same output.
AttackReport RunRoundingAttackSerial(std::span<const PhaseTranscript> transcripts,
                                     std::span<const UserId> heavy,
                                     const AttackConfig& cfg, uint64_t seed);

}  // namespace dpspace

#endif  // DPSPACE_ATTACK_H_
