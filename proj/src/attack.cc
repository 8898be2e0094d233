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

#include "dpspace/attack.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpspace {

void AttackConfig::Validate() const {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("attack.beta: must lie in (0, 1)");
  }
  if (!(radius > 0.0)) throw std::invalid_argument("attack.radius: must be > 0");
}

AttackConfig AttackConfigForBeta(uint32_t w, double beta) {
  AttackConfig cfg{beta, std::sqrt(static_cast<double>(w) * std::log(2.0 / beta))};
  cfg.Validate();
  return cfg;
}

AttackConfig DefaultAttackConfig(uint32_t w, uint64_t T) {
  const double t = static_cast<double>(T);
  return AttackConfigForBeta(w, 1.0 / (t * t));
}

std::vector<double> PhaseScores(const PhaseTranscript& tr) {
  const size_t n = tr.users.size();
  std::vector<double> scores(n, 0.0);
  for (size_t j = 0; j < tr.repetitions(); ++j) {
    const double a = tr.normalized[j];
    const double p = tr.priors[j];
    for (size_t x = 0; x < n; ++x) scores[x] += a * (tr.bit(j, x) - p);
  }
  return scores;
}

double InclusionProbability(double score, const AttackConfig& cfg) {
  const double s = std::clamp(score, -cfg.radius, cfg.radius);
  return (cfg.radius + s) / (2.0 * cfg.radius);
}

std::vector<UserId> RoundToSubset(std::span<const UserId> users,
                                  std::span<const double> scores,
                                  const AttackConfig& cfg, Rng& rng) {
  if (users.size() != scores.size()) {
    throw std::invalid_argument("round_to_subset: users and scores differ in length");
  }
  std::vector<UserId> subset;
  for (size_t x = 0; x < users.size(); ++x) {
    if (rng.Uniform01() < InclusionProbability(scores[x], cfg)) {
      subset.push_back(users[x]);
    }
  }
  std::sort(subset.begin(), subset.end());
  return subset;
}

double HeavyTotalScore(std::span<const PhaseTranscript> transcripts, UserId user) {
  if (transcripts.empty()) throw std::invalid_argument("heavy_total_score: no phases");
  double xi = 0.0;
  for (const auto& tr : transcripts) {
    auto it = std::lower_bound(tr.users.begin(), tr.users.end(), user);
    if (it == tr.users.end() || *it != user) {
      throw std::invalid_argument("heavy_total_score: user " + std::to_string(user) +
                                  " is not heavy");
    }
    const size_t x = static_cast<size_t>(it - tr.users.begin());
    for (size_t j = 0; j < tr.repetitions(); ++j) {
      xi += tr.normalized[j] * (tr.bit(j, x) - tr.priors[j]);
    }
  }
  return xi;
}

PhaseRounding RoundPhase(const PhaseTranscript& tr, const AttackConfig& cfg,
                         Rng& rng) {
  PhaseRounding out;
  out.scores = PhaseScores(tr);
  out.clipped.resize(out.scores.size());
  for (size_t x = 0; x < out.scores.size(); ++x) {
    out.clipped[x] = std::fabs(out.scores[x]) > cfg.radius ? 1 : 0;
    out.total_score += out.scores[x];
  }
  out.subset = RoundToSubset(tr.users, out.scores, cfg, rng);
  return out;
}

double FlaggingEps2(uint32_t P, uint32_t k) {
  const double p = P;
  return 1.0 / (2.0 * std::sqrt(p)) + std::sqrt(std::log(20.0 * p * k) / (2.0 * p));
}

namespace {

void Aggregate(std::span<const PhaseTranscript> transcripts,
               std::span<const UserId> heavy, AttackReport& report) {
  double size_fraction = 0.0;
  for (size_t i = 0; i < transcripts.size(); ++i) {
    for (UserId u : report.phases[i].subset) ++report.appearances[u];
    size_fraction += static_cast<double>(report.phases[i].subset.size()) /
                     static_cast<double>(transcripts[i].users.size());
  }
  const auto P = static_cast<uint32_t>(transcripts.size());
  report.measured_eps1 = P == 0 ? 0.0 : size_fraction / P - 0.5;
  report.flag_eps2 = FlaggingEps2(P, static_cast<uint32_t>(heavy.size()));
  for (UserId u : heavy) {
    report.appearances.try_emplace(u, 0);
    report.heavy_totals[u] = HeavyTotalScore(transcripts, u);
    if (report.appearances[u] > (0.5 + report.flag_eps2) * P) {
      report.flagged.push_back(u);
    }
  }
}

}  // namespace

AttackReport RunRoundingAttack(std::span<const PhaseTranscript> transcripts,
                               std::span<const UserId> heavy,
                               const AttackConfig& cfg, uint64_t seed) {
  cfg.Validate();
  AttackReport report;
  report.config = cfg;
  report.phases.resize(transcripts.size());
  const auto count = static_cast<int64_t>(transcripts.size());
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < count; ++i) {
    Rng rng = RoundingRng(seed, transcripts[i].phase);
    report.phases[i] = RoundPhase(transcripts[i], cfg, rng);
  }
  Aggregate(transcripts, heavy, report);
  return report;
}

AttackReport RunRoundingAttackSerial(std::span<const PhaseTranscript> transcripts,
                                     std::span<const UserId> heavy,
                                     const AttackConfig& cfg, uint64_t seed) {
  cfg.Validate();
  AttackReport report;
  report.config = cfg;
  for (const auto& tr : transcripts) {
    Rng rng = RoundingRng(seed, tr.phase);
    report.phases.push_back(RoundPhase(tr, cfg, rng));
  }
  Aggregate(transcripts, heavy, report);
  return report;
}

}  // namespace dpspace
