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

#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "dpspace/algorithms.h"
#include "dpspace/attack.h"
#include "dpspace/hard_instance.h"
#include "test_util.h"

namespace dpspace {
namespace {

using testing::SmallParams;

PhaseTranscript OneTerm(double a, uint8_t b, double p) {
  PhaseTranscript tr;
  tr.users = {5};
  tr.priors = {p};
  tr.bits = {b};
  tr.raw = {a};
  tr.normalized = {a};
  return tr;
}

TEST(PhaseScoresTest, Arithmetic) {
  EXPECT_NEAR(PhaseScores(OneTerm(1.0, 1, 0.3))[0], 0.7, 1e-15);
  EXPECT_NEAR(PhaseScores(OneTerm(0.5, 0, 0.3))[0], -0.15, 1e-15);
  EXPECT_EQ(PhaseScores(OneTerm(0.0, 1, 0.3))[0], 0.0);
  EXPECT_EQ(HeavyTotalScore(std::vector{OneTerm(0.0, 1, 0.9)}, 5), 0.0);
}

TEST(AttackConfigTest, DefaultRadius) {
  const InstanceParams p = SmallParams();
  const AttackConfig cfg = DefaultAttackConfig(p.w, p.T);
  EXPECT_DOUBLE_EQ(cfg.beta, 1.0 / (double(p.T) * double(p.T)));
  EXPECT_NEAR(cfg.radius, std::sqrt(64.0 * std::log(2.0 * double(p.T) * double(p.T))), 1e-9);
  EXPECT_THROW(AttackConfigForBeta(64, 1.5), std::invalid_argument);
  EXPECT_THROW(AttackConfigForBeta(64, 0.0), std::invalid_argument);
}

TEST(InclusionTest, Endpoints) {
  const AttackConfig cfg = AttackConfigForBeta(64, 1e-6);
  const double r = cfg.radius;
  EXPECT_EQ(InclusionProbability(0.0, cfg), 0.5);
  EXPECT_EQ(InclusionProbability(r, cfg), 1.0);
  EXPECT_EQ(InclusionProbability(3 * r, cfg), 1.0);
  EXPECT_EQ(InclusionProbability(-r, cfg), 0.0);
  EXPECT_EQ(InclusionProbability(-9 * r, cfg), 0.0);
  EXPECT_LT(InclusionProbability(0.1, cfg), InclusionProbability(0.2, cfg));
}

TEST(RoundToSubsetTest, BinomialBands) {
  const AttackConfig cfg = AttackConfigForBeta(16, 0.01);
  const double r = cfg.radius;
  const std::vector<UserId> users = {1, 2, 3, 4, 5, 6};
  const std::vector<double> scores = {-2 * r, -r / 2, 0.0, r / 3, 0.9 * r, 5 * r};
  std::vector<int> hits(users.size(), 0);
  constexpr int kTrials = 10000;
  Rng rng(DeriveKey(3, "round-test"));
  for (int t = 0; t < kTrials; ++t) {
    const auto subset = RoundToSubset(users, scores, cfg, rng);
    ASSERT_TRUE(std::is_sorted(subset.begin(), subset.end()));
    for (UserId u : subset) ++hits[u - 1];
  }
  for (size_t x = 0; x < users.size(); ++x) {
    const double q = InclusionProbability(scores[x], cfg);
    const double sd = std::sqrt(q * (1 - q) / kTrials);
    EXPECT_NEAR(hits[x] / double(kTrials), q, 3 * sd + 1e-12) << "user " << users[x];
  }
}

TEST(HeavyTotalTest, AdditivityAndErrors) {
  const InstanceParams p = SmallParams();
  ExactCounter exact;
  const InstanceRun run = RunInstance(exact, p, 12);
  for (UserId u : run.support.heavy) {
    double sum = 0;
    for (const PhaseTranscript& tr : run.phases) {
      const auto scores = PhaseScores(tr);
      const auto it = std::lower_bound(tr.users.begin(), tr.users.end(), u);
      sum += scores[static_cast<size_t>(it - tr.users.begin())];
    }
    EXPECT_NEAR(HeavyTotalScore(run.phases, u), sum, 1e-9);
  }
  EXPECT_THROW(HeavyTotalScore(run.phases, run.support.light[0][0]), std::invalid_argument);
}

TEST(AttackTest, ExactCounterScoreMean) {
  const InstanceParams p = SmallParams();
  ExactCounter exact;
  const InstanceRun run = RunInstance(exact, p, 21);
  const uint32_t n = p.group_size();
  std::vector<double> phase_means;
  double total = 0;
  for (const PhaseTranscript& tr : run.phases) {
    const auto s = PhaseScores(tr);
    const double sum = std::accumulate(s.begin(), s.end(), 0.0);
    total += sum;
    phase_means.push_back(sum / n);
  }
  const double mean = std::accumulate(phase_means.begin(), phase_means.end(), 0.0) / p.P;
  double var = 0;
  for (double m : phase_means) var += (m - mean) * (m - mean);
  const double se = std::sqrt(var / (p.P - 1) / p.P);
  EXPECT_NEAR(mean, p.w / (6.0 * n), 3 * se);
  // Mean per-phase total lies in [w/20, w/3].
  EXPECT_GE(total / p.P, p.w / 20.0);
  EXPECT_LE(total / p.P, p.w / 3.0);
}

TEST(AttackTest, SubsetSizesFollowInclusionProbabilities) {
  const InstanceParams p = SmallParams();
  ExactCounter exact;
  const InstanceRun run = RunInstance(exact, p, 5);
  const AttackConfig cfg = DefaultAttackConfig(p.w, p.T);
  const AttackReport report = RunRoundingAttack(run.phases, run.support.heavy, cfg, 5);
  double expected = 0;
  double variance = 0;
  double observed = 0;
  for (const PhaseRounding& ph : report.phases) {
    for (double s : ph.scores) {
      const double q = InclusionProbability(s, cfg);
      expected += q;
      variance += q * (1 - q);
    }
    observed += static_cast<double>(ph.subset.size());
  }
  EXPECT_NEAR(observed, expected, 3 * std::sqrt(variance));
  EXPECT_NEAR(report.measured_eps1, observed / (p.P * double(p.group_size())) - 0.5, 1e-12);
}

TEST(AttackTest, ParallelMatchesSerial) {
  // More threads than cores still exercises the work split.
  omp_set_num_threads(4);
  const InstanceParams p = SmallParams();
  EstimatorContext ctx;
  ctx.seed = 4;
  ctx.stream_length = p.T;
  ctx.w = p.w;
  auto capped = MakeEstimator({"capped_dp", {}}, ctx);
  const InstanceRun run = RunInstance(*capped, p, 4);
  const AttackConfig cfg = DefaultAttackConfig(p.w, p.T);
  const AttackReport a = RunRoundingAttack(run.phases, run.support.heavy, cfg, 4);
  const AttackReport b = RunRoundingAttackSerial(run.phases, run.support.heavy, cfg, 4);
  ASSERT_EQ(a.phases.size(), b.phases.size());
  for (size_t i = 0; i < a.phases.size(); ++i) {
    EXPECT_EQ(a.phases[i].scores, b.phases[i].scores);
    EXPECT_EQ(a.phases[i].clipped, b.phases[i].clipped);
    EXPECT_EQ(a.phases[i].subset, b.phases[i].subset);
  }
  EXPECT_EQ(a.appearances, b.appearances);
  EXPECT_EQ(a.heavy_totals, b.heavy_totals);
  EXPECT_EQ(a.flagged, b.flagged);
  EXPECT_EQ(a.measured_eps1, b.measured_eps1);
}

TEST(AttackTest, CappedHeavyTotalsWithinSubgaussianThreshold) {
  const InstanceParams p = SmallParams();
  const double threshold =
      std::sqrt(double(p.P) * p.w * std::log(2.0 * double(p.T) * double(p.T)));
  EXPECT_NEAR(threshold, 331.0, 1.0);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    EstimatorContext ctx;
    ctx.seed = seed;
    ctx.stream_length = p.T;
    ctx.w = p.w;
    auto capped = MakeEstimator({"capped_dp", {}}, ctx);
    const InstanceRun run = RunInstance(*capped, p, seed);
    for (UserId u : run.support.heavy) {
      ASSERT_LE(std::fabs(HeavyTotalScore(run.phases, u)), threshold) << "seed " << seed;
    }
  }
}

TEST(AttackTest, BitIndependentAnswersGiveFairCoins) {
  const InstanceParams p = SmallParams();
  const AttackConfig cfg = DefaultAttackConfig(p.w, p.T);
  std::vector<double> counts;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    ConstantEstimator constant(Problem::kCountDistinct, p.group_size() / 2.0);
    const InstanceRun run = RunInstance(constant, p, seed);
    const AttackReport r = RunRoundingAttack(run.phases, run.support.heavy, cfg, seed);
    for (UserId u : run.support.heavy) {
      const double c = r.appearances.at(u);
      EXPECT_NEAR(c, p.P / 2.0, 4 * std::sqrt(p.P / 4.0));
      counts.push_back(c);
    }
  }
  const double m = counts.size();
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / m;
  double var = 0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= m - 1;
  EXPECT_NEAR(mean, p.P / 2.0, 3 * std::sqrt(p.P / 4.0 / m));
  EXPECT_NEAR(var, p.P / 4.0, 0.35 * p.P / 4.0);
}

TEST(AttackTest, FlaggingThreshold) {
  EXPECT_NEAR(FlaggingEps2(64, 8),
              1.0 / 16 + std::sqrt(std::log(20.0 * 64 * 8) / 128.0), 1e-12);
  EXPECT_LT(FlaggingEps2(512, 8), FlaggingEps2(64, 8));
}

}  // namespace
}  // namespace dpspace
