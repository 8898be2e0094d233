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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dpspace/rng.h"

namespace dpspace {
namespace {

TEST(RngTest, MatchesSplitMixReference) {
  // Reference SplitMix64 seeded with 0: state advances by the golden gamma.
  Rng rng(0);
  uint64_t state = 0;
  for (int i = 0; i < 5; ++i) {
    state += kGolden;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    EXPECT_EQ(rng(), z ^ (z >> 31));
  }
  EXPECT_EQ(Rng(0)(), 0xe220a8397b1dcdafULL);
}

TEST(RngTest, Fnv1aKnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(RngTest, CounterStateRoundTrips) {
  Rng a(DeriveKey(42, "test"));
  for (int i = 0; i < 17; ++i) a();
  Rng b(a.key(), a.counter());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(RngTest, LabelsGiveDistinctStreams) {
  std::set<uint64_t> firsts;
  for (const char* label : {"support", "phase", "rounding", "player", "estimator"}) {
    for (uint64_t i = 0; i < 8; ++i) firsts.insert(Rng(DeriveKey(7, label, i))());
  }
  EXPECT_EQ(firsts.size(), 40u);
}

TEST(RngTest, UniformRanges) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.UniformOpen01();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
  }
}

TEST(RngTest, UniformIntIsUnbiased) {
  Rng rng(3);
  constexpr uint64_t kBuckets = 7;
  constexpr int kDraws = 700000;
  std::vector<int> counts(kBuckets, 0);
  for (int i = 0; i < kDraws; ++i) ++counts[rng.UniformInt(kBuckets)];
  const double expected = static_cast<double>(kDraws) / kBuckets;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 6 degrees of freedom; 99.99th percentile is about 27.9.
  EXPECT_LT(chi2, 27.9);
}

TEST(RngTest, BernoulliFrequency) {
  Rng rng(5);
  int ones = 0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) ones += rng.Bernoulli(0.3) ? 1 : 0;
  const double sd = std::sqrt(kDraws * 0.3 * 0.7);
  EXPECT_NEAR(ones, 0.3 * kDraws, 5 * sd);
}

}  // namespace
}  // namespace dpspace
