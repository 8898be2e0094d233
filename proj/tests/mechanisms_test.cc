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

#include <cmath>
#include <vector>

#include "dpspace/mechanisms.h"
#include "dpspace/rng.h"

namespace dpspace {
namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename F>
Moments Sample(F draw, int n) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    sum_sq += x * x;
  }
  Moments m;
  m.mean = sum / n;
  m.var = sum_sq / n - m.mean * m.mean;
  return m;
}

TEST(NoiseTest, LaplaceIsReproducible) {
  Rng a(DeriveKey(11, "noise"));
  Rng b(DeriveKey(11, "noise"));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(SampleLaplace(1.0, a), SampleLaplace(1.0, b));
}

TEST(NoiseTest, LaplaceMoments) {
  Rng rng(DeriveKey(1, "laplace"));
  const Moments m = Sample([&] { return SampleLaplace(1.0, rng); }, 1000000);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
  EXPECT_GE(m.var, 1.96);
  EXPECT_LE(m.var, 2.04);
}

TEST(NoiseTest, GaussianIsReproducible) {
  Rng a(DeriveKey(12, "noise"));
  Rng b(DeriveKey(12, "noise"));
  for (int i = 0; i < 10; ++i) EXPECT_EQ(SampleGaussian(1.0, a), SampleGaussian(1.0, b));
}

TEST(NoiseTest, GaussianMoments) {
  Rng rng(DeriveKey(2, "gaussian"));
  const Moments m = Sample([&] { return SampleGaussian(1.0, rng); }, 1000000);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
  EXPECT_GE(m.var, 0.99);
  EXPECT_LE(m.var, 1.01);
}

TEST(NoiseTest, RejectsNonPositiveScale) {
  Rng rng(0);
  EXPECT_THROW(SampleLaplace(0.0, rng), std::invalid_argument);
  EXPECT_THROW(SampleGaussian(0.0, rng), std::invalid_argument);
  EXPECT_THROW(SampleGaussian(-1.0, rng), std::invalid_argument);
  EXPECT_THROW(NoiseSpec::Laplace(0.0).Validate(), std::invalid_argument);
  EXPECT_EQ(NoiseSpec::None().Sample(rng), 0.0);
}

TEST(TreeCounterTest, NoiselessIsExact) {
  TreeCounter c(8, NoiseSpec::None(), Rng(0));
  EXPECT_EQ(c.Add(1), 1.0);
  EXPECT_EQ(c.Add(1), 2.0);
  EXPECT_EQ(c.Add(-1), 1.0);
}

TEST(TreeCounterTest, NoiselessMatchesPrefixSumsOnRandomDeltas) {
  Rng rng(77);
  TreeCounter c(1000, NoiseSpec::None(), Rng(1));
  int64_t prefix = 0;
  for (int t = 0; t < 1000; ++t) {
    const int64_t d = static_cast<int64_t>(rng.UniformInt(11)) - 5;
    prefix += d;
    ASSERT_EQ(c.Add(d), static_cast<double>(prefix));
  }
}

TEST(TreeCounterTest, NodeCountIsPopcount) {
  TreeCounter c(1 << 10, NoiseSpec::Laplace(1.0), Rng(5));
  EXPECT_EQ(c.depth(), 10u);
  for (uint64_t t = 1; t <= 1024; ++t) {
    c.Add(1);
    ASSERT_EQ(c.last_node_count(), static_cast<uint32_t>(std::popcount(t)));
    ASSERT_LE(c.last_node_count(), c.depth() + 1);
  }
}

TEST(TreeCounterTest, ErrorVarianceMatchesNodeCount) {
  // At t = 7 three nodes of Laplace(1) noise are summed: variance 3 * 2.
  double sum_sq = 0.0;
  constexpr int kRuns = 40000;
  for (int r = 0; r < kRuns; ++r) {
    TreeCounter c(8, NoiseSpec::Laplace(1.0), Rng(DeriveKey(3, "tree", r)));
    double last = 0.0;
    for (int t = 0; t < 7; ++t) last = c.Add(1);
    sum_sq += (last - 7.0) * (last - 7.0);
  }
  EXPECT_NEAR(sum_sq / kRuns, 6.0, 0.25);
}

TEST(TreeCounterTest, HorizonExhausted) {
  TreeCounter c(8, NoiseSpec::None(), Rng(0));
  for (int i = 0; i < 8; ++i) c.Add(1);
  EXPECT_THROW(c.Add(1), std::out_of_range);
}

TEST(L2DiffTest, Basics) {
  const std::vector<double> a = {1, 2, 3, 4};
  EXPECT_EQ(AnswerVectorL2Diff(a, a), 0.0);
  const std::vector<double> b = {2, 3, 4, 4};
  EXPECT_DOUBLE_EQ(AnswerVectorL2Diff(a, b), std::sqrt(3.0));
  const std::vector<double> c = {1, 2};
  EXPECT_THROW(AnswerVectorL2Diff(a, c), std::invalid_argument);
}

}  // namespace
}  // namespace dpspace
