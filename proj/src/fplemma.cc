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

#include "dpspace/fplemma.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpspace/mechanisms.h"

namespace dpspace {

std::string_view AccuracyClassName(AccuracyClass c) {
  return c == AccuracyClass::kTwoFifths ? "two_fifths" : "endpoint";
}

namespace {

double Mean(std::span<const uint8_t> x) {
  const auto ones = std::count(x.begin(), x.end(), uint8_t{1});
  return static_cast<double>(ones) / static_cast<double>(x.size());
}

std::string Fmt(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

double ExactMean::Evaluate(std::span<const uint8_t> x, Rng&) const { return Mean(x); }

std::pair<double, double> ExactMean::Range(std::span<const uint8_t> x) const {
  const double m = Mean(x);
  return {m, m};
}

ClippedNoisyMean::ClippedNoisyMean(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("fp.sigma: must be > 0");
}

std::string ClippedNoisyMean::name() const {
  return "clipped_noisy_mean(" + Fmt(sigma_) + ")";
}

double ClippedNoisyMean::Evaluate(std::span<const uint8_t> x, Rng& rng) const {
  const double z = std::clamp(SampleGaussian(sigma_, rng), -kNoiseClip, kNoiseClip);
  return std::clamp(Mean(x) + z, 0.0, 1.0);
}

std::pair<double, double> ClippedNoisyMean::Range(std::span<const uint8_t> x) const {
  const double m = Mean(x);
  return {std::max(0.0, m - kNoiseClip), std::min(1.0, m + kNoiseClip)};
}

double ThresholdMean::Evaluate(std::span<const uint8_t> x, Rng&) const {
  return Mean(x) >= 0.5 ? 1.0 : 0.0;
}

std::pair<double, double> ThresholdMean::Range(std::span<const uint8_t> x) const {
  const double v = Mean(x) >= 0.5 ? 1.0 : 0.0;
  return {v, v};
}

ConstantMean::ConstantMean(double c) : c_(c) {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("fp.c: must lie in [0, 1]");
}

std::string ConstantMean::name() const { return "constant(" + Fmt(c_) + ")"; }

double ConstantMean::Evaluate(std::span<const uint8_t>, Rng&) const { return c_; }

std::pair<double, double> ConstantMean::Range(std::span<const uint8_t>) const {
  return {c_, c_};
}

std::vector<std::shared_ptr<const MeanEstimator>> BuiltinMeanEstimators() {
  return {std::make_shared<ExactMean>(), std::make_shared<ClippedNoisyMean>(0.2),
          std::make_shared<ThresholdMean>(), std::make_shared<ConstantMean>(0.5)};
}

std::shared_ptr<const MeanEstimator> MakeMeanEstimator(std::string_view name,
                                                       double param) {
  if (name == "exact_mean") return std::make_shared<ExactMean>();
  if (name == "clipped_noisy_mean") return std::make_shared<ClippedNoisyMean>(param);
  if (name == "threshold") return std::make_shared<ThresholdMean>();
  if (name == "constant") return std::make_shared<ConstantMean>(param);
  throw std::invalid_argument("fp.estimator: unknown estimator '" + std::string(name) +
                              "'");
}

bool SatisfiesClass(const MeanEstimator& f, uint32_t n, AccuracyClass c) {
  if (n == 0) throw std::invalid_argument("fp.n: must be >= 1");
  std::vector<uint8_t> x(n);
  auto within = [&](std::span<const uint8_t> v) {
    const auto [lo, hi] = f.Range(v);
    const double m = Mean(v);
    return lo >= m - 0.4 - 1e-12 && hi <= m + 0.4 + 1e-12;
  };

  if (c == AccuracyClass::kEndpoint) {
    std::fill(x.begin(), x.end(), uint8_t{0});
    const bool low = f.Range(x).second <= 0.1;
    std::fill(x.begin(), x.end(), uint8_t{1});
    return low && f.Range(x).first >= 0.9;
  }
  if (n <= 16) {
    for (uint32_t mask = 0; mask < (1U << n); ++mask) {
      for (uint32_t i = 0; i < n; ++i) x[i] = (mask >> i) & 1U;
      if (!within(x)) return false;
    }
    return true;
  }
  if (!f.symmetric()) {
    throw std::invalid_argument("fp.n: class check above 16 bits needs a symmetric estimator");
  }
  for (uint32_t ones = 0; ones <= n; ++ones) {
    for (uint32_t i = 0; i < n; ++i) x[i] = i < ones ? 1 : 0;
    if (!within(x)) return false;
  }
  return true;
}

namespace {

struct BlockSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

BlockSums RunBlock(const MeanEstimator& f, uint32_t n, Prior prior, uint64_t seed,
                   uint64_t begin, uint64_t end, std::vector<uint8_t>& x) {
  BlockSums s;
  for (uint64_t t = begin; t < end; ++t) {
    Rng rng(DeriveKey(seed, "fp-trial", t));
    const double p = SamplePrior(prior, n, rng);
    double centered = 0.0;
    for (uint32_t i = 0; i < n; ++i) {
      x[i] = rng.Bernoulli(p) ? 1 : 0;
      centered += x[i] - p;
    }
    const double g = f.Evaluate(x, rng) * centered;
    s.sum += g;
    s.sum_sq += g * g;
  }
  return s;
}

void CheckArgs(uint32_t n, uint64_t trials) {
  if (n < 2) throw std::invalid_argument("fp.n: must be >= 2");
  if (trials < kMinCorrelationTrials) {
    throw std::invalid_argument("fp.trials: must be >= 10000");
  }
}

CorrelationEstimate Combine(std::span<const BlockSums> blocks, uint64_t trials) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const auto& b : blocks) {
    sum += b.sum;
    sum_sq += b.sum_sq;
  }
  const double t = static_cast<double>(trials);
  CorrelationEstimate e;
  e.trials = trials;
  e.estimate = sum / t;
  const double var = std::max(0.0, (sum_sq - t * e.estimate * e.estimate) / (t - 1.0));
  e.stddev = std::sqrt(var);
  e.half_width = 2.576 * e.stddev / std::sqrt(t);
  return e;
}

}  // namespace

CorrelationEstimate McCorrelation(const MeanEstimator& f, uint32_t n,
                                  uint64_t trials, Prior prior, uint64_t seed) {
  CheckArgs(n, trials);
  const auto num_blocks =
      static_cast<int64_t>((trials + kCorrelationBlock - 1) / kCorrelationBlock);
  std::vector<BlockSums> blocks(num_blocks);
#pragma omp parallel
  {
    std::vector<uint8_t> x(n);
#pragma omp for schedule(dynamic, 4)
    for (int64_t b = 0; b < num_blocks; ++b) {
      const uint64_t begin = static_cast<uint64_t>(b) * kCorrelationBlock;
      const uint64_t end = std::min(trials, begin + kCorrelationBlock);
      blocks[b] = RunBlock(f, n, prior, seed, begin, end, x);
    }
  }
  return Combine(blocks, trials);
}

CorrelationEstimate McCorrelationSerial(const MeanEstimator& f, uint32_t n,
                                        uint64_t trials, Prior prior,
                                        uint64_t seed) {
  CheckArgs(n, trials);
  std::vector<BlockSums> blocks;
  std::vector<uint8_t> x(n);
  for (uint64_t begin = 0; begin < trials; begin += kCorrelationBlock) {
    const uint64_t end = std::min(trials, begin + kCorrelationBlock);
    blocks.push_back(RunBlock(f, n, prior, seed, begin, end, x));
  }
  return Combine(blocks, trials);
}

}  // namespace dpspace
