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

// Monte-Carlo harness for the fingerprinting lemma.
//
// For a mean estimator f on n bits and a prior over p, the harness
// estimates E_p E_{x ~ Ber(p)^n} [ f(x) * sum_i (x_i - p) ]. Accurate
// estimators must show a correlation bounded away from zero: at least 1/10
// under the uniform prior for estimators within 2/5 of the mean, and a
// positive value under the logistic prior for estimators that are only
// right at the all-zeros and all-ones inputs.

#ifndef DPSPACE_FPLEMMA_H_
#define DPSPACE_FPLEMMA_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dpspace/hard_instance.h"
#include "dpspace/rng.h"

namespace dpspace {

enum class AccuracyClass {
  kTwoFifths,  // |f(x) - mean(x)| <= 2/5 everywhere
  kEndpoint,   // f(0^n) <= 0.1 and f(1^n) >= 0.9
};

std::string_view AccuracyClassName(AccuracyClass c);

class MeanEstimator {
 public:
  virtual ~MeanEstimator() = default;
  virtual std::string name() const = 0;
  virtual AccuracyClass declared_class() const = 0;
  // Output in [0, 1]. Randomized estimators draw from `rng`.
  virtual double Evaluate(std::span<const uint8_t> x, Rng& rng) const = 0;
  // Closed interval containing every possible output on x.
  virtual std::pair<double, double> Range(std::span<const uint8_t> x) const = 0;
  // True when the output distribution depends on x only through its
  // popcount, which lets the class check enumerate popcounts for large n.
  virtual bool symmetric() const { return true; }
};

class ExactMean final : public MeanEstimator {
 public:
  std::string name() const override { return "exact_mean"; }
  AccuracyClass declared_class() const override { return AccuracyClass::kTwoFifths; }
  double Evaluate(std::span<const uint8_t> x, Rng& rng) const override;
  std::pair<double, double> Range(std::span<const uint8_t> x) const override;
};

// mean(x) + z with z ~ N(0, sigma^2) clipped to [-0.4, 0.4], then clamped
// to [0, 1].
class ClippedNoisyMean final : public MeanEstimator {
 public:
  static constexpr double kNoiseClip = 0.4;
  explicit ClippedNoisyMean(double sigma);
  std::string name() const override;
  AccuracyClass declared_class() const override { return AccuracyClass::kTwoFifths; }
  double Evaluate(std::span<const uint8_t> x, Rng& rng) const override;
  std::pair<double, double> Range(std::span<const uint8_t> x) const override;

 private:
  double sigma_;
};

// 1 if mean(x) >= 1/2, else 0.
class ThresholdMean final : public MeanEstimator {
 public:
  std::string name() const override { return "threshold"; }
  AccuracyClass declared_class() const override { return AccuracyClass::kEndpoint; }
  double Evaluate(std::span<const uint8_t> x, Rng& rng) const override;
  std::pair<double, double> Range(std::span<const uint8_t> x) const override;
};

// Always c. Declares itself two-fifths accurate, which the class check
// rejects for every n >= 2 and c away from every attainable mean.
class ConstantMean final : public MeanEstimator {
 public:
  explicit ConstantMean(double c);
  std::string name() const override;
  AccuracyClass declared_class() const override { return AccuracyClass::kTwoFifths; }
  double Evaluate(std::span<const uint8_t> x, Rng& rng) const override;
  std::pair<double, double> Range(std::span<const uint8_t> x) const override;

 private:
  double c_;
};

// 1 - f(x). Keeps the symmetry of f; declares the class of f.
class ComplementMean final : public MeanEstimator {
 public:
  explicit ComplementMean(std::shared_ptr<const MeanEstimator> inner)
      : inner_(std::move(inner)) {}
  std::string name() const override { return "complement(" + inner_->name() + ")"; }
  AccuracyClass declared_class() const override { return inner_->declared_class(); }
  double Evaluate(std::span<const uint8_t> x, Rng& rng) const override {
    return 1.0 - inner_->Evaluate(x, rng);
  }
  std::pair<double, double> Range(std::span<const uint8_t> x) const override {
    auto [lo, hi] = inner_->Range(x);
    return {1.0 - hi, 1.0 - lo};
  }
  bool symmetric() const override { return inner_->symmetric(); }

 private:
  std::shared_ptr<const MeanEstimator> inner_;
};

// exact_mean, clipped_noisy_mean(0.2), threshold, constant(0.5).
std::vector<std::shared_ptr<const MeanEstimator>> BuiltinMeanEstimators();

// Accepts "exact_mean", "clipped_noisy_mean" (uses `param` as sigma),
// "threshold", "constant" (uses `param` as c).
std::shared_ptr<const MeanEstimator> MakeMeanEstimator(std::string_view name,
                                                       double param);

// Does f satisfy class c on n bits? Exhaustive over {0,1}^n for n <= 16,
// and over popcounts for larger n (requires f.symmetric()).
bool SatisfiesClass(const MeanEstimator& f, uint32_t n, AccuracyClass c);
inline bool SatisfiesDeclaredClass(const MeanEstimator& f, uint32_t n) {
  return SatisfiesClass(f, n, f.declared_class());
}

struct CorrelationEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 99% normal interval, 2.576 standard errors
  double stddev = 0.0;      // sample standard deviation of one trial
  uint64_t trials = 0;

  double lower() const { return estimate - half_width; }
  double upper() const { return estimate + half_width; }
};

inline constexpr uint64_t kMinCorrelationTrials = 10000;
// Trials per work unit. Trial t always uses its own substream, so the
// result does not depend on the thread count.
inline constexpr uint64_t kCorrelationBlock = 4096;

// Parallel (OpenMP) estimator. Requires n >= 2 and trials >= 10^4.
CorrelationEstimate McCorrelation(const MeanEstimator& f, uint32_t n,
                                  uint64_t trials, Prior prior, uint64_t seed);

// Single-threaded reference; bit-identical to McCorrelation.
CorrelationEstimate McCorrelationSerial(const MeanEstimator& f, uint32_t n,
                                        uint64_t trials, Prior prior,
                                        uint64_t seed);

}  // namespace dpspace

#endif  // DPSPACE_FPLEMMA_H_
