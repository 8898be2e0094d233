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

// Noise primitives and the binary-tree continual counter.
//
// Laplace variates use the inverse CDF of a single open-interval uniform;
// Gaussian variates use the Marsaglia polar method and discard the second
// variate of each accepted pair, so a draw always consumes whole
// rejection rounds and never leaves cached state behind.

#ifndef DPSPACE_MECHANISMS_H_
#define DPSPACE_MECHANISMS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dpspace/rng.h"

namespace dpspace {

// Laplace(0, scale). Throws std::invalid_argument unless scale > 0.
double SampleLaplace(double scale, Rng& rng);

// N(0, sigma^2). Throws std::invalid_argument unless sigma > 0.
double SampleGaussian(double sigma, Rng& rng);

struct NoiseSpec {
  enum class Kind { kNone, kLaplace, kGaussian };
  Kind kind = Kind::kNone;
  double scale = 0.0;  // Laplace b or Gaussian sigma, in count units

  static NoiseSpec None() { return {}; }
  static NoiseSpec Laplace(double b) { return {Kind::kLaplace, b}; }
  static NoiseSpec Gaussian(double sigma) { return {Kind::kGaussian, sigma}; }

  // kNone draws nothing and returns 0.
  double Sample(Rng& rng) const;
  void Validate() const;
};

// Binary (dyadic) tree mechanism for continual counting. After the t-th
// increment the answer is the exact prefix sum plus the noise of the
// popcount(t) <= depth + 1 dyadic nodes covering [1, t].
class TreeCounter {
 public:
  TreeCounter(uint64_t horizon, NoiseSpec noise, Rng rng);

  // Feeds one increment and returns the noisy prefix sum. Throws
  // std::out_of_range once `horizon` increments have been consumed.
  double Add(int64_t delta);

  uint64_t horizon() const { return horizon_; }
  // ceil(log2(horizon)).
  uint32_t depth() const { return depth_; }
  uint64_t steps() const { return steps_; }
  int64_t exact_prefix_sum() const { return exact_; }
  // Number of noisy nodes summed into the most recent answer.
  uint32_t last_node_count() const { return last_nodes_; }

 private:
  uint64_t horizon_;
  uint32_t depth_;
  NoiseSpec noise_;
  Rng rng_;
  uint64_t steps_ = 0;
  int64_t exact_ = 0;
  uint32_t last_nodes_ = 0;
  std::vector<int64_t> partial_;  // exact dyadic partial sums per level
  std::vector<double> node_noise_;
};

// Euclidean distance between two answer vectors of equal length.
double AnswerVectorL2Diff(std::span<const double> a, std::span<const double> b);

}  // namespace dpspace

#endif  // DPSPACE_MECHANISMS_H_
