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

#include "dpspace/mechanisms.h"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace dpspace {

double SampleLaplace(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw std::invalid_argument("laplace scale must be > 0");
  const double u = rng.UniformOpen01() - 0.5;
  const double mag = -scale * std::log(1.0 - 2.0 * std::fabs(u));
  return u < 0.0 ? -mag : mag;
}

double SampleGaussian(double sigma, Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
  double u = 0.0, s = 0.0;
  do {
    u = 2.0 * rng.Uniform01() - 1.0;
    const double v = 2.0 * rng.Uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return sigma * u * std::sqrt(-2.0 * std::log(s) / s);
}

double NoiseSpec::Sample(Rng& rng) const {
  switch (kind) {
    case Kind::kNone:
      return 0.0;
    case Kind::kLaplace:
      return SampleLaplace(scale, rng);
    case Kind::kGaussian:
      return SampleGaussian(scale, rng);
  }
  return 0.0;
}

void NoiseSpec::Validate() const {
  if (kind != Kind::kNone && !(scale > 0.0)) {
    throw std::invalid_argument("noise scale must be > 0");
  }
}

TreeCounter::TreeCounter(uint64_t horizon, NoiseSpec noise, Rng rng)
    : horizon_(horizon),
      depth_(horizon <= 1 ? 0 : static_cast<uint32_t>(std::bit_width(horizon - 1))),
      noise_(noise),
      rng_(rng),
      partial_(depth_ + 1, 0),
      node_noise_(depth_ + 1, 0.0) {
  if (horizon == 0) throw std::invalid_argument("tree counter horizon must be > 0");
  noise_.Validate();
}

double TreeCounter::Add(int64_t delta) {
  if (steps_ >= horizon_) throw std::out_of_range("tree counter horizon exhausted");
  const uint64_t t = ++steps_;
  const auto level = static_cast<uint32_t>(std::countr_zero(t));
  int64_t node = delta;
  for (uint32_t j = 0; j < level; ++j) {
    node += partial_[j];
    partial_[j] = 0;
    node_noise_[j] = 0.0;
  }
  partial_[level] = node;
  node_noise_[level] = noise_.Sample(rng_);
  exact_ += delta;

  double answer = 0.0;
  last_nodes_ = 0;
  for (uint32_t j = 0; j <= depth_; ++j) {
    if ((t >> j) & 1U) {
      answer += static_cast<double>(partial_[j]) + node_noise_[j];
      ++last_nodes_;
    }
  }
  return answer;
}

double AnswerVectorL2Diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("answer vectors differ in length");
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace dpspace
