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

#include "dpspace/hard_instance.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dpspace {

std::string_view PriorName(Prior prior) {
  return prior == Prior::kUniform ? "uniform" : "logistic";
}

Prior ParsePrior(std::string_view name) {
  if (name == "uniform") return Prior::kUniform;
  if (name == "logistic") return Prior::kLogistic;
  throw std::invalid_argument("instance.prior: unknown value '" + std::string(name) + "'");
}

InstanceParams DeriveParams(uint32_t w, uint32_t k, uint32_t h, uint32_t P,
                            Prior prior, uint32_t N) {
  if (w == 0 || k == 0 || h == 0 || P == 0) {
    throw std::invalid_argument("instance.w: w, k, h, P must all be >= 1");
  }
  const uint64_t w64 = w, k64 = k, h64 = h, p64 = P;
  if (k64 * k64 < w64) throw std::invalid_argument("instance.k: k < sqrt(w)");
  if (k > h) throw std::invalid_argument("instance.k: k > h");
  if (p64 * w64 < 10 * h64 * h64) {
    throw std::invalid_argument("instance.P: P < 10 h^2 / w");
  }
  const uint64_t min_n = k64 + 3 * h64 * p64;
  if (min_n > 0xffffffffULL) throw std::invalid_argument("instance.N: universe too large");
  if (N == 0) N = static_cast<uint32_t>(min_n);
  if (N < min_n) throw std::invalid_argument("instance.N: N < k + 3hP");
  InstanceParams p;
  p.w = w;
  p.k = k;
  p.h = h;
  p.P = P;
  p.N = N;
  p.T = 2 * p64 * w64 * (3 * h64 + k64);
  p.prior = prior;
  return p;
}

std::vector<UserId> InstanceSupport::ActiveSet(uint32_t phase) const {
  const auto& s = light.at(phase);
  std::vector<UserId> out;
  out.reserve(s.size() + heavy.size());
  std::merge(s.begin(), s.end(), heavy.begin(), heavy.end(), std::back_inserter(out));
  return out;
}

InstanceSupport SampleSupport(const InstanceParams& params, uint64_t seed) {
  Rng rng(DeriveKey(seed, "support"));
  const uint64_t needed = params.k + 3ULL * params.h * params.P;
  std::vector<UserId> ids(params.N);
  std::iota(ids.begin(), ids.end(), 0U);
  // Partial Fisher-Yates: the first `needed` slots are a uniform sample.
  for (uint64_t i = 0; i < needed; ++i) {
    const uint64_t j = i + rng.UniformInt(params.N - i);
    std::swap(ids[i], ids[j]);
  }
  InstanceSupport support;
  support.heavy.assign(ids.begin(), ids.begin() + params.k);
  std::sort(support.heavy.begin(), support.heavy.end());
  support.light.resize(params.P);
  auto it = ids.begin() + params.k;
  for (auto& s : support.light) {
    s.assign(it, it + 3 * params.h);
    std::sort(s.begin(), s.end());
    it += 3 * params.h;
  }
  return support;
}

double SampleLogisticPrior(uint32_t n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("logistic prior needs n >= 2");
  const double half_width = std::log(5.0 * n);
  const double t = -half_width + 2.0 * half_width * rng.Uniform01();
  return 1.0 / (1.0 + std::exp(-t));
}

double SamplePrior(Prior prior, uint32_t n, Rng& rng) {
  return prior == Prior::kUniform ? rng.Uniform01() : SampleLogisticPrior(n, rng);
}

PhaseTranscript RunPhase(Estimator& estimator, std::span<const UserId> active,
                         const InstanceParams& params, uint32_t phase, Rng& rng,
                         Stream* sink) {
  PhaseTranscript tr;
  tr.phase = phase;
  tr.users.assign(active.begin(), active.end());
  std::sort(tr.users.begin(), tr.users.end());
  const size_t n = tr.users.size();
  const double range = static_cast<double>(params.group_size());
  tr.priors.resize(params.w);
  tr.bits.resize(static_cast<size_t>(params.w) * n);
  tr.raw.resize(params.w);
  tr.normalized.resize(params.w);
  tr.stream_begin = 2ULL * params.w * n * phase;
  tr.stream_end = tr.stream_begin + 2ULL * params.w * n;

  auto emit = [&](const StreamUpdate& u) {
    estimator.Process(u);
    if (sink != nullptr) sink->updates.push_back(u);
  };

  for (uint32_t j = 0; j < params.w; ++j) {
    const double p = SamplePrior(params.prior, params.group_size(), rng);
    tr.priors[j] = p;
    uint8_t* row = &tr.bits[static_cast<size_t>(j) * n];
    for (size_t x = 0; x < n; ++x) row[x] = rng.Bernoulli(p) ? 1 : 0;

    for (size_t x = 0; x < n; ++x) {
      emit(row[x] ? StreamUpdate{SignedUpdate{tr.users[x], +1}}
                  : StreamUpdate{EmptyUpdate{}});
    }
    const double answer = estimator.Query();
    const double r = std::isnan(answer) ? 0.0 : std::clamp(answer, 0.0, range);
    tr.raw[j] = r;
    tr.normalized[j] = r / range;
    for (size_t x = 0; x < n; ++x) {
      emit(row[x] ? StreamUpdate{SignedUpdate{tr.users[x], -1}}
                  : StreamUpdate{EmptyUpdate{}});
    }
  }
  return tr;
}

PhaseTranscript RunPhase(Estimator& estimator, const InstanceSupport& support,
                         const InstanceParams& params, uint32_t phase, Rng& rng,
                         Stream* sink) {
  const auto active = support.ActiveSet(phase);
  return RunPhase(estimator, active, params, phase, rng, sink);
}

InstanceRun RunInstance(Estimator& estimator, const InstanceParams& params,
                        uint64_t seed, Stream* sink) {
  InstanceRun run;
  run.support = SampleSupport(params, seed);
  if (sink != nullptr) {
    sink->num_users = params.N;
    sink->updates.reserve(sink->updates.size() + params.T);
  }
  run.phases.reserve(params.P);
  for (uint32_t i = 0; i < params.P; ++i) {
    Rng rng = PhaseRng(seed, i);
    run.phases.push_back(RunPhase(estimator, run.support, params, i, rng, sink));
  }
  return run;
}

}  // namespace dpspace
