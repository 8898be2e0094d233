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

#include "dpspace/extensions.h"

#include <algorithm>
#include <stdexcept>

#include "dpspace/game.h"

namespace dpspace {
namespace {

void CheckAligned(std::span<const UserId> active, std::span<const uint8_t> bits) {
  if (active.size() != bits.size()) {
    throw std::invalid_argument("gadget: active set and bits differ in length");
  }
  if (active.size() < 2) throw std::invalid_argument("gadget: needs at least 2 users");
}

uint8_t DecodeBinary(double answer, const char* what) {
  if (answer == 0.0) return 0;
  if (answer == 1.0) return 1;
  throw std::invalid_argument(std::string(what) + ": answer " + std::to_string(answer) +
                              " is not 0 or 1");
}

}  // namespace

GadgetEncoding QuantileGadgetEncode(std::span<const UserId> active,
                                    std::span<const uint8_t> bits) {
  CheckAligned(active, bits);
  GadgetEncoding e;
  e.set.reserve(active.size());
  e.undo.reserve(active.size());
  for (size_t x = 0; x < active.size(); ++x) {
    if (bits[x] == 0) {
      e.set.emplace_back(ItemChange{active[x], 0});
      e.undo.emplace_back(ItemChange{active[x], kQuantileRestItem});
    } else {
      e.set.emplace_back(EmptyUpdate{});
      e.undo.emplace_back(EmptyUpdate{});
    }
  }
  e.query.rank = static_cast<double>(active.size()) / 2.0;
  return e;
}

uint8_t QuantileGadgetDecode(double answer) { return DecodeBinary(answer, "quantile_decode"); }

GadgetEncoding MaxSelectGadgetEncode(std::span<const UserId> active,
                                     std::span<const uint8_t> bits) {
  CheckAligned(active, bits);
  GadgetEncoding e;
  e.set.reserve(active.size());
  e.undo.reserve(active.size());
  for (size_t x = 0; x < active.size(); ++x) {
    if (bits[x] == 1) {
      e.set.emplace_back(FeatureFlip{active[x], 1});
      e.undo.emplace_back(FeatureFlip{active[x], 1});
    } else {
      e.set.emplace_back(EmptyUpdate{});
      e.undo.emplace_back(EmptyUpdate{});
    }
  }
  return e;
}

uint8_t MaxSelectGadgetDecode(double answer) {
  return DecodeBinary(answer, "maxselect_decode");
}

std::vector<StreamUpdate> MaxSelectHalfToggle(std::span<const UserId> half) {
  std::vector<StreamUpdate> out;
  out.reserve(half.size());
  for (UserId u : half) out.emplace_back(FeatureFlip{u, 0});
  return out;
}

std::vector<UserId> SamplePublicHalf(std::span<const UserId> active, uint64_t seed,
                                     uint32_t phase) {
  Rng rng(DeriveKey(seed, "public-half", phase));
  return UniformSubset(active, static_cast<uint32_t>(active.size() / 2), rng);
}

ExtensionRun RunExtensionInstance(Problem problem, Estimator& estimator,
                                  const InstanceParams& params, uint64_t seed,
                                  Stream* sink) {
  if (problem == Problem::kCountDistinct) {
    throw std::invalid_argument("problem: extensions cover maxselect and quantile");
  }
  if (estimator.problem() != problem) {
    throw std::invalid_argument("estimator.name: estimator does not solve " +
                                std::string(ProblemName(problem)));
  }
  if (params.prior != Prior::kLogistic) {
    throw std::invalid_argument("instance.prior: extensions use the logistic prior");
  }
  const bool maxselect = problem == Problem::kMaxSelect;
  ExtensionRun run;
  run.support = SampleSupport(params, seed);
  if (sink != nullptr) sink->num_users = params.N;

  auto emit = [&](const StreamUpdate& u) {
    estimator.Process(u);
    if (sink != nullptr) sink->updates.push_back(u);
  };

  uint64_t offset = 0;
  for (uint32_t i = 0; i < params.P; ++i) {
    Rng rng = PhaseRng(seed, i);
    PhaseTranscript tr;
    tr.phase = i;
    tr.users = run.support.ActiveSet(i);
    const size_t n = tr.users.size();
    tr.priors.resize(params.w);
    tr.bits.resize(static_cast<size_t>(params.w) * n);
    tr.raw.resize(params.w);
    tr.normalized.resize(params.w);
    tr.stream_begin = offset;

    std::vector<StreamUpdate> toggle;
    if (maxselect) {
      run.public_halves.push_back(SamplePublicHalf(tr.users, seed, i));
      toggle = MaxSelectHalfToggle(run.public_halves.back());
      for (const auto& u : toggle) emit(u);
    }

    for (uint32_t j = 0; j < params.w; ++j) {
      const double p = SamplePrior(params.prior, params.group_size(), rng);
      tr.priors[j] = p;
      std::span<uint8_t> row(&tr.bits[static_cast<size_t>(j) * n], n);
      for (auto& b : row) b = rng.Bernoulli(p) ? 1 : 0;

      const GadgetEncoding enc = maxselect ? MaxSelectGadgetEncode(tr.users, row)
                                           : QuantileGadgetEncode(tr.users, row);
      for (const auto& u : enc.set) emit(u);
      const double answer = estimator.Query(enc.query);
      const uint8_t bit =
          maxselect ? MaxSelectGadgetDecode(answer) : QuantileGadgetDecode(answer);
      tr.raw[j] = bit;
      tr.normalized[j] = bit;
      for (const auto& u : enc.undo) emit(u);
    }

    for (const auto& u : toggle) emit(u);
    offset += 2ULL * params.w * n + 2ULL * toggle.size();
    tr.stream_end = offset;
    run.phases.push_back(std::move(tr));
  }
  return run;
}

}  // namespace dpspace
