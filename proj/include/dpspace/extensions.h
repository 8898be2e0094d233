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

// Bit-encoding gadgets that carry the hard instance over to MaxSelect and
// Quantile.
//
// Quantile (two items, every user rests at item 1): an active user with
// bit 0 moves to item 0; the rank-n/2 query then returns the consensus bit.
// MaxSelect (two features, 0-based): a public half H of the active set
// holds feature 0 for the whole phase, and an active user with bit 1 sets
// feature 1; the argmax is feature 1 exactly when the ones outnumber |H|.
//
// Each repetition emits one update per active user to set the bits and one
// to undo them, with empty updates as placeholders, so a repetition is 2n
// updates as in the CountDistinct construction.

#ifndef DPSPACE_EXTENSIONS_H_
#define DPSPACE_EXTENSIONS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dpspace/algorithms.h"
#include "dpspace/core_model.h"
#include "dpspace/hard_instance.h"

namespace dpspace {

inline constexpr uint32_t kQuantileItems = 2;
inline constexpr uint32_t kQuantileRestItem = 1;
inline constexpr uint32_t kMaxSelectFeatures = 2;

struct GadgetEncoding {
  std::vector<StreamUpdate> set;   // one per active user
  std::vector<StreamUpdate> undo;  // one per active user, same order
  QuerySpec query;
};

// `active` and `bits` are aligned; `active` should be sorted.
GadgetEncoding QuantileGadgetEncode(std::span<const UserId> active,
                                    std::span<const uint8_t> bits);
// Item 0 or 1 maps to the same bit. Throws std::invalid_argument otherwise.
uint8_t QuantileGadgetDecode(double answer);

GadgetEncoding MaxSelectGadgetEncode(std::span<const UserId> active,
                                     std::span<const uint8_t> bits);
// Feature 1 decodes to bit 1, feature 0 to bit 0. Throws otherwise.
uint8_t MaxSelectGadgetDecode(double answer);

// Flips feature 0 for every member of H. Emitted at phase start and again
// at phase end.
std::vector<StreamUpdate> MaxSelectHalfToggle(std::span<const UserId> half);

// The public half for phase i: floor(n/2) members of the sorted active set,
// drawn from the "public-half" substream of `seed`.
std::vector<UserId> SamplePublicHalf(std::span<const UserId> active, uint64_t seed,
                                     uint32_t phase);

struct ExtensionRun {
  InstanceSupport support;
  // raw and normalized hold the decoded bit of every repetition.
  std::vector<PhaseTranscript> phases;
  std::vector<std::vector<UserId>> public_halves;  // MaxSelect only
};

// The hard instance with gadget encodings. Requires params.prior to be the
// logistic prior and an estimator for `problem` (Quantile estimators must
// use two items with rest item 1, MaxSelect estimators two features).
// Phase i draws priors and bits from PhaseRng(seed, i), as in RunInstance.
ExtensionRun RunExtensionInstance(Problem problem, Estimator& estimator,
                                  const InstanceParams& params, uint64_t seed,
                                  Stream* sink = nullptr);

}  // namespace dpspace

#endif  // DPSPACE_EXTENSIONS_H_
