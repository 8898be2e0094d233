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

// Helpers shared by the unit tests.

#ifndef DPSPACE_TESTS_TEST_UTIL_H_
#define DPSPACE_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <vector>

#include "dpspace/algorithms.h"
#include "dpspace/core_model.h"
#include "dpspace/hard_instance.h"

namespace dpspace::testing {

inline InstanceParams SmallParams(Prior prior = Prior::kUniform) {
  return DeriveParams(64, 8, 16, 64, prior);
}

inline InstanceParams LargeParams(Prior prior = Prior::kUniform) {
  return DeriveParams(64, 8, 16, 512, prior);
}

// A tiny instance that still satisfies every constraint: w=4, k=2, h=2, P=10.
inline InstanceParams TinyParams(Prior prior = Prior::kUniform) {
  return DeriveParams(4, 2, 2, 10, prior);
}

// Stream positions just after each insertion pass, where the construction
// queries. Assumes the plain CountDistinct layout.
inline std::vector<uint64_t> QueryPositions(const InstanceParams& p) {
  std::vector<uint64_t> out;
  const uint64_t n = p.group_size();
  for (uint64_t i = 0; i < p.P; ++i) {
    for (uint64_t j = 0; j < p.w; ++j) out.push_back((i * p.w + j) * 2 * n + n);
  }
  return out;
}

// Feeds `updates` to `e` and queries after the given prefix lengths.
inline std::vector<double> ReplayAndQuery(Estimator& e,
                                          const std::vector<StreamUpdate>& updates,
                                          const std::vector<uint64_t>& positions) {
  std::vector<double> answers;
  size_t next = 0;
  for (uint64_t t = 0; t <= updates.size(); ++t) {
    while (next < positions.size() && positions[next] == t) {
      answers.push_back(e.Query());
      ++next;
    }
    if (t < updates.size()) e.Process(updates[t]);
  }
  return answers;
}

}  // namespace dpspace::testing

#endif  // DPSPACE_TESTS_TEST_UTIL_H_
