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

#include "dpspace/core_model.h"

#include <cmath>
#include <string>
#include <type_traits>

#include "dpspace/bytes.h"

namespace dpspace {

std::optional<UserId> UpdateUser(const StreamUpdate& update) {
  return std::visit(
      [](const auto& u) -> std::optional<UserId> {
        if constexpr (std::is_same_v<std::decay_t<decltype(u)>, EmptyUpdate>) {
          return std::nullopt;
        } else {
          return u.user;
        }
      },
      update);
}

void AccuracyParams::Validate() const {
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw std::invalid_argument("accuracy: tau must lie in [0, 1)");
  }
  if (!(eta >= 0.0)) throw std::invalid_argument("accuracy: eta must be >= 0");
}

void PrivacyParams::Validate() const {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("privacy: epsilon must be > 0");
  }
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("privacy: delta must lie in [0, 1)");
  }
}

FrequencyState::FrequencyState(uint32_t num_users, bool strict_binary)
    : f_(num_users, 0), strict_binary_(strict_binary) {}

void FrequencyState::Apply(const StreamUpdate& update) {
  if (const auto* s = std::get_if<SignedUpdate>(&update)) {
    if (s->user >= f_.size()) {
      throw std::out_of_range("user id " + std::to_string(s->user) +
                              " outside universe");
    }
    if (s->sign != 1 && s->sign != -1) {
      throw std::invalid_argument("signed update must carry +1 or -1");
    }
    int64_t& slot = f_[s->user];
    const int64_t next = slot + s->sign;
    if (strict_binary_ && (next < 0 || next > 1)) {
      throw FrequencyRangeError("frequency of user " + std::to_string(s->user) +
                                " would leave {0,1}");
    }
    if (slot == 0 && next != 0) ++nonzero_;
    if (slot != 0 && next == 0) --nonzero_;
    slot = next;
  } else if (!std::holds_alternative<EmptyUpdate>(update)) {
    throw std::invalid_argument(
        "feature/item updates do not act on a frequency vector");
  }
  ++step_;
}

int64_t FrequencyState::frequency(UserId user) const {
  return user < f_.size() ? f_[user] : 0;
}

std::string FrequencyState::Serialize() const {
  ByteWriter w;
  w.PutU32(static_cast<uint32_t>(f_.size()));
  w.PutU8(strict_binary_ ? 1 : 0);
  w.PutU64(step_);
  w.PutU64(nonzero_);
  for (uint32_t u = 0; u < f_.size(); ++u) {
    if (f_[u] != 0) {
      w.PutU32(u);
      w.PutI64(f_[u]);
    }
  }
  const auto& b = w.bytes();
  return std::string(b.begin(), b.end());
}

std::map<UserId, uint64_t> OccurrencyProfile(
    std::span<const StreamUpdate> updates) {
  std::map<UserId, uint64_t> profile;
  for (const auto& u : updates) {
    if (auto user = UpdateUser(u)) ++profile[*user];
  }
  return profile;
}

bool CheckOccurrencyBounded(std::span<const StreamUpdate> updates, uint64_t w,
                            uint64_t k) {
  uint64_t over = 0;
  for (const auto& [user, occ] : OccurrencyProfile(updates)) {
    if (occ > w) ++over;
  }
  return over <= k;
}

bool CheckApprox(double answer, double truth, const AccuracyParams& acc) {
  return (1.0 - acc.tau) * truth - acc.eta <= answer &&
         answer <= (1.0 + acc.tau) * truth + acc.eta;
}

}  // namespace dpspace
