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

// Turnstile stream model shared by every other module: update types, the
// frequency vector, occurrency accounting and the accuracy/privacy
// parameter types.

#ifndef DPSPACE_CORE_MODEL_H_
#define DPSPACE_CORE_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace dpspace {

// Users are dense integers in [0, N).
using UserId = uint32_t;

struct EmptyUpdate {
  friend bool operator==(const EmptyUpdate&, const EmptyUpdate&) = default;
};

// (u, +1) or (u, -1).
struct SignedUpdate {
  UserId user = 0;
  int sign = 1;
  friend bool operator==(const SignedUpdate&, const SignedUpdate&) = default;
};

// MaxSelect: user toggles one bit of its feature vector.
struct FeatureFlip {
  UserId user = 0;
  uint32_t feature = 0;
  friend bool operator==(const FeatureFlip&, const FeatureFlip&) = default;
};

// Quantile: user changes its item.
struct ItemChange {
  UserId user = 0;
  uint32_t item = 0;
  friend bool operator==(const ItemChange&, const ItemChange&) = default;
};

using StreamUpdate =
    std::variant<EmptyUpdate, SignedUpdate, FeatureFlip, ItemChange>;

// The user an update involves, or nullopt for an empty update.
std::optional<UserId> UpdateUser(const StreamUpdate& update);

// A flat ordered list of updates over the universe [0, num_users).
// Phases of a generated instance refer to index ranges of `updates`.
struct Stream {
  uint32_t num_users = 0;
  std::vector<StreamUpdate> updates;

  uint64_t size() const { return updates.size(); }
};

struct AccuracyParams {
  double tau = 0.0;  // multiplicative error, in [0, 1)
  double eta = 0.0;  // additive error, >= 0

  void Validate() const;
};

struct PrivacyParams {
  double epsilon = 0.5;
  double delta = 0.0;

  void Validate() const;
};

// Thrown when a strict-binary FrequencyState would leave {0, 1}.
class FrequencyRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Signed frequency vector f over a dense universe, plus the step counter.
// In strict-binary mode (the default) every frequency must stay in {0, 1};
// an update that would break this is rejected and the state is unchanged.
class FrequencyState {
 public:
  explicit FrequencyState(uint32_t num_users, bool strict_binary = true);

  // Empty: no-op on f. Signed: f[user] += sign. FeatureFlip and ItemChange
  // are not CountDistinct updates and are rejected with invalid_argument.
  void Apply(const StreamUpdate& update);

  int64_t frequency(UserId user) const;
  uint64_t step() const { return step_; }
  uint32_t num_users() const { return static_cast<uint32_t>(f_.size()); }
  bool strict_binary() const { return strict_binary_; }

  // ||f||_0, maintained incrementally.
  uint64_t DistinctCount() const { return nonzero_; }

  // Canonical byte encoding: header then (user, value) for nonzero entries
  // in increasing user order.
  std::string Serialize() const;

  friend bool operator==(const FrequencyState&, const FrequencyState&) =
      default;

 private:
  std::vector<int64_t> f_;
  uint64_t step_ = 0;
  uint64_t nonzero_ = 0;
  bool strict_binary_;
};

// Number of users with nonzero frequency.
inline uint64_t TrueDistinctCount(const FrequencyState& state) {
  return state.DistinctCount();
}

// user -> number of non-empty updates involving that user.
std::map<UserId, uint64_t> OccurrencyProfile(
    std::span<const StreamUpdate> updates);

// True iff at most k users have occurrency strictly greater than w.
bool CheckOccurrencyBounded(std::span<const StreamUpdate> updates, uint64_t w,
                            uint64_t k);

// (1 - tau) * truth - eta <= answer <= (1 + tau) * truth + eta.
bool CheckApprox(double answer, double truth, const AccuracyParams& acc);

}  // namespace dpspace

#endif  // DPSPACE_CORE_MODEL_H_
