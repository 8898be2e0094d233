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

// Streaming estimators behind one interface. Every estimator can serialize
// its complete internal state (including any random generator position)
// into a Snapshot; the snapshot length in bits is the memory M that the
// communication-game reduction transmits between players.

#ifndef DPSPACE_ALGORITHMS_H_
#define DPSPACE_ALGORITHMS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dpspace/core_model.h"
#include "dpspace/rng.h"

namespace dpspace {

enum class Problem { kCountDistinct, kMaxSelect, kQuantile };

std::string_view ProblemName(Problem p);
// Accepts "countdistinct", "maxselect", "quantile".
Problem ParseProblem(std::string_view name);

struct Snapshot {
  std::vector<uint8_t> bytes;
  uint64_t bit_length() const { return 8 * bytes.size(); }
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

// Public parameters of a query. Only Quantile reads `rank`.
struct QuerySpec {
  double rank = 0.0;
};

class Estimator {
 public:
  virtual ~Estimator() = default;

  virtual std::string_view name() const = 0;
  virtual Problem problem() const = 0;

  virtual void Process(const StreamUpdate& update) = 0;
  // Non-const: private estimators consume randomness per answer.
  virtual double Query(const QuerySpec& spec) = 0;
  double Query() { return Query(QuerySpec{}); }

  virtual Snapshot Save() const = 0;
  // Replaces the whole state. Throws DecodeError on a malformed snapshot or
  // one written by a different estimator kind or configuration.
  virtual void Restore(const Snapshot& snapshot) = 0;
};

using EstimatorFactory = std::function<std::unique_ptr<Estimator>()>;

// Noiseless, non-private exact distinct counter.
class ExactCounter final : public Estimator {
 public:
  std::string_view name() const override { return "exact"; }
  Problem problem() const override { return Problem::kCountDistinct; }
  void Process(const StreamUpdate& update) override;
  double Query(const QuerySpec& spec) override;
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

  uint64_t count() const { return freq_.size(); }
  bool active(UserId user) const { return freq_.count(user) != 0; }

 private:
  friend class EchoLeakyCounter;
  std::unordered_map<UserId, int64_t> freq_;  // nonzero entries only
};

// Turnstile k-minimum-values sketch. Keeps exactly the currently active ids
// whose 64-bit hash lies below an adaptive threshold; the threshold only
// decreases, dropping the largest sampled hash whenever more than
// `capacity` ids are held. Below saturation the answer is exact.
class KmvSketch final : public Estimator {
 public:
  static constexpr uint32_t kMinCapacity = 64;

  KmvSketch(uint32_t capacity, uint64_t hash_seed);

  std::string_view name() const override { return "kmv"; }
  Problem problem() const override { return Problem::kCountDistinct; }
  void Process(const StreamUpdate& update) override;
  double Query(const QuerySpec& spec) override;
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

  uint32_t capacity() const { return capacity_; }
  // Upper bound on Save().bit_length() for this capacity.
  uint64_t DeclaredSpaceBits() const;

 private:
  uint64_t Hash(UserId user) const;

  uint32_t capacity_;
  uint64_t hash_seed_;
  bool saturated_ = false;
  uint64_t threshold_ = 0;  // valid when saturated_: ids need hash < threshold_
  std::map<std::pair<uint64_t, UserId>, int64_t> sample_;
};

// How the stream presents its queries. The per-answer noise calibration of
// CappedDpCounter is only sound for phase-reset patterns, where every
// inserted user is revoked before the next-but-one query.
enum class QueryPattern { kPhaseReset };

struct CappedDpOptions {
  uint32_t cap = 1;  // occurrency threshold w
  PrivacyParams privacy;
  bool noiseless = false;
  QueryPattern pattern = QueryPattern::kPhaseReset;
  uint64_t seed = 0;
};

// sqrt(2w) * sqrt(2 ln(1.25 / delta)) / epsilon.
double CappedGaussianSigma(uint32_t cap, const PrivacyParams& privacy);

// Reference user-level DP counter with contribution capping. Tracks every
// user's occurrency; the update that pushes a user past `cap` and all later
// ones are ignored, and the user's current contribution is withdrawn.
// Answers are the exact count over non-blocked users plus independent
// Gaussian noise of scale CappedGaussianSigma.
class CappedDpCounter final : public Estimator {
 public:
  explicit CappedDpCounter(const CappedDpOptions& options);

  std::string_view name() const override { return "capped_dp"; }
  Problem problem() const override { return Problem::kCountDistinct; }
  void Process(const StreamUpdate& update) override;
  double Query(const QuerySpec& spec) override;
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

  double sigma() const { return sigma_; }
  bool blocked(UserId user) const;
  // Updates counted toward `user`, saturating at cap + 1.
  uint32_t occurrency(UserId user) const;
  uint64_t exact_count() const { return active_.size(); }

 private:
  CappedDpOptions options_;
  double sigma_;
  Rng rng_;
  std::unordered_map<UserId, uint32_t> occurrency_;
  std::unordered_map<UserId, int64_t> active_;
};

// Accurate but non-private: answers exact + eta * (2b - 1), where b says
// whether `target` is currently active.
class EchoLeakyCounter final : public Estimator {
 public:
  EchoLeakyCounter(UserId target, double eta);

  std::string_view name() const override { return "echo_leaky"; }
  Problem problem() const override { return Problem::kCountDistinct; }
  void Process(const StreamUpdate& update) override;
  double Query(const QuerySpec& spec) override;
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

  UserId target() const { return target_; }

 private:
  UserId target_;
  double eta_;
  ExactCounter exact_;
};

// Answers a fixed value regardless of input.
class ConstantEstimator final : public Estimator {
 public:
  ConstantEstimator(Problem problem, double value)
      : problem_(problem), value_(value) {}

  std::string_view name() const override { return "constant"; }
  Problem problem() const override { return problem_; }
  void Process(const StreamUpdate&) override {}
  double Query(const QuerySpec&) override { return value_; }
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

 private:
  Problem problem_;
  double value_;
};

// Exact MaxSelect over d features (0-based). Answers the feature with the
// largest count; ties go to the lower index.
class ExactMaxSelect final : public Estimator {
 public:
  explicit ExactMaxSelect(uint32_t num_features);

  std::string_view name() const override { return "exact_maxselect"; }
  Problem problem() const override { return Problem::kMaxSelect; }
  void Process(const StreamUpdate& update) override;
  double Query(const QuerySpec& spec) override;
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

  int64_t feature_count(uint32_t feature) const { return counts_.at(feature); }

 private:
  uint32_t num_features_;
  std::vector<int64_t> counts_;
  std::set<std::pair<UserId, uint32_t>> set_bits_;
};

// Exact quantile over items [0, U). All N users start at `rest_item`.
// A rank-k query returns the smallest item a with |{u : v_u <= a}| >= k.
class ExactQuantile final : public Estimator {
 public:
  ExactQuantile(uint32_t num_items, uint32_t num_users, uint32_t rest_item);

  std::string_view name() const override { return "exact_quantile"; }
  Problem problem() const override { return Problem::kQuantile; }
  void Process(const StreamUpdate& update) override;
  double Query(const QuerySpec& spec) override;
  using Estimator::Query;
  Snapshot Save() const override;
  void Restore(const Snapshot& snapshot) override;

  uint32_t item(UserId user) const;

 private:
  uint32_t num_items_;
  uint32_t num_users_;
  uint32_t rest_item_;
  std::vector<uint64_t> counts_;
  std::map<UserId, uint32_t> moved_;  // users not at rest_item_
};

// Name + numeric parameter map, as read from an experiment config.
struct EstimatorSpec {
  std::string name;
  std::map<std::string, double> params;
};

// Values the factory needs from the surrounding experiment.
struct EstimatorContext {
  uint64_t seed = 0;
  uint64_t stream_length = 0;  // T; default delta is 1/T^2
  uint32_t num_users = 0;
  uint32_t w = 0;              // default capped_dp cap
  std::vector<UserId> heavy;  // resolves "target_heavy_index"
};

// Known names: exact, kmv, capped_dp, echo_leaky, constant,
// exact_maxselect, exact_quantile. Throws std::invalid_argument naming the
// offending field for unknown names or bad parameters.
std::unique_ptr<Estimator> MakeEstimator(const EstimatorSpec& spec,
                                         const EstimatorContext& context);

}  // namespace dpspace

#endif  // DPSPACE_ALGORITHMS_H_
