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

#include "dpspace/algorithms.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpspace/bytes.h"
#include "dpspace/mechanisms.h"

namespace dpspace {
namespace {

enum Tag : uint8_t {
  kTagExact = 'X',
  kTagKmv = 'K',
  kTagCapped = 'C',
  kTagLeaky = 'L',
  kTagConstant = 'Z',
  kTagMaxSelect = 'M',
  kTagQuantile = 'Q',
};

void ExpectTag(ByteReader& r, Tag tag) {
  if (r.GetU8() != tag) throw DecodeError("snapshot belongs to another estimator");
}

template <typename V>
std::vector<std::pair<UserId, V>> Sorted(const std::unordered_map<UserId, V>& m) {
  std::vector<std::pair<UserId, V>> out(m.begin(), m.end());
  std::sort(out.begin(), out.end());
  return out;
}

const SignedUpdate* AsSigned(const StreamUpdate& update, std::string_view who) {
  if (std::holds_alternative<EmptyUpdate>(update)) return nullptr;
  const auto* s = std::get_if<SignedUpdate>(&update);
  if (s == nullptr) {
    throw std::invalid_argument(std::string(who) +
                                " accepts only empty and signed updates");
  }
  return s;
}

void ApplySigned(std::unordered_map<UserId, int64_t>& freq, const SignedUpdate& s) {
  const int64_t next = freq[s.user] + s.sign;
  if (next == 0) {
    freq.erase(s.user);
  } else {
    freq[s.user] = next;
  }
}

void PutFreqTable(ByteWriter& w, const std::unordered_map<UserId, int64_t>& freq) {
  w.PutU32(static_cast<uint32_t>(freq.size()));
  for (const auto& [u, f] : Sorted(freq)) {
    w.PutU32(u);
    w.PutI64(f);
  }
}

std::unordered_map<UserId, int64_t> GetFreqTable(ByteReader& r) {
  std::unordered_map<UserId, int64_t> freq;
  const uint32_t n = r.GetU32();
  for (uint32_t i = 0; i < n; ++i) {
    const UserId u = r.GetU32();
    freq[u] = r.GetI64();
  }
  return freq;
}

}  // namespace

std::string_view ProblemName(Problem p) {
  switch (p) {
    case Problem::kCountDistinct:
      return "countdistinct";
    case Problem::kMaxSelect:
      return "maxselect";
    case Problem::kQuantile:
      return "quantile";
  }
  return "?";
}

Problem ParseProblem(std::string_view name) {
  if (name == "countdistinct") return Problem::kCountDistinct;
  if (name == "maxselect") return Problem::kMaxSelect;
  if (name == "quantile") return Problem::kQuantile;
  throw std::invalid_argument("problem: unknown value '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- exact

void ExactCounter::Process(const StreamUpdate& update) {
  if (const auto* s = AsSigned(update, "exact counter")) ApplySigned(freq_, *s);
}

double ExactCounter::Query(const QuerySpec&) {
  return static_cast<double>(freq_.size());
}

Snapshot ExactCounter::Save() const {
  ByteWriter w;
  w.PutU8(kTagExact);
  PutFreqTable(w, freq_);
  return {w.Release()};
}

void ExactCounter::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagExact);
  auto freq = GetFreqTable(r);
  r.ExpectEnd();
  freq_ = std::move(freq);
}

// ---------------------------------------------------------------- kmv

KmvSketch::KmvSketch(uint32_t capacity, uint64_t hash_seed)
    : capacity_(capacity), hash_seed_(hash_seed) {
  if (capacity < kMinCapacity) {
    throw std::invalid_argument("kmv: capacity must be >= 64");
  }
}

uint64_t KmvSketch::Hash(UserId user) const {
  return Mix64(Mix64(hash_seed_) + (static_cast<uint64_t>(user) + 1) * kGolden);
}

void KmvSketch::Process(const StreamUpdate& update) {
  const auto* s = AsSigned(update, "kmv sketch");
  if (s == nullptr) return;
  const uint64_t h = Hash(s->user);
  if (saturated_ && h >= threshold_) return;
  const auto key = std::make_pair(h, s->user);
  const int64_t next = sample_[key] + s->sign;
  if (next == 0) {
    sample_.erase(key);
  } else {
    sample_[key] = next;
  }
  if (sample_.size() > capacity_) {
    auto last = std::prev(sample_.end());
    threshold_ = last->first.first;
    saturated_ = true;
    sample_.erase(last);
  }
}

double KmvSketch::Query(const QuerySpec&) {
  const auto held = static_cast<double>(sample_.size());
  if (!saturated_) return held;
  return held / (static_cast<double>(threshold_) * 0x1.0p-64);
}

uint64_t KmvSketch::DeclaredSpaceBits() const {
  // tag, capacity, seed, saturated, threshold, count; then (id, freq) pairs.
  return 8 + 32 + 64 + 8 + 64 + 32 + static_cast<uint64_t>(capacity_) * (32 + 64);
}

Snapshot KmvSketch::Save() const {
  ByteWriter w;
  w.PutU8(kTagKmv);
  w.PutU32(capacity_);
  w.PutU64(hash_seed_);
  w.PutU8(saturated_ ? 1 : 0);
  w.PutU64(threshold_);
  w.PutU32(static_cast<uint32_t>(sample_.size()));
  for (const auto& [key, f] : sample_) {
    w.PutU32(key.second);
    w.PutI64(f);
  }
  return {w.Release()};
}

void KmvSketch::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagKmv);
  if (r.GetU32() != capacity_ || r.GetU64() != hash_seed_) {
    throw DecodeError("kmv snapshot configuration mismatch");
  }
  const bool saturated = r.GetU8() != 0;
  const uint64_t threshold = r.GetU64();
  const uint32_t n = r.GetU32();
  std::map<std::pair<uint64_t, UserId>, int64_t> sample;
  for (uint32_t i = 0; i < n; ++i) {
    const UserId u = r.GetU32();
    sample[{Hash(u), u}] = r.GetI64();
  }
  r.ExpectEnd();
  saturated_ = saturated;
  threshold_ = threshold;
  sample_ = std::move(sample);
}

// ---------------------------------------------------------------- capped dp

double CappedGaussianSigma(uint32_t cap, const PrivacyParams& privacy) {
  privacy.Validate();
  if (!(privacy.delta > 0.0)) {
    throw std::invalid_argument("capped_dp: delta must be > 0 for Gaussian noise");
  }
  return std::sqrt(2.0 * cap) * std::sqrt(2.0 * std::log(1.25 / privacy.delta)) /
         privacy.epsilon;
}

CappedDpCounter::CappedDpCounter(const CappedDpOptions& options)
    : options_(options),
      sigma_(CappedGaussianSigma(options.cap, options.privacy)),
      rng_(options.seed) {
  if (options.cap < 1) throw std::invalid_argument("capped_dp: cap must be >= 1");
}

void CappedDpCounter::Process(const StreamUpdate& update) {
  const auto* s = AsSigned(update, "capped dp counter");
  if (s == nullptr) return;
  uint32_t& occ = occurrency_[s->user];
  if (occ > options_.cap) return;
  ++occ;
  if (occ > options_.cap) {
    active_.erase(s->user);
    return;
  }
  ApplySigned(active_, *s);
}

double CappedDpCounter::Query(const QuerySpec&) {
  const auto exact = static_cast<double>(active_.size());
  if (options_.noiseless) return exact;
  return exact + SampleGaussian(sigma_, rng_);
}

bool CappedDpCounter::blocked(UserId user) const {
  return occurrency(user) > options_.cap;
}

uint32_t CappedDpCounter::occurrency(UserId user) const {
  auto it = occurrency_.find(user);
  return it == occurrency_.end() ? 0 : it->second;
}

Snapshot CappedDpCounter::Save() const {
  ByteWriter w;
  w.PutU8(kTagCapped);
  w.PutU32(options_.cap);
  w.PutF64(options_.privacy.epsilon);
  w.PutF64(options_.privacy.delta);
  w.PutU8(options_.noiseless ? 1 : 0);
  w.PutU64(rng_.key());
  w.PutU64(rng_.counter());
  w.PutU32(static_cast<uint32_t>(occurrency_.size()));
  for (const auto& [u, occ] : Sorted(occurrency_)) {
    w.PutU32(u);
    w.PutU32(occ);
  }
  PutFreqTable(w, active_);
  return {w.Release()};
}

void CappedDpCounter::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagCapped);
  const uint32_t cap = r.GetU32();
  const double eps = r.GetF64();
  const double delta = r.GetF64();
  const bool noiseless = r.GetU8() != 0;
  if (cap != options_.cap || eps != options_.privacy.epsilon ||
      delta != options_.privacy.delta || noiseless != options_.noiseless) {
    throw DecodeError("capped_dp snapshot configuration mismatch");
  }
  const uint64_t key = r.GetU64();
  const uint64_t counter = r.GetU64();
  std::unordered_map<UserId, uint32_t> occurrency;
  const uint32_t n = r.GetU32();
  for (uint32_t i = 0; i < n; ++i) {
    const UserId u = r.GetU32();
    occurrency[u] = r.GetU32();
  }
  auto active = GetFreqTable(r);
  r.ExpectEnd();
  rng_ = Rng(key, counter);
  occurrency_ = std::move(occurrency);
  active_ = std::move(active);
}

// ---------------------------------------------------------------- leaky

EchoLeakyCounter::EchoLeakyCounter(UserId target, double eta)
    : target_(target), eta_(eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("echo_leaky: eta must be >= 0");
}

void EchoLeakyCounter::Process(const StreamUpdate& update) {
  exact_.Process(update);
}

double EchoLeakyCounter::Query(const QuerySpec& spec) {
  const double bit = exact_.active(target_) ? 1.0 : 0.0;
  return exact_.Query(spec) + eta_ * (2.0 * bit - 1.0);
}

Snapshot EchoLeakyCounter::Save() const {
  ByteWriter w;
  w.PutU8(kTagLeaky);
  w.PutU32(target_);
  w.PutF64(eta_);
  PutFreqTable(w, exact_.freq_);
  return {w.Release()};
}

void EchoLeakyCounter::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagLeaky);
  if (r.GetU32() != target_ || r.GetF64() != eta_) {
    throw DecodeError("echo_leaky snapshot configuration mismatch");
  }
  auto freq = GetFreqTable(r);
  r.ExpectEnd();
  exact_.freq_ = std::move(freq);
}

// ---------------------------------------------------------------- constant

Snapshot ConstantEstimator::Save() const {
  ByteWriter w;
  w.PutU8(kTagConstant);
  w.PutU8(static_cast<uint8_t>(problem_));
  w.PutF64(value_);
  return {w.Release()};
}

void ConstantEstimator::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagConstant);
  const auto problem = static_cast<Problem>(r.GetU8());
  const double value = r.GetF64();
  r.ExpectEnd();
  problem_ = problem;
  value_ = value;
}

// ---------------------------------------------------------------- maxselect

ExactMaxSelect::ExactMaxSelect(uint32_t num_features)
    : num_features_(num_features), counts_(num_features, 0) {
  if (num_features < 2) throw std::invalid_argument("maxselect: d must be >= 2");
}

void ExactMaxSelect::Process(const StreamUpdate& update) {
  if (std::holds_alternative<EmptyUpdate>(update)) return;
  const auto* flip = std::get_if<FeatureFlip>(&update);
  if (flip == nullptr) {
    throw std::invalid_argument("maxselect accepts only empty and feature-flip updates");
  }
  if (flip->feature >= num_features_) {
    throw std::out_of_range("feature index outside [0, d)");
  }
  const auto key = std::make_pair(flip->user, flip->feature);
  if (set_bits_.erase(key) != 0) {
    --counts_[flip->feature];
  } else {
    set_bits_.insert(key);
    ++counts_[flip->feature];
  }
}

double ExactMaxSelect::Query(const QuerySpec&) {
  const auto best = std::max_element(counts_.begin(), counts_.end());
  return static_cast<double>(best - counts_.begin());
}

Snapshot ExactMaxSelect::Save() const {
  ByteWriter w;
  w.PutU8(kTagMaxSelect);
  w.PutU32(num_features_);
  w.PutU32(static_cast<uint32_t>(set_bits_.size()));
  for (const auto& [u, f] : set_bits_) {
    w.PutU32(u);
    w.PutU32(f);
  }
  return {w.Release()};
}

void ExactMaxSelect::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagMaxSelect);
  if (r.GetU32() != num_features_) throw DecodeError("maxselect d mismatch");
  std::set<std::pair<UserId, uint32_t>> bits;
  std::vector<int64_t> counts(num_features_, 0);
  const uint32_t n = r.GetU32();
  for (uint32_t i = 0; i < n; ++i) {
    const UserId u = r.GetU32();
    const uint32_t f = r.GetU32();
    if (f >= num_features_) throw DecodeError("maxselect feature out of range");
    bits.emplace(u, f);
    ++counts[f];
  }
  r.ExpectEnd();
  set_bits_ = std::move(bits);
  counts_ = std::move(counts);
}

// ---------------------------------------------------------------- quantile

ExactQuantile::ExactQuantile(uint32_t num_items, uint32_t num_users,
                             uint32_t rest_item)
    : num_items_(num_items),
      num_users_(num_users),
      rest_item_(rest_item),
      counts_(num_items, 0) {
  if (num_items < 2) throw std::invalid_argument("quantile: U must be >= 2");
  if (rest_item >= num_items) {
    throw std::invalid_argument("quantile: rest item outside [0, U)");
  }
  counts_[rest_item] = num_users;
}

uint32_t ExactQuantile::item(UserId user) const {
  auto it = moved_.find(user);
  return it == moved_.end() ? rest_item_ : it->second;
}

void ExactQuantile::Process(const StreamUpdate& update) {
  if (std::holds_alternative<EmptyUpdate>(update)) return;
  const auto* change = std::get_if<ItemChange>(&update);
  if (change == nullptr) {
    throw std::invalid_argument("quantile accepts only empty and item-change updates");
  }
  if (change->user >= num_users_) throw std::out_of_range("user outside universe");
  if (change->item >= num_items_) throw std::out_of_range("item outside [0, U)");
  --counts_[item(change->user)];
  ++counts_[change->item];
  if (change->item == rest_item_) {
    moved_.erase(change->user);
  } else {
    moved_[change->user] = change->item;
  }
}

double ExactQuantile::Query(const QuerySpec& spec) {
  uint64_t cumulative = 0;
  for (uint32_t a = 0; a < num_items_; ++a) {
    cumulative += counts_[a];
    if (static_cast<double>(cumulative) >= spec.rank) return a;
  }
  return num_items_ - 1;
}

Snapshot ExactQuantile::Save() const {
  ByteWriter w;
  w.PutU8(kTagQuantile);
  w.PutU32(num_items_);
  w.PutU32(num_users_);
  w.PutU32(rest_item_);
  w.PutU32(static_cast<uint32_t>(moved_.size()));
  for (const auto& [u, it] : moved_) {
    w.PutU32(u);
    w.PutU32(it);
  }
  return {w.Release()};
}

void ExactQuantile::Restore(const Snapshot& snapshot) {
  ByteReader r(snapshot.bytes);
  ExpectTag(r, kTagQuantile);
  if (r.GetU32() != num_items_ || r.GetU32() != num_users_ ||
      r.GetU32() != rest_item_) {
    throw DecodeError("quantile snapshot configuration mismatch");
  }
  std::map<UserId, uint32_t> moved;
  std::vector<uint64_t> counts(num_items_, 0);
  counts[rest_item_] = num_users_;
  const uint32_t n = r.GetU32();
  for (uint32_t i = 0; i < n; ++i) {
    const UserId u = r.GetU32();
    const uint32_t it = r.GetU32();
    if (it >= num_items_ || it == rest_item_) throw DecodeError("bad quantile item");
    moved[u] = it;
    --counts[rest_item_];
    ++counts[it];
  }
  r.ExpectEnd();
  moved_ = std::move(moved);
  counts_ = std::move(counts);
}

// ---------------------------------------------------------------- factory

namespace {

class ParamReader {
 public:
  explicit ParamReader(const EstimatorSpec& spec) : spec_(spec) {}

  double Get(const std::string& key, double fallback) const {
    auto it = spec_.params.find(key);
    return it == spec_.params.end() ? fallback : it->second;
  }
  double Require(const std::string& key) const {
    auto it = spec_.params.find(key);
    if (it == spec_.params.end()) {
      throw std::invalid_argument("estimator." + key + ": required by '" +
                                  spec_.name + "'");
    }
    return it->second;
  }
  uint32_t GetCount(const std::string& key, double fallback) const {
    const double v = Get(key, fallback);
    if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
      throw std::invalid_argument("estimator." + key +
                                  ": must be a non-negative integer");
    }
    return static_cast<uint32_t>(v);
  }

 private:
  const EstimatorSpec& spec_;
};

}  // namespace

std::unique_ptr<Estimator> MakeEstimator(const EstimatorSpec& spec,
                                         const EstimatorContext& context) {
  const ParamReader p(spec);
  const uint64_t est_seed = DeriveKey(context.seed, "estimator");
  if (spec.name == "exact") return std::make_unique<ExactCounter>();
  if (spec.name == "kmv") {
    return std::make_unique<KmvSketch>(p.GetCount("capacity", 1024),
                                       DeriveKey(context.seed, "kmv-hash"));
  }
  if (spec.name == "capped_dp") {
    CappedDpOptions o;
    o.cap = p.GetCount("cap", p.GetCount("w", context.w));
    if (o.cap == 0) throw std::invalid_argument("estimator.cap: required and >= 1");
    o.privacy.epsilon = p.Get("epsilon", 0.5);
    const double t = static_cast<double>(context.stream_length);
    o.privacy.delta = p.Get("delta", t > 0 ? 1.0 / (t * t) : 0.0);
    o.noiseless = p.Get("noiseless", 0.0) != 0.0;
    o.seed = est_seed;
    return std::make_unique<CappedDpCounter>(o);
  }
  if (spec.name == "echo_leaky") {
    UserId target = 0;
    if (spec.params.count("target_heavy_index") != 0) {
      const uint32_t idx = p.GetCount("target_heavy_index", 0);
      if (idx >= context.heavy.size()) {
        throw std::invalid_argument("estimator.target_heavy_index: out of range");
      }
      target = context.heavy[idx];
    } else {
      target = p.GetCount("target", 0);
      if (spec.params.count("target") == 0) {
        throw std::invalid_argument(
            "estimator.target: 'target' or 'target_heavy_index' required");
      }
    }
    return std::make_unique<EchoLeakyCounter>(target, p.Require("eta"));
  }
  if (spec.name == "constant") {
    return std::make_unique<ConstantEstimator>(Problem::kCountDistinct,
                                               p.Get("value", 0.0));
  }
  if (spec.name == "exact_maxselect") {
    return std::make_unique<ExactMaxSelect>(p.GetCount("d", 2));
  }
  if (spec.name == "exact_quantile") {
    return std::make_unique<ExactQuantile>(p.GetCount("U", 2),
                                           p.GetCount("N", context.num_users),
                                           p.GetCount("rest_item", 1));
  }
  throw std::invalid_argument("estimator.name: unknown estimator '" + spec.name + "'");
}

}  // namespace dpspace
