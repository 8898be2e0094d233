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

#include "dpspace/game.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "dpspace/bytes.h"

namespace dpspace {

uint32_t GameConfig::RequiredSize() const {
  // The tolerance keeps values such as 0.6 * 40 from rounding up to 25.
  return static_cast<uint32_t>(std::ceil((0.5 + eps1) * group_size() - 1e-9));
}

double GameConfig::AppearanceLimit() const { return (0.5 + eps2) * P; }

void GameConfig::Validate() const {
  if (P == 0) throw std::invalid_argument("game.P: must be >= 1");
  if (h == 0) throw std::invalid_argument("game.h: must be >= 1");
  if (k == 0) throw std::invalid_argument("game.k: must be >= 1");
  if (N < k + 3ULL * h * P) throw std::invalid_argument("game.N: must be >= k + 3hP");
  if (!(eps1 >= 0.0 && eps1 < 0.5)) {
    throw std::invalid_argument("game.eps1: must lie in [0, 1/2)");
  }
  if (!(eps2 > 0.0 && eps2 < 0.5)) {
    throw std::invalid_argument("game.eps2: must lie in (0, 1/2)");
  }
}

GameConfig MakeGameConfig(const InstanceParams& params, double eps1, double eps2) {
  GameConfig cfg;
  cfg.P = params.P;
  cfg.h = params.h;
  cfg.k = params.k;
  cfg.N = params.N;
  cfg.eps1 = eps1;
  cfg.eps2 = eps2;
  cfg.Validate();
  return cfg;
}

std::vector<UserId> UniformSubset(std::span<const UserId> from, uint32_t size,
                                  Rng& rng) {
  if (size > from.size()) {
    throw std::invalid_argument("uniform_subset: size exceeds the set");
  }
  std::vector<UserId> pool(from.begin(), from.end());
  std::sort(pool.begin(), pool.end());
  for (uint32_t i = 0; i < size; ++i) {
    const auto j = i + rng.UniformInt(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  std::sort(pool.begin(), pool.end());
  return pool;
}

unsigned IdWidthBits(uint32_t N) {
  return std::max(1U, static_cast<unsigned>(std::bit_width(N > 0 ? N - 1 : 0U)));
}

namespace {

std::vector<UserId> Sorted(std::span<const UserId> ids) {
  std::vector<UserId> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  return v;
}

Message EncodeIds(std::span<const UserId> ids, unsigned width) {
  BitWriter writer;
  for (UserId id : ids) writer.Put(id, width);
  Message m;
  m.bit_length = writer.bit_length();
  m.bytes = writer.Release();
  return m;
}

std::vector<UserId> DecodeIds(const Message& m, unsigned width) {
  if (m.bit_length % width != 0 || m.bit_length > 8 * m.bytes.size()) {
    throw DecodeError("message length is not a whole number of ids");
  }
  BitReader reader(m.bytes, m.bit_length);
  std::vector<UserId> ids(m.bit_length / width);
  for (auto& id : ids) id = static_cast<UserId>(reader.Get(width));
  return ids;
}

std::optional<std::string> CheckSubmission(std::span<const UserId> sorted_subset,
                                           std::span<const UserId> sorted_input) {
  if (std::adjacent_find(sorted_subset.begin(), sorted_subset.end()) !=
      sorted_subset.end()) {
    return "duplicate id in submission";
  }
  for (UserId u : sorted_subset) {
    if (!std::binary_search(sorted_input.begin(), sorted_input.end(), u)) {
      return "submitted id " + std::to_string(u) + " outside the input set";
    }
  }
  return std::nullopt;
}

}  // namespace

GameResult PlayGame(Strategy& strategy, const InstanceSupport& support,
                    const GameConfig& config, uint64_t seed,
                    uint64_t presentation_seed) {
  config.Validate();
  if (support.heavy.size() != config.k || support.light.size() != config.P) {
    throw std::invalid_argument("game.support: does not match k and P");
  }
  GameResult result;
  for (UserId u : support.heavy) result.heavy_appearances[u] = 0;
  const uint32_t required = config.RequiredSize();

  Message incoming;
  for (uint32_t i = 0; i < config.P; ++i) {
    const auto input = support.ActiveSet(i);
    if (input.size() != config.group_size()) {
      throw std::invalid_argument("game.support: light set of wrong size");
    }
    std::vector<UserId> presented = input;
    Rng shuffle(DeriveKey(presentation_seed, "presentation", i));
    for (size_t x = presented.size(); x > 1; --x) {
      std::swap(presented[x - 1], presented[shuffle.UniformInt(x)]);
    }

    const PlayerContext context{i, seed, &config};
    PlayerOutput out = strategy.Play(context, incoming, presented);

    std::vector<UserId> subset = Sorted(out.subset);
    std::optional<std::string> violation = CheckSubmission(subset, input);
    if (!violation && out.abort_reason) violation = "aborted: " + *out.abort_reason;
    if (!violation && subset.size() < required) {
      violation = "submitted " + std::to_string(subset.size()) + " ids, required " +
                  std::to_string(required);
    }
    if (!violation && out.message.bit_length > 8 * out.message.bytes.size()) {
      violation = "message bit length exceeds its bytes";
    }
    if (!violation && config.message_limit_bits &&
        out.message.bit_length > *config.message_limit_bits) {
      violation = "message of " + std::to_string(out.message.bit_length) +
                  " bits exceeds the limit";
    }

    for (UserId u : subset) {
      auto it = result.heavy_appearances.find(u);
      if (it != result.heavy_appearances.end()) ++it->second;
    }
    result.subsets.push_back(std::move(subset));
    result.message_bits.push_back(out.message.bit_length);
    result.max_message_bits = std::max(result.max_message_bits, out.message.bit_length);

    if (violation && !result.abort_reason) {
      result.abort_reason = "player " + std::to_string(i) + ": " + *violation;
      result.abort_player = i;
      if (config.stop_at_first_violation) break;
    }
    incoming = std::move(out.message);
  }

  result.win = !result.abort_reason;
  const double limit = config.AppearanceLimit();
  for (const auto& [u, count] : result.heavy_appearances) {
    if (count > limit) result.win = false;
  }
  return result;
}

PlayerOutput RandomBaselineStrategy::Play(const PlayerContext& context,
                                          const Message&,
                                          std::span<const UserId> input) {
  Rng rng = PlayerRng(context.seed, context.index);
  PlayerOutput out;
  out.subset = UniformSubset(input, context.config->RequiredSize(), rng);
  return out;
}

PlayerOutput IntersectionStrategy::Play(const PlayerContext& context,
                                        const Message& incoming,
                                        std::span<const UserId> input) {
  const GameConfig& cfg = *context.config;
  const unsigned width = IdWidthBits(cfg.N);
  const uint32_t required = cfg.RequiredSize();
  const std::vector<UserId> mine = Sorted(input);
  Rng rng = PlayerRng(context.seed, context.index);
  PlayerOutput out;

  if (context.index == 0) {
    out.message = EncodeIds(mine, width);
    out.subset = UniformSubset(mine, required, rng);
    return out;
  }

  // From player 1 on the incoming list is either player 0's set or C; in
  // both cases its intersection with this player's set is C.
  std::vector<UserId> incoming_ids = Sorted(DecodeIds(incoming, width));
  std::vector<UserId> heavy;
  std::set_intersection(incoming_ids.begin(), incoming_ids.end(), mine.begin(),
                        mine.end(), std::back_inserter(heavy));
  std::vector<UserId> light;
  std::set_difference(mine.begin(), mine.end(), heavy.begin(), heavy.end(),
                      std::back_inserter(light));

  if (light.size() >= required) {
    out.subset = UniformSubset(light, required, rng);
  } else {
    out.subset = light;
    out.subset.insert(out.subset.end(), heavy.begin(),
                      heavy.begin() + (required - light.size()));
  }
  out.message = EncodeIds(heavy, width);
  return out;
}

PlayerOutput SubmitAllStrategy::Play(const PlayerContext&, const Message&,
                                     std::span<const UserId> input) {
  PlayerOutput out;
  out.subset = Sorted(input);
  return out;
}

PlayerOutput SubmitNoneStrategy::Play(const PlayerContext&, const Message&,
                                      std::span<const UserId>) {
  return {};
}

OracleAvoidStrategy::OracleAvoidStrategy(std::vector<UserId> heavy)
    : heavy_(Sorted(heavy)) {}

PlayerOutput OracleAvoidStrategy::Play(const PlayerContext& context, const Message&,
                                       std::span<const UserId> input) {
  const std::vector<UserId> mine = Sorted(input);
  std::vector<UserId> light;
  std::set_difference(mine.begin(), mine.end(), heavy_.begin(), heavy_.end(),
                      std::back_inserter(light));
  Rng rng = PlayerRng(context.seed, context.index);
  const uint32_t required = context.config->RequiredSize();
  PlayerOutput out;
  out.subset = UniformSubset(light, std::min<uint32_t>(required, light.size()), rng);
  return out;
}

ReductionStrategy::ReductionStrategy(InstanceParams params, EstimatorFactory factory,
                                     AttackConfig attack)
    : params_(params), factory_(std::move(factory)), attack_(attack) {
  attack_.Validate();
}

PlayerOutput ReductionStrategy::Play(const PlayerContext& context,
                                     const Message& incoming,
                                     std::span<const UserId> input) {
  std::unique_ptr<Estimator> estimator = factory_();
  if (context.index > 0) estimator->Restore(Snapshot{incoming.bytes});

  Rng phase_rng = PhaseRng(context.seed, context.index);
  PhaseTranscript tr =
      RunPhase(*estimator, input, params_, context.index, phase_rng);
  Rng rounding_rng = RoundingRng(context.seed, context.index);
  PhaseRounding rounded = RoundPhase(tr, attack_, rounding_rng);
  transcripts_.push_back(std::move(tr));

  PlayerOutput out;
  out.subset = std::move(rounded.subset);
  Snapshot snapshot = estimator->Save();
  out.message.bit_length = snapshot.bit_length();
  out.message.bytes = std::move(snapshot.bytes);
  if (out.subset.size() < context.config->RequiredSize()) {
    out.abort_reason = "rounded subset smaller than required";
  }
  return out;
}

std::unique_ptr<Strategy> MakeSimpleStrategy(std::string_view name,
                                             const InstanceSupport& support) {
  if (name == "random") return std::make_unique<RandomBaselineStrategy>();
  if (name == "intersection") return std::make_unique<IntersectionStrategy>();
  if (name == "all") return std::make_unique<SubmitAllStrategy>();
  if (name == "none") return std::make_unique<SubmitNoneStrategy>();
  if (name == "oracle") return std::make_unique<OracleAvoidStrategy>(support.heavy);
  throw std::invalid_argument("strategy: unknown strategy '" + std::string(name) + "'");
}

}  // namespace dpspace
