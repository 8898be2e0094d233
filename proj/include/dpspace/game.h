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

// The AvoidHeavyHitters one-way communication game.
//
// Player i (0-based here) receives the message of player i - 1 and its
// input set S_i u C, submits a subset Y_i of that set and sends a message
// to player i + 1. The referee checks every submission online, counts how
// often each heavy user is submitted and measures every message. The
// players win when all |Y_i| >= (1/2 + eps1)(3h + k) and no heavy user is
// submitted more than (1/2 + eps2) P times.
//
// Input sets are presented in a shuffled order; strategies are expected to
// sort on receipt so that only the set contents matter.

#ifndef DPSPACE_GAME_H_
#define DPSPACE_GAME_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpspace/algorithms.h"
#include "dpspace/attack.h"
#include "dpspace/core_model.h"
#include "dpspace/hard_instance.h"
#include "dpspace/rng.h"

namespace dpspace {

struct GameConfig {
  uint32_t P = 0;
  uint32_t h = 0;
  uint32_t k = 0;
  uint32_t N = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::optional<uint64_t> message_limit_bits;
  // Diagnostic mode: keep playing after a violation so every player runs.
  // The game is still lost.
  bool stop_at_first_violation = true;

  uint32_t group_size() const { return 3 * h + k; }
  // ceil((1/2 + eps1)(3h + k)).
  uint32_t RequiredSize() const;
  // (1/2 + eps2) P; a heavy user loses the game when strictly above it.
  double AppearanceLimit() const;
  void Validate() const;
};

// Game parameters matching a hard instance.
GameConfig MakeGameConfig(const InstanceParams& params, double eps1, double eps2);

struct Message {
  std::vector<uint8_t> bytes;
  uint64_t bit_length = 0;
};

struct PlayerContext {
  uint32_t index = 0;  // 0-based player number, equal to the phase number
  uint64_t seed = 0;   // game seed; players derive their own substreams
  const GameConfig* config = nullptr;
};

struct PlayerOutput {
  std::vector<UserId> subset;
  Message message;
  // A player may give up; the referee then records the reason and the game
  // is lost.
  std::optional<std::string> abort_reason;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string_view name() const = 0;
  virtual PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                            std::span<const UserId> input) = 0;
};

struct GameResult {
  std::vector<std::vector<UserId>> subsets;  // one per player that played
  std::map<UserId, uint32_t> heavy_appearances;
  std::vector<uint64_t> message_bits;
  uint64_t max_message_bits = 0;
  bool win = false;
  std::optional<std::string> abort_reason;  // first violation, if any
  std::optional<uint32_t> abort_player;
};

// Private key of player i.
inline Rng PlayerRng(uint64_t seed, uint32_t player) {
  return Rng(DeriveKey(seed, "player", player));
}

// Runs all players in order. `presentation_seed` only permutes the order in
// which each input set is handed over.
GameResult PlayGame(Strategy& strategy, const InstanceSupport& support,
                    const GameConfig& config, uint64_t seed,
                    uint64_t presentation_seed = 0);

// Uniform subset of exactly `size` elements of `from`, sorted.
std::vector<UserId> UniformSubset(std::span<const UserId> from, uint32_t size,
                                  Rng& rng);

// ceil(log2 N), at least 1.
unsigned IdWidthBits(uint32_t N);

// Picks a uniform subset of the required size and sends nothing.
class RandomBaselineStrategy final : public Strategy {
 public:
  std::string_view name() const override { return "random"; }
  PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                    std::span<const UserId> input) override;
};

// Player 0 sends its whole set. Player 1 intersects it with its own set,
// which recovers C because the light sets are disjoint, and every later
// player forwards C. Players after the first submit light users only,
// falling back on heavy users only when 3h is below the required size.
class IntersectionStrategy final : public Strategy {
 public:
  std::string_view name() const override { return "intersection"; }
  PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                    std::span<const UserId> input) override;
};

// Submits the whole input set.
class SubmitAllStrategy final : public Strategy {
 public:
  std::string_view name() const override { return "all"; }
  PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                    std::span<const UserId> input) override;
};

// Submits nothing.
class SubmitNoneStrategy final : public Strategy {
 public:
  std::string_view name() const override { return "none"; }
  PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                    std::span<const UserId> input) override;
};

// Knows C out of band and never submits it.
class OracleAvoidStrategy final : public Strategy {
 public:
  explicit OracleAvoidStrategy(std::vector<UserId> heavy);
  std::string_view name() const override { return "oracle"; }
  PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                    std::span<const UserId> input) override;

 private:
  std::vector<UserId> heavy_;
};

// Turns a streaming estimator into a game strategy. Player i restores the
// estimator from the incoming snapshot (player 0 builds a fresh one), runs
// phase i of the hard instance over its own set, rounds the answers into
// Y_i and forwards the new snapshot. A player whose Y_i is too small aborts.
// Randomness is keyed exactly as in RunInstance and RunRoundingAttack, so a
// game and a monolithic run with the same seed see the same transcripts.
class ReductionStrategy final : public Strategy {
 public:
  ReductionStrategy(InstanceParams params, EstimatorFactory factory,
                    AttackConfig attack);

  std::string_view name() const override { return "reduction"; }
  PlayerOutput Play(const PlayerContext& context, const Message& incoming,
                    std::span<const UserId> input) override;

  // Transcripts of every phase played so far, in player order.
  const std::vector<PhaseTranscript>& transcripts() const { return transcripts_; }
  void ClearTranscripts() { transcripts_.clear(); }

 private:
  InstanceParams params_;
  EstimatorFactory factory_;
  AttackConfig attack_;
  std::vector<PhaseTranscript> transcripts_;
};

// Known names: random, intersection, all, none, oracle (needs the heavy
// set). The reduction strategy is built separately since it wraps an
// estimator.
std::unique_ptr<Strategy> MakeSimpleStrategy(std::string_view name,
                                             const InstanceSupport& support);

}  // namespace dpspace

#endif  // DPSPACE_GAME_H_
