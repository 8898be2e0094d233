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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "dpspace/algorithms.h"
#include "dpspace/attack.h"
#include "dpspace/game.h"
#include "dpspace/hard_instance.h"
#include "test_util.h"

namespace dpspace {
namespace {

using testing::LargeParams;
using testing::SmallParams;

TEST(GameConfigTest, RequiredSizeAndValidation) {
  const GameConfig cfg = MakeGameConfig(SmallParams(), 0.1, 0.2);
  EXPECT_EQ(cfg.RequiredSize(), 34u);  // ceil(0.6 * 56)
  EXPECT_DOUBLE_EQ(cfg.AppearanceLimit(), 0.7 * 64);
  GameConfig exact = MakeGameConfig(DeriveParams(4, 2, 2, 10, Prior::kUniform), 0.1, 0.2);
  EXPECT_EQ(exact.RequiredSize(), 5u);  // 0.6 * 8 = 4.8
  exact.eps1 = 0.0;
  EXPECT_EQ(exact.RequiredSize(), 4u);
  EXPECT_THROW(MakeGameConfig(SmallParams(), 0.5, 0.2), std::invalid_argument);
  EXPECT_THROW(MakeGameConfig(SmallParams(), 0.1, 0.0), std::invalid_argument);
  EXPECT_EQ(IdWidthBits(3080), 12u);
  EXPECT_EQ(IdWidthBits(1), 1u);
  EXPECT_EQ(IdWidthBits(4096), 12u);
  EXPECT_EQ(IdWidthBits(4097), 13u);
}

TEST(GameTest, SubmitAllLoses) {
  const InstanceParams p = SmallParams();
  const InstanceSupport s = SampleSupport(p, 1);
  SubmitAllStrategy all;
  const GameResult r = PlayGame(all, s, MakeGameConfig(p, 0.1, 0.45), 1);
  EXPECT_FALSE(r.win);
  EXPECT_FALSE(r.abort_reason.has_value());
  for (const auto& [u, c] : r.heavy_appearances) EXPECT_EQ(c, p.P);
  EXPECT_EQ(r.max_message_bits, 0u);
}

TEST(GameTest, SubmitNoneIsASizeViolation) {
  const InstanceParams p = SmallParams();
  SubmitNoneStrategy none;
  const GameResult r = PlayGame(none, SampleSupport(p, 1), MakeGameConfig(p, 0.1, 0.2), 1);
  EXPECT_FALSE(r.win);
  ASSERT_TRUE(r.abort_reason.has_value());
  EXPECT_EQ(r.abort_player, 0u);
  EXPECT_NE(r.abort_reason->find("required 34"), std::string::npos);
  EXPECT_EQ(r.subsets.size(), 1u);
}

TEST(GameTest, OracleAvoidsHeavyUsers) {
  const InstanceParams p = SmallParams();
  const InstanceSupport s = SampleSupport(p, 3);
  OracleAvoidStrategy oracle(s.heavy);
  const GameResult r = PlayGame(oracle, s, MakeGameConfig(p, 0.1, 0.01), 3);
  EXPECT_TRUE(r.win);
  for (const auto& [u, c] : r.heavy_appearances) EXPECT_EQ(c, 0u);
  // Infeasible once the required size exceeds 3h.
  const GameResult big = PlayGame(oracle, s, MakeGameConfig(p, 0.4, 0.01), 3);
  EXPECT_FALSE(big.win);
}

// Feeds a subset outside the input and a lying message length.
class CheatStrategy final : public Strategy {
 public:
  explicit CheatStrategy(int mode) : mode_(mode) {}
  std::string_view name() const override { return "cheat"; }
  PlayerOutput Play(const PlayerContext& ctx, const Message&,
                    std::span<const UserId> input) override {
    PlayerOutput out;
    out.subset.assign(input.begin(), input.end());
    if (mode_ == 0) out.subset.back() = ctx.config->N + 5;
    if (mode_ == 1) out.message.bit_length = 9;
    if (mode_ == 2) out.subset.push_back(input.front());
    if (mode_ == 3) {
      out.message.bytes.assign(100, 0);
      out.message.bit_length = 800;
    }
    return out;
  }

 private:
  int mode_;
};

TEST(GameTest, RefereeDisqualifies) {
  const InstanceParams p = SmallParams();
  const InstanceSupport s = SampleSupport(p, 1);
  GameConfig cfg = MakeGameConfig(p, 0.1, 0.45);
  cfg.message_limit_bits = 512;
  for (int mode = 0; mode < 4; ++mode) {
    CheatStrategy cheat(mode);
    const GameResult r = PlayGame(cheat, s, cfg, 1);
    EXPECT_FALSE(r.win);
    EXPECT_TRUE(r.abort_reason.has_value()) << mode;
    EXPECT_EQ(r.abort_player, 0u);
  }
}

TEST(GameTest, RandomBaselineHoeffdingRegime) {
  const InstanceParams p = LargeParams();
  const double eps1 = 0.1;
  const double eps2 = eps1 + 3 * std::sqrt(std::log(10.0 * p.P * p.k) / (2.0 * p.P));
  int wins_generous = 0;
  int wins_tight = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const InstanceSupport s = SampleSupport(p, seed);
    RandomBaselineStrategy random;
    const GameResult a = PlayGame(random, s, MakeGameConfig(p, eps1, eps2), seed);
    EXPECT_EQ(a.max_message_bits, 0u);
    for (const auto& sub : a.subsets) ASSERT_EQ(sub.size(), 34u);
    wins_generous += a.win;
    wins_tight += PlayGame(random, s, MakeGameConfig(p, eps1, eps1 / 2), seed).win;
  }
  EXPECT_GE(wins_generous, 45);
  EXPECT_LE(wins_tight, 5);
}

TEST(GameTest, IntersectionAccounting) {
  const InstanceParams p = SmallParams();
  const GameConfig cfg = MakeGameConfig(p, 0.1, FlaggingEps2(p.P, p.k));
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const InstanceSupport s = SampleSupport(p, seed);
    IntersectionStrategy inter;
    const GameResult r = PlayGame(inter, s, cfg, seed);
    EXPECT_TRUE(r.win) << seed;
    EXPECT_EQ(r.max_message_bits, 56u * 12u);
    EXPECT_EQ(r.message_bits[0], 56u * 12u);
    for (size_t i = 1; i < r.message_bits.size(); ++i) EXPECT_EQ(r.message_bits[i], 8u * 12u);
    for (size_t i = 1; i < r.subsets.size(); ++i) {
      for (UserId u : s.heavy) {
        EXPECT_FALSE(std::binary_search(r.subsets[i].begin(), r.subsets[i].end(), u));
      }
    }
    for (const auto& [u, c] : r.heavy_appearances) EXPECT_LE(c, 1u);
  }
}

GameResult WithPresentation(const std::string& name, uint64_t presentation) {
  const InstanceParams p = SmallParams();
  const InstanceSupport s = SampleSupport(p, 8);
  auto strategy = MakeSimpleStrategy(name, s);
  return PlayGame(*strategy, s, MakeGameConfig(p, 0.1, 0.3), 8, presentation);
}

void ExpectSameResult(const GameResult& a, const GameResult& b) {
  EXPECT_EQ(a.subsets, b.subsets);
  EXPECT_EQ(a.heavy_appearances, b.heavy_appearances);
  EXPECT_EQ(a.message_bits, b.message_bits);
  EXPECT_EQ(a.win, b.win);
}

TEST(GameTest, PresentationOrderInvariance) {
  for (const std::string name : {"random", "intersection", "oracle", "all"}) {
    ExpectSameResult(WithPresentation(name, 0), WithPresentation(name, 99));
  }
  EXPECT_THROW(MakeSimpleStrategy("psychic", SampleSupport(SmallParams(), 0)),
               std::invalid_argument);
}

struct ReductionSetup {
  InstanceParams params = SmallParams();
  EstimatorContext ctx;
  EstimatorSpec spec;
  AttackConfig attack;

  ReductionSetup(const std::string& name, uint64_t seed) {
    ctx.seed = seed;
    ctx.stream_length = params.T;
    ctx.w = params.w;
    ctx.num_users = params.N;
    spec.name = name;
    attack = DefaultAttackConfig(params.w, params.T);
  }
  EstimatorFactory Factory() const {
    return [this] { return MakeEstimator(spec, ctx); };
  }
};

TEST(ReductionTest, MatchesMonolithicRun) {
  for (uint64_t seed : {2, 6}) {
    ReductionSetup setup("capped_dp", seed);
    const InstanceParams& p = setup.params;
    GameConfig cfg = MakeGameConfig(p, 0.0, FlaggingEps2(p.P, p.k));
    cfg.stop_at_first_violation = false;

    ReductionStrategy reduction(p, setup.Factory(), setup.attack);
    const InstanceSupport support = SampleSupport(p, seed);
    const GameResult game = PlayGame(reduction, support, cfg, seed, 77);

    auto monolithic = setup.Factory()();
    const InstanceRun run = RunInstance(*monolithic, p, seed);
    EXPECT_EQ(reduction.transcripts(), run.phases);
    const AttackReport report =
        RunRoundingAttack(run.phases, run.support.heavy, setup.attack, seed);
    ASSERT_EQ(game.subsets.size(), p.P);
    for (uint32_t i = 0; i < p.P; ++i) EXPECT_EQ(game.subsets[i], report.phases[i].subset);
    for (UserId u : support.heavy) {
      EXPECT_EQ(game.heavy_appearances.at(u), report.appearances.at(u));
    }
    EXPECT_GT(game.max_message_bits, 0u);
  }
}

TEST(ReductionTest, ExactCounterMessageSize) {
  ReductionSetup setup("exact", 3);
  const InstanceParams& p = setup.params;
  GameConfig cfg = MakeGameConfig(p, 0.0, 0.3);
  cfg.stop_at_first_violation = false;
  ReductionStrategy reduction(p, setup.Factory(), setup.attack);
  const GameResult game = PlayGame(reduction, SampleSupport(p, 3), cfg, 3);
  // Every phase ends with an all-zero frequency vector.
  auto fresh = setup.Factory()();
  EXPECT_EQ(game.max_message_bits, fresh->Save().bit_length());
  EXPECT_LE(game.max_message_bits, 8u * (8 + 12 * p.group_size()));
}

TEST(ReductionTest, AbortsWhenRoundedSetIsSmall) {
  ReductionSetup setup("constant", 1);
  setup.spec.params["value"] = 0;
  const InstanceParams& p = setup.params;
  // With all scores zero every user is a fair coin, so a requirement near
  // the whole set cannot be met.
  const GameConfig cfg = MakeGameConfig(p, 0.45, 0.3);
  ReductionStrategy reduction(p, setup.Factory(), setup.attack);
  const GameResult game = PlayGame(reduction, SampleSupport(p, 1), cfg, 1);
  EXPECT_FALSE(game.win);
  ASSERT_TRUE(game.abort_reason.has_value());
  EXPECT_NE(game.abort_reason->find("rounded subset smaller"), std::string::npos);
  EXPECT_EQ(game.subsets.size(), 1u);
}

}  // namespace
}  // namespace dpspace
