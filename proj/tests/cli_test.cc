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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "dpspace/bounds.h"
#include "json.hpp"

namespace dpspace::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult RunCli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"dpspace"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int status = Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpspace_cli_" + std::string(::testing::UnitTest::GetInstance()
                                             ->current_test_info()
                                             ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Dir(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

TEST_F(CliTest, CorollaryExponent) {
  const CliResult r =
      RunCli({"bounds", "--formula", "corollary", "--param", "alpha=0.05", "--out", Dir("b")});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(Slurp(Dir("b") + "/bounds.json"));
  EXPECT_NEAR(j.at("exponent").get<double>(), 0.13333333333333, 1e-12);
  EXPECT_EQ(j.at("config").at("command"), "bounds");
}

TEST_F(CliTest, TheoremProfileUsesPresetAlpha) {
  const CliResult r = RunCli({"bounds", "--profile", "theorem", "--out", Dir("t")});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(Slurp(Dir("t") + "/bounds.json"));
  EXPECT_NEAR(j.at("exponent").get<double>(), 1.0 / 3 - 4 * kTheoremAlpha, 1e-12);
}

TEST_F(CliTest, GenInstanceIsDeterministic) {
  ASSERT_EQ(RunCli({"gen-instance", "--profile", "small", "--seed", "7", "--out", Dir("a")}).status, 0);
  ASSERT_EQ(RunCli({"gen-instance", "--profile", "small", "--seed", "7", "--out", Dir("b")}).status, 0);
  const std::string a = Slurp(Dir("a") + "/stream_seed7.txt");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, Slurp(Dir("b") + "/stream_seed7.txt"));
  EXPECT_EQ(Slurp(Dir("a") + "/instance_seed7.json"), Slurp(Dir("b") + "/instance_seed7.json"));
  EXPECT_EQ(Slurp(Dir("a") + "/summary.csv"),
            "seed,stream_length,occurrency_bounded\n7,458752,true\n");
}

TEST_F(CliTest, UnknownEstimatorNamesTheField) {
  const CliResult r = RunCli({"run-attack", "--estimator", "nope", "--out", Dir("x")});
  EXPECT_NE(r.status, 0);
  const json e = json::parse(r.err);
  EXPECT_EQ(e.at("error").at("field"), "estimator.name");
}

TEST_F(CliTest, InvalidInputsReportErrors) {
  for (const auto& bad : std::vector<std::vector<std::string>>{
           {"gen-instance", "--profile", "medium"},
           {"gen-instance", "--k", "4"},
           {"play-game", "--strategy", "psychic"},
           {"bounds", "--formula", "nonsense"},
           {"gen-instance", "--seeds", "0"},
           {"teleport"}}) {
    std::vector<const char*> argv = {"dpspace"};
    for (const auto& s : bad) argv.push_back(s.c_str());
    const std::string out_flag = "--out";
    const std::string out_dir = Dir("bad");
    argv.push_back(out_flag.c_str());
    argv.push_back(out_dir.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int status = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
    EXPECT_EQ(status, 2) << bad[0] << " " << (bad.size() > 1 ? bad[1] : "");
    const json e = json::parse(err.str());
    EXPECT_TRUE(e.at("error").contains("field"));
    EXPECT_TRUE(e.at("error").contains("message"));
  }
}

TEST_F(CliTest, ProcessExitStatus) {
  const std::string cmd = std::string(DPSPACE_TOOL_PATH) +
                          " run-attack --estimator nope --out " + Dir("p") + " 2>" +
                          Dir("err.txt");
  const int raw = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(raw));
  EXPECT_EQ(WEXITSTATUS(raw), 2);
  EXPECT_NE(Slurp(Dir("err.txt")).find("estimator.name"), std::string::npos);
}

TEST_F(CliTest, Profiles) {
  const auto small = ProfileInstance("small");
  const auto large = ProfileInstance("large");
  ASSERT_TRUE(small && large);
  EXPECT_EQ(small->P, 64u);
  EXPECT_EQ(large->P, 512u);
  EXPECT_EQ(2ull * small->P * small->w * (3 * small->h + small->k), 458752u);
  EXPECT_EQ(2ull * large->P * large->w * (3 * large->h + large->k), 3670016u);
  EXPECT_FALSE(ProfileInstance("theorem").has_value());
  EXPECT_TRUE(IsKnownProfile("theorem"));
  EXPECT_FALSE(IsKnownProfile("medium"));
  EXPECT_NO_THROW(CorollaryProfile(kTheoremAlpha));
}

TEST_F(CliTest, ConfigRoundTripIsStrict) {
  ExperimentConfig c;
  c.command = "play-game";
  c.seeds = {4, 5};
  c.game.eps1 = 0.2;
  c.estimator.params["cap"] = 12;
  const json j = ToJson(c);
  EXPECT_EQ(ToJson(FromJson(j)), j);
  json extra = j;
  extra["colour"] = "blue";
  EXPECT_THROW(FromJson(extra), std::invalid_argument);
  json wrong = j;
  wrong["instance"]["w"] = "sixty-four";
  try {
    FromJson(wrong);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("instance.w"), std::string::npos);
  }
}

TEST_F(CliTest, ReplayFromEmbeddedConfig) {
  ASSERT_EQ(RunCli({"run-attack", "--estimator", "capped_dp", "--seed", "3", "--out", Dir("r1")}).status, 0);
  const std::string first = Slurp(Dir("r1") + "/attack_seed3.json");
  ASSERT_EQ(RunCli({"run-attack", "--config", Dir("r1") + "/attack_seed3.json", "--out", Dir("r2")}).status, 0);
  EXPECT_EQ(Slurp(Dir("r2") + "/attack_seed3.json"), first);
  EXPECT_EQ(Slurp(Dir("r2") + "/appearances_seed3.csv"), Slurp(Dir("r1") + "/appearances_seed3.csv"));
}

TEST_F(CliTest, PlayGameIntersectionOverSeeds) {
  const CliResult r = RunCli({"play-game", "--strategy", "intersection", "--seed", "10",
                              "--seeds", "3", "--out", Dir("g")});
  ASSERT_EQ(r.status, 0) << r.err;
  for (int s = 10; s < 13; ++s) {
    const json g = json::parse(Slurp(Dir("g") + "/game_seed" + std::to_string(s) + ".json"));
    EXPECT_EQ(g.at("max_message_bits"), 672);
    EXPECT_EQ(g.at("win"), true);
  }
  EXPECT_NE(Slurp(Dir("g") + "/aggregate.csv").find("intersection,3,1"), std::string::npos);
}

TEST_F(CliTest, VerifyFpAndBench) {
  CliResult r = RunCli({"verify-fp", "--estimator", "threshold", "--prior", "logistic",
                        "--n", "20", "--trials", "200000", "--out", Dir("fp")});
  ASSERT_EQ(r.status, 0) << r.err;
  const json fp = json::parse(Slurp(Dir("fp") + "/fp_seed1.json"));
  EXPECT_GT(fp.at("estimate").get<double>(), 0.0);
  r = RunCli({"bench-algo", "--profile", "small", "--out", Dir("bench")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(Dir("bench") + "/bench_seed1.json"));
}

TEST_F(CliTest, ExtensionProblems) {
  for (const std::string problem : {"quantile", "maxselect"}) {
    const CliResult r = RunCli({"run-attack", "--problem", problem, "--out", Dir(problem)});
    ASSERT_EQ(r.status, 0) << problem << r.err;
    const json j = json::parse(Slurp(Dir(problem) + "/attack_seed1.json"));
    EXPECT_EQ(j.at("config").at("problem"), problem);
  }
}

}  // namespace
}  // namespace dpspace::cli
