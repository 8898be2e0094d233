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

// Experiment configuration and subcommand dispatch for the dpspace tool.
//
// Settings are resolved in this order: built-in defaults, the --config
// file, the --profile preset, then individual flags. Every result file
// embeds the resolved configuration with its single seed; passing such a
// file back through --config reproduces it.

#ifndef DPSPACE_TOOLS_CLI_H_
#define DPSPACE_TOOLS_CLI_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace dpspace::cli {

struct InstanceConfig {
  uint32_t w = 64;
  uint32_t k = 8;
  uint32_t h = 16;
  uint32_t P = 64;
  uint32_t N = 0;  // 0 selects k + 3hP
  std::string prior = "uniform";
};

struct EstimatorConfig {
  std::string name = "exact";
  std::map<std::string, double> params;
};

struct GameSettings {
  std::string strategy = "random";
  std::optional<double> eps1;  // resolved before running
  std::optional<double> eps2;
  std::optional<uint64_t> message_limit_bits;
  bool stop_at_first_violation = true;
};

struct FpSettings {
  std::string estimator = "exact_mean";
  double param = 0.0;
  uint32_t n = 50;
  uint64_t trials = 1000000;
  std::string prior = "uniform";
};

struct BoundsSettings {
  std::string formula = "corollary";
  std::map<std::string, double> params;
};

struct ExperimentConfig {
  std::string command;
  std::string problem = "countdistinct";
  std::string profile = "small";
  InstanceConfig instance;
  EstimatorConfig estimator;
  std::optional<double> beta;  // attack failure probability; 1/T^2 if unset
  GameSettings game;
  FpSettings fp;
  BoundsSettings bounds;
  std::vector<std::string> bench_estimators = {"exact", "kmv", "capped_dp"};
  std::vector<uint64_t> seeds = {1};
};

nlohmann::json ToJson(const ExperimentConfig& config);
// Strict: unknown keys and wrong types raise std::invalid_argument naming
// the field. Accepts a result file too (reads its "config" member).
ExperimentConfig FromJson(const nlohmann::json& j);

// Instance presets: "small" (P = 64) and "large" (P = 512). Returns nullopt
// for unknown names and for "theorem", which only sets bound parameters.
std::optional<InstanceConfig> ProfileInstance(const std::string& name);
bool IsKnownProfile(const std::string& name);
// alpha of the "theorem" preset.
inline constexpr double kTheoremAlpha = 1.0 / 36.0;

// Entry point. Returns the process exit status: 0 on success, 2 on any
// error, after writing {"error": {"field": ..., "message": ...}} to `err`.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpspace::cli

#endif  // DPSPACE_TOOLS_CLI_H_
