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

#include "cli.h"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "CLI11.hpp"
#include "dpspace/algorithms.h"
#include "dpspace/attack.h"
#include "dpspace/bounds.h"
#include "dpspace/core_model.h"
#include "dpspace/extensions.h"
#include "dpspace/fplemma.h"
#include "dpspace/game.h"
#include "dpspace/hard_instance.h"
#include "dpspace/stream_io.h"

namespace dpspace::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// ------------------------------------------------------------ config I/O

void CheckKeys(const json& obj, const std::string& where,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw std::invalid_argument((where.empty() ? "config" : where) +
                                ": must be an object");
  }
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw std::invalid_argument((where.empty() ? "" : where + ".") + item.key() +
                                  ": unknown field");
    }
  }
}

std::string Path(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

template <typename T>
void Read(const json& obj, const std::string& where, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw std::invalid_argument(Path(where, key) + ": must be a boolean");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw std::invalid_argument(Path(where, key) + ": must be a non-negative integer");
    }
    if (v.get<uint64_t>() > std::numeric_limits<T>::max()) {
      throw std::invalid_argument(Path(where, key) + ": too large");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw std::invalid_argument(Path(where, key) + ": must be a number");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw std::invalid_argument(Path(where, key) + ": must be a string");
  }
  dst = v.get<T>();
}

template <typename T>
void ReadOptional(const json& obj, const std::string& where, const char* key,
                  std::optional<T>& dst) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    dst.reset();
    return;
  }
  T v{};
  Read(obj, where, key, v);
  dst = v;
}

void ReadParams(const json& obj, const std::string& where, const char* key,
                std::map<std::string, double>& dst) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_object()) throw std::invalid_argument(Path(where, key) + ": must be an object");
  dst.clear();
  for (const auto& item : v.items()) {
    if (!item.value().is_number()) {
      throw std::invalid_argument(Path(where, key) + "." + item.key() +
                                  ": must be a number");
    }
    dst[item.key()] = item.value().get<double>();
  }
}

template <typename T>
json OptionalJson(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// ------------------------------------------------------------ small helpers

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string CsvLine(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += CsvField(fields[i]);
  }
  return line + "\n";
}

std::string Csv(const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  std::string s = CsvLine(header);
  for (const auto& r : rows) s += CsvLine(r);
  return s;
}

// Writes to a temporary sibling and renames it into place.
void WriteAtomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("out: cannot write " + tmp.string());
    f << contents;
    if (!f.flush()) throw std::runtime_error("out: write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("out: cannot rename into " + path.string());
}

std::map<std::string, double> ParseKeyValues(const std::vector<std::string>& items,
                                             const char* field) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument(std::string(field) + ": expected key=value, got '" +
                                  item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') {
      throw std::invalid_argument(std::string(field) + "." + key + ": not a number");
    }
    out[key] = v;
  }
  return out;
}

// ------------------------------------------------------------ resolution

struct Resolved {
  ExperimentConfig config;
  Problem problem = Problem::kCountDistinct;
  InstanceParams params;
};

Resolved ResolveInstance(ExperimentConfig config) {
  Resolved r;
  r.problem = ParseProblem(config.problem);
  if (r.problem != Problem::kCountDistinct) {
    config.instance.prior = "logistic";
    if (config.estimator.name == "exact") {
      config.estimator.name =
          r.problem == Problem::kMaxSelect ? "exact_maxselect" : "exact_quantile";
    }
  }
  const InstanceConfig& ic = config.instance;
  r.params = DeriveParams(ic.w, ic.k, ic.h, ic.P, ParsePrior(ic.prior), ic.N);
  config.instance.N = r.params.N;
  if (config.seeds.empty()) throw std::invalid_argument("seeds: must be non-empty");
  r.config = std::move(config);
  return r;
}

json SeedConfig(const ExperimentConfig& config, uint64_t seed) {
  ExperimentConfig c = config;
  c.seeds = {seed};
  return ToJson(c);
}

EstimatorContext ContextFor(const Resolved& r, uint64_t seed,
                            const InstanceSupport& support) {
  EstimatorContext ctx;
  ctx.seed = seed;
  ctx.stream_length = r.params.T;
  ctx.num_users = r.params.N;
  ctx.w = r.params.w;
  ctx.heavy = support.heavy;
  return ctx;
}

EstimatorSpec SpecOf(const ExperimentConfig& c) {
  return EstimatorSpec{c.estimator.name, c.estimator.params};
}

// Runs the instance (or its gadget variant) and returns the transcripts.
struct InstanceOutcome {
  InstanceSupport support;
  std::vector<PhaseTranscript> phases;
  std::vector<std::vector<UserId>> public_halves;
};

InstanceOutcome RunFor(const Resolved& r, Estimator& estimator, uint64_t seed,
                       Stream* sink) {
  InstanceOutcome o;
  if (r.problem == Problem::kCountDistinct) {
    InstanceRun run = RunInstance(estimator, r.params, seed, sink);
    o.support = std::move(run.support);
    o.phases = std::move(run.phases);
  } else {
    ExtensionRun run = RunExtensionInstance(r.problem, estimator, r.params, seed, sink);
    o.support = std::move(run.support);
    o.phases = std::move(run.phases);
    o.public_halves = std::move(run.public_halves);
  }
  return o;
}

AttackConfig AttackFor(const Resolved& r) {
  return r.config.beta ? AttackConfigForBeta(r.params.w, *r.config.beta)
                       : DefaultAttackConfig(r.params.w, r.params.T);
}

// ------------------------------------------------------------ seed driver

struct SeedOutput {
  std::vector<std::vector<std::string>> rows;
};

int WorkerCount() {
  const char* env = std::getenv("DPSPACE_WORKERS");
  if (env == nullptr || *env == '\0') return omp_get_max_threads();
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) {
    throw std::invalid_argument("DPSPACE_WORKERS: must be an integer in [1, 4096]");
  }
  return static_cast<int>(v);
}

std::vector<SeedOutput> ForEachSeed(const std::vector<uint64_t>& seeds,
                                    const std::function<SeedOutput(uint64_t)>& fn) {
  std::vector<SeedOutput> outputs(seeds.size());
  std::exception_ptr failure;
  const int workers = WorkerCount();
  const auto count = static_cast<int64_t>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int64_t i = 0; i < count; ++i) {
    try {
      outputs[i] = fn(seeds[i]);
    } catch (...) {
#pragma omp critical(dpspace_cli_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return outputs;
}

std::vector<std::vector<std::string>> Flatten(const std::vector<SeedOutput>& outs) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& o : outs) rows.insert(rows.end(), o.rows.begin(), o.rows.end());
  return rows;
}

std::string SeedFile(const char* stem, uint64_t seed, const char* ext) {
  return std::string(stem) + "_seed" + std::to_string(seed) + ext;
}

json SupportJson(const InstanceSupport& s) {
  return json{{"heavy", s.heavy}, {"light", s.light}};
}

// ------------------------------------------------------------ gen-instance

json GenInstance(const ExperimentConfig& base, const fs::path& out) {
  Resolved r = ResolveInstance(base);
  r.config.estimator = EstimatorConfig{};
  r.config.estimator.name = r.problem == Problem::kCountDistinct ? "exact"
                            : r.problem == Problem::kMaxSelect   ? "exact_maxselect"
                                                                 : "exact_quantile";
  auto outputs = ForEachSeed(r.config.seeds, [&](uint64_t seed) {
    const InstanceSupport support = SampleSupport(r.params, seed);
    auto estimator = MakeEstimator(SpecOf(r.config), ContextFor(r, seed, support));
    Stream stream;
    InstanceOutcome o = RunFor(r, *estimator, seed, &stream);

    std::ostringstream text;
    WriteStream(text, stream);
    WriteAtomic(out / SeedFile("stream", seed, ".txt"), text.str());

    const bool bounded = CheckOccurrencyBounded(stream.updates, 2ULL * r.params.w, r.params.k);
    json support_json = SupportJson(o.support);
    if (!o.public_halves.empty()) support_json["public_halves"] = o.public_halves;
    json result{{"config", SeedConfig(r.config, seed)},
                {"seed", seed},
                {"T", r.params.T},
                {"stream_length", stream.size()},
                {"occurrency_bounded_2w_k", bounded},
                {"support", support_json}};
    WriteAtomic(out / SeedFile("instance", seed, ".json"), result.dump(2) + "\n");
    return SeedOutput{{{std::to_string(seed), std::to_string(stream.size()),
                        bounded ? "true" : "false"}}};
  });
  WriteAtomic(out / "summary.csv",
              Csv({"seed", "stream_length", "occurrency_bounded"}, Flatten(outputs)));
  return json{{"command", "gen-instance"}, {"out", out.string()},
              {"seeds", r.config.seeds.size()}, {"T", r.params.T}};
}

// ------------------------------------------------------------ run-attack

json RunAttack(const ExperimentConfig& base, const fs::path& out) {
  const Resolved r = ResolveInstance(base);
  const AttackConfig attack = AttackFor(r);
  const double w20 = r.params.w / 20.0;
  auto outputs = ForEachSeed(r.config.seeds, [&](uint64_t seed) {
    const InstanceSupport support = SampleSupport(r.params, seed);
    auto estimator = MakeEstimator(SpecOf(r.config), ContextFor(r, seed, support));
    const InstanceOutcome o = RunFor(r, *estimator, seed, nullptr);
    const AttackReport report = RunRoundingAttack(o.phases, o.support.heavy, attack, seed);

    json phases = json::array();
    double total = 0.0;
    uint32_t above = 0;
    for (size_t i = 0; i < o.phases.size(); ++i) {
      const PhaseRounding& pr = report.phases[i];
      total += pr.total_score;
      above += pr.total_score > w20 ? 1 : 0;
      phases.push_back({{"phase", o.phases[i].phase},
                        {"users", o.phases[i].users},
                        {"scores", pr.scores},
                        {"clipped", pr.clipped},
                        {"subset", pr.subset},
                        {"total_score", pr.total_score}});
    }
    uint32_t max_heavy = 0;
    double max_xi = 0.0;
    json heavy = json::array();
    for (UserId u : o.support.heavy) {
      const uint32_t a = report.appearances.at(u);
      const double xi = report.heavy_totals.at(u);
      max_heavy = std::max(max_heavy, a);
      max_xi = std::max(max_xi, std::fabs(xi));
      heavy.push_back({{"user", u}, {"appearances", a}, {"xi", xi}});
    }
    json result{{"config", SeedConfig(r.config, seed)},
                {"seed", seed},
                {"beta", attack.beta},
                {"radius", attack.radius},
                {"measured_eps1", report.measured_eps1},
                {"flag_eps2", report.flag_eps2},
                {"flagged", report.flagged},
                {"heavy", heavy},
                {"phases", phases}};
    WriteAtomic(out / SeedFile("attack", seed, ".json"), result.dump(1) + "\n");

    std::vector<std::vector<std::string>> users;
    for (const auto& [u, a] : report.appearances) {
      auto it = report.heavy_totals.find(u);
      const bool is_heavy = it != report.heavy_totals.end();
      users.push_back({std::to_string(u), is_heavy ? "1" : "0", std::to_string(a),
                       is_heavy ? Num(it->second) : ""});
    }
    WriteAtomic(out / SeedFile("appearances", seed, ".csv"),
                Csv({"user", "heavy", "appearances", "xi"}, users));

    const double phases_n = static_cast<double>(o.phases.size());
    return SeedOutput{{{std::to_string(seed), Num(total / phases_n),
                        Num(above / phases_n), Num(report.measured_eps1),
                        Num(report.flag_eps2), std::to_string(max_heavy),
                        std::to_string(report.flagged.size()), Num(max_xi)}}};
  });
  WriteAtomic(out / "summary.csv",
              Csv({"seed", "mean_phase_total", "frac_phases_above_w_over_20",
                   "measured_eps1", "flag_eps2", "max_heavy_appearances",
                   "flagged_heavy", "max_abs_xi"},
                  Flatten(outputs)));
  return json{{"command", "run-attack"}, {"out", out.string()},
              {"seeds", r.config.seeds.size()}, {"radius", attack.radius}};
}

// ------------------------------------------------------------ play-game

json PlayGameCommand(const ExperimentConfig& base, const fs::path& out) {
  Resolved r = ResolveInstance(base);
  if (r.problem != Problem::kCountDistinct) {
    throw std::invalid_argument("problem: play-game supports countdistinct only");
  }
  GameSettings& gs = r.config.game;
  const bool reduction = gs.strategy == "reduction";
  if (!reduction) MakeSimpleStrategy(gs.strategy, InstanceSupport{});  // validates
  const AttackConfig attack = AttackFor(r);
  if (reduction) {
    const ReductionEps e = ReductionEpsilons(r.params.w, r.params.h, r.params.k,
                                             r.params.P, attack.beta);
    if (!gs.eps1) gs.eps1 = e.eps1;
    if (!gs.eps2) gs.eps2 = e.eps2;
  } else {
    if (!gs.eps1) gs.eps1 = 0.1;
    if (!gs.eps2) gs.eps2 = FlaggingEps2(r.params.P, r.params.k);
  }
  GameConfig game = MakeGameConfig(r.params, *gs.eps1, *gs.eps2);
  game.message_limit_bits = gs.message_limit_bits;
  game.stop_at_first_violation = gs.stop_at_first_violation;

  auto outputs = ForEachSeed(r.config.seeds, [&](uint64_t seed) {
    const InstanceSupport support = SampleSupport(r.params, seed);
    std::unique_ptr<Strategy> strategy;
    if (reduction) {
      const EstimatorSpec spec = SpecOf(r.config);
      const EstimatorContext ctx = ContextFor(r, seed, support);
      MakeEstimator(spec, ctx);  // fail fast on a bad spec
      strategy = std::make_unique<ReductionStrategy>(
          r.params, [spec, ctx] { return MakeEstimator(spec, ctx); }, attack);
    } else {
      strategy = MakeSimpleStrategy(gs.strategy, support);
    }
    const GameResult g = PlayGame(*strategy, support, game, seed);
    json heavy = json::array();
    for (const auto& [u, c] : g.heavy_appearances) {
      heavy.push_back({{"user", u}, {"appearances", c}});
    }
    json result{{"config", SeedConfig(r.config, seed)},
                {"seed", seed},
                {"strategy", strategy->name()},
                {"eps1", game.eps1},
                {"eps2", game.eps2},
                {"required_size", game.RequiredSize()},
                {"appearance_limit", game.AppearanceLimit()},
                {"win", g.win},
                {"abort_reason", OptionalJson(g.abort_reason)},
                {"abort_player", OptionalJson(g.abort_player)},
                {"max_message_bits", g.max_message_bits},
                {"message_bits", g.message_bits},
                {"heavy_appearances", heavy},
                {"subsets", g.subsets}};
    WriteAtomic(out / SeedFile("game", seed, ".json"), result.dump(1) + "\n");
    return SeedOutput{{{std::to_string(seed), g.win ? "1" : "0",
                        std::to_string(g.max_message_bits), g.abort_reason.value_or("")}}};
  });

  const auto rows = Flatten(outputs);
  double wins = 0.0;
  double bits = 0.0;
  for (const auto& row : rows) {
    wins += row[1] == "1" ? 1.0 : 0.0;
    bits += std::stod(row[2]);
  }
  const double n = static_cast<double>(rows.size());
  WriteAtomic(out / "summary.csv",
              Csv({"seed", "win", "max_message_bits", "abort_reason"}, rows));
  WriteAtomic(out / "aggregate.csv",
              Csv({"strategy", "seeds", "win_rate", "mean_max_message_bits", "eps1", "eps2"},
                  {{gs.strategy, std::to_string(rows.size()), Num(wins / n), Num(bits / n),
                    Num(game.eps1), Num(game.eps2)}}));
  return json{{"command", "play-game"}, {"out", out.string()},
              {"strategy", gs.strategy}, {"win_rate", wins / n},
              {"mean_max_message_bits", bits / n}};
}

// ------------------------------------------------------------ bounds

double Param(const std::map<std::string, double>& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) {
    throw std::invalid_argument(std::string("bounds.params.") + key + ": required");
  }
  return it->second;
}

double ParamOr(const std::map<std::string, double>& p, const char* key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

uint64_t CountParam(const std::map<std::string, double>& p, const char* key) {
  const double v = Param(p, key);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
    throw std::invalid_argument(std::string("bounds.params.") + key +
                                ": must be a non-negative integer");
  }
  return static_cast<uint64_t>(v);
}

json BoundJson(const BoundValue& v) {
  return json{{"main", v.main}, {"slack", v.slack}, {"value", v.value}};
}

json TheoremJson(const TheoremValue& v, const ExponentProfile& p) {
  return json{{"gamma_w", p.gamma_w},   {"gamma_k", p.gamma_k},
              {"gamma_h", p.gamma_h},   {"exponent", v.exponent},
              {"value", v.value},       {"w", v.w},
              {"k", v.k},               {"h", v.h},
              {"identity_rel_error", v.identity_rel_error}};
}

json EvaluateBounds(const BoundsSettings& b) {
  const auto& p = b.params;
  const std::string& f = b.formula;
  json j{{"formula", f}};
  if (f == "log_binom") {
    j["value_nats"] = LogBinom(Param(p, "n"), Param(p, "m"));
  } else if (f == "comm_exact") {
    const uint64_t h = CountParam(p, "h");
    const uint64_t k = CountParam(p, "k");
    const double e1 = Param(p, "eps1");
    const double e2 = Param(p, "eps2");
    const CommForm form =
        ParamOr(p, "literal", 0.0) != 0.0 ? CommForm::kLiteral : CommForm::kConsistent;
    j.update(BoundJson(CommLowerBoundExact(h, k, e1, e2, ParamOr(p, "slack", 1.0), form)));
    j["form"] = form == CommForm::kLiteral ? "literal" : "consistent";
    j["in_stirling_region"] = InStirlingRegion(h, k, e1, e2);
  } else if (f == "comm_stirling") {
    const uint64_t h = CountParam(p, "h");
    const uint64_t k = CountParam(p, "k");
    const double e1 = Param(p, "eps1");
    const double e2 = Param(p, "eps2");
    j.update(BoundJson(CommLowerBoundStirling(h, k, e1, e2, ParamOr(p, "slack", 1.0))));
    j["in_stirling_region"] = true;
  } else if (f == "reduction_eps") {
    const auto w = static_cast<uint32_t>(CountParam(p, "w"));
    const auto h = static_cast<uint32_t>(CountParam(p, "h"));
    const auto k = static_cast<uint32_t>(CountParam(p, "k"));
    const auto P = static_cast<uint32_t>(CountParam(p, "P"));
    double beta = ParamOr(p, "beta", 0.0);
    if (beta == 0.0) {
      const double T = 2.0 * P * w * (3.0 * h + k);
      beta = 1.0 / (T * T);
    }
    const ReductionEps e = ReductionEpsilons(w, h, k, P, beta);
    j.update(json{{"beta", beta}, {"radius", e.radius}, {"eps1", e.eps1},
                  {"eps2", e.eps2}, {"ratio", e.eps1 / e.eps2},
                  {"winning_regime", e.winning_regime()}});
  } else if (f == "theorem") {
    const ExponentProfile prof{Param(p, "gamma_w"), Param(p, "gamma_k"),
                               Param(p, "gamma_h")};
    j.update(TheoremJson(TheoremBound(Param(p, "T"), prof), prof));
  } else if (f == "corollary") {
    const double alpha = ParamOr(p, "alpha", kTheoremAlpha);
    if (!(alpha > 0.0 && alpha < 1.0 / 9.0)) {
      throw std::invalid_argument("bounds.params.alpha: must lie in (0, 1/9)");
    }
    const ExponentProfile prof = CorollaryProfile(alpha);
    j["alpha"] = alpha;
    j.update(TheoremJson(TheoremBound(ParamOr(p, "T", 1e6), prof), prof));
  } else if (f == "encoding") {
    j["value"] = EncodingBound(Param(p, "N"), Param(p, "k"), Param(p, "k_prime"),
                               Param(p, "Z"));
  } else {
    throw std::invalid_argument("bounds.formula: unknown formula '" + f + "'");
  }
  j["params"] = p;
  return j;
}

json BoundsCommand(const ExperimentConfig& config, const fs::path& out) {
  json result = EvaluateBounds(config.bounds);
  result["config"] = ToJson(config);
  WriteAtomic(out / "bounds.json", result.dump(2) + "\n");
  return result;
}

// ------------------------------------------------------------ verify-fp

json VerifyFp(const ExperimentConfig& config, const fs::path& out) {
  const FpSettings& fp = config.fp;
  if (config.seeds.empty()) throw std::invalid_argument("seeds: must be non-empty");
  const auto f = MakeMeanEstimator(fp.estimator, fp.param);
  const Prior prior = ParsePrior(fp.prior);
  if (fp.n < 2) throw std::invalid_argument("fp.n: must be >= 2");
  const bool verified = SatisfiesDeclaredClass(*f, fp.n);
  const bool floor_check =
      f->declared_class() == AccuracyClass::kTwoFifths && prior == Prior::kUniform;
  json last;
  auto outputs = ForEachSeed(config.seeds, [&](uint64_t seed) {
    const CorrelationEstimate e = McCorrelation(*f, fp.n, fp.trials, prior, seed);
    const bool pass = verified && (floor_check ? e.estimate >= 0.1 - e.half_width
                                               : e.lower() > 0.0);
    ExperimentConfig c = config;
    c.seeds = {seed};
    json result{{"config", ToJson(c)},
                {"seed", seed},
                {"estimator", f->name()},
                {"declared_class", AccuracyClassName(f->declared_class())},
                {"class_verified", verified},
                {"criterion", floor_check ? "estimate >= 1/10 - half_width"
                                          : "lower confidence bound > 0"},
                {"estimate", e.estimate},
                {"half_width_99", e.half_width},
                {"stddev", e.stddev},
                {"trials", e.trials},
                {"pass", pass}};
    WriteAtomic(out / SeedFile("fp", seed, ".json"), result.dump(2) + "\n");
    return SeedOutput{{{std::to_string(seed), Num(e.estimate), Num(e.half_width),
                        pass ? "1" : "0"}}};
  });
  const auto rows = Flatten(outputs);
  WriteAtomic(out / "summary.csv",
              Csv({"seed", "estimate", "half_width_99", "pass"}, rows));
  bool all = true;
  for (const auto& row : rows) all = all && row[3] == "1";
  return json{{"command", "verify-fp"}, {"estimator", f->name()},
              {"class_verified", verified}, {"seeds", rows.size()},
              {"estimate_first_seed", std::stod(rows.front()[1])}, {"pass", all}};
}

// ------------------------------------------------------------ bench-algo

json BenchAlgo(const ExperimentConfig& base, const fs::path& out) {
  const Resolved r = ResolveInstance(base);
  if (r.problem != Problem::kCountDistinct) {
    throw std::invalid_argument("problem: bench-algo supports countdistinct only");
  }
  auto outputs = ForEachSeed(r.config.seeds, [&](uint64_t seed) {
    const InstanceSupport support = SampleSupport(r.params, seed);
    SeedOutput so;
    json per = json::array();
    for (const auto& name : r.config.bench_estimators) {
      EstimatorSpec spec{name, {}};
      if (name == r.config.estimator.name) spec.params = r.config.estimator.params;
      if (name == "echo_leaky" && spec.params.empty()) {
        spec.params = {{"target_heavy_index", 0}, {"eta", double(r.params.h)}};
      }
      auto est = MakeEstimator(spec, ContextFor(r, seed, support));
      uint64_t max_bits = 0;
      double abs_err = 0.0;
      double max_err = 0.0;
      uint64_t queries = 0;
      const auto start = std::chrono::steady_clock::now();
      for (uint32_t i = 0; i < r.params.P; ++i) {
        Rng rng = PhaseRng(seed, i);
        const PhaseTranscript tr = RunPhase(*est, support, r.params, i, rng);
        max_bits = std::max(max_bits, est->Save().bit_length());
        for (size_t j = 0; j < tr.repetitions(); ++j) {
          double ones = 0.0;
          for (size_t x = 0; x < tr.users.size(); ++x) ones += tr.bit(j, x);
          const double err = std::fabs(tr.raw[j] - ones);
          abs_err += err;
          max_err = std::max(max_err, err);
          ++queries;
        }
      }
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const double mean_err = abs_err / static_cast<double>(queries);
      per.push_back({{"estimator", name}, {"seconds", secs},
                     {"updates_per_second", r.params.T / secs},
                     {"max_snapshot_bits", max_bits}, {"mean_abs_error", mean_err},
                     {"max_abs_error", max_err}});
      so.rows.push_back({std::to_string(seed), name, Num(secs), Num(r.params.T / secs),
                         std::to_string(max_bits), Num(mean_err), Num(max_err)});
    }
    json result{{"config", SeedConfig(r.config, seed)}, {"seed", seed}, {"results", per}};
    WriteAtomic(out / SeedFile("bench", seed, ".json"), result.dump(2) + "\n");
    return so;
  });
  WriteAtomic(out / "summary.csv",
              Csv({"seed", "estimator", "seconds", "updates_per_second",
                   "max_snapshot_bits", "mean_abs_error", "max_abs_error"},
                  Flatten(outputs)));
  return json{{"command", "bench-algo"}, {"out", out.string()},
              {"estimators", r.config.bench_estimators}};
}

// ------------------------------------------------------------ errors

json ErrorJson(const std::string& field, const std::string& message) {
  return json{{"error", {{"field", field}, {"message", message}}}};
}

// Library errors are phrased "field.path: message".
json ErrorFromMessage(const std::string& what) {
  const auto colon = what.find(": ");
  if (colon != std::string::npos && colon > 0) {
    const std::string head = what.substr(0, colon);
    const bool is_field = std::all_of(head.begin(), head.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
    if (is_field) return ErrorJson(head, what.substr(colon + 2));
  }
  return ErrorJson("", what);
}

}  // namespace

// ------------------------------------------------------------ public API

json ToJson(const ExperimentConfig& c) {
  const InstanceConfig& i = c.instance;
  const GameSettings& g = c.game;
  return json{
      {"command", c.command},
      {"problem", c.problem},
      {"profile", c.profile},
      {"instance",
       {{"w", i.w}, {"k", i.k}, {"h", i.h}, {"P", i.P}, {"N", i.N}, {"prior", i.prior}}},
      {"estimator", {{"name", c.estimator.name}, {"params", c.estimator.params}}},
      {"beta", OptionalJson(c.beta)},
      {"game",
       {{"strategy", g.strategy},
        {"eps1", OptionalJson(g.eps1)},
        {"eps2", OptionalJson(g.eps2)},
        {"message_limit_bits", OptionalJson(g.message_limit_bits)},
        {"stop_at_first_violation", g.stop_at_first_violation}}},
      {"fp",
       {{"estimator", c.fp.estimator},
        {"param", c.fp.param},
        {"n", c.fp.n},
        {"trials", c.fp.trials},
        {"prior", c.fp.prior}}},
      {"bounds", {{"formula", c.bounds.formula}, {"params", c.bounds.params}}},
      {"bench_estimators", c.bench_estimators},
      {"seeds", c.seeds}};
}

ExperimentConfig FromJson(const json& input) {
  const json& j = input.is_object() && input.contains("config") ? input.at("config") : input;
  CheckKeys(j, "", {"command", "problem", "profile", "instance", "estimator", "beta",
                    "game", "fp", "bounds", "bench_estimators", "seeds"});
  ExperimentConfig c;
  Read(j, "", "command", c.command);
  Read(j, "", "problem", c.problem);
  Read(j, "", "profile", c.profile);
  if (j.contains("instance")) {
    const json& i = j.at("instance");
    CheckKeys(i, "instance", {"w", "k", "h", "P", "N", "prior"});
    Read(i, "instance", "w", c.instance.w);
    Read(i, "instance", "k", c.instance.k);
    Read(i, "instance", "h", c.instance.h);
    Read(i, "instance", "P", c.instance.P);
    Read(i, "instance", "N", c.instance.N);
    Read(i, "instance", "prior", c.instance.prior);
  }
  if (j.contains("estimator")) {
    const json& e = j.at("estimator");
    CheckKeys(e, "estimator", {"name", "params"});
    Read(e, "estimator", "name", c.estimator.name);
    ReadParams(e, "estimator", "params", c.estimator.params);
  }
  ReadOptional(j, "", "beta", c.beta);
  if (j.contains("game")) {
    const json& g = j.at("game");
    CheckKeys(g, "game", {"strategy", "eps1", "eps2", "message_limit_bits",
                          "stop_at_first_violation"});
    Read(g, "game", "strategy", c.game.strategy);
    ReadOptional(g, "game", "eps1", c.game.eps1);
    ReadOptional(g, "game", "eps2", c.game.eps2);
    ReadOptional(g, "game", "message_limit_bits", c.game.message_limit_bits);
    Read(g, "game", "stop_at_first_violation", c.game.stop_at_first_violation);
  }
  if (j.contains("fp")) {
    const json& f = j.at("fp");
    CheckKeys(f, "fp", {"estimator", "param", "n", "trials", "prior"});
    Read(f, "fp", "estimator", c.fp.estimator);
    Read(f, "fp", "param", c.fp.param);
    Read(f, "fp", "n", c.fp.n);
    Read(f, "fp", "trials", c.fp.trials);
    Read(f, "fp", "prior", c.fp.prior);
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    CheckKeys(b, "bounds", {"formula", "params"});
    Read(b, "bounds", "formula", c.bounds.formula);
    ReadParams(b, "bounds", "params", c.bounds.params);
  }
  if (j.contains("bench_estimators")) {
    const json& b = j.at("bench_estimators");
    if (!b.is_array()) throw std::invalid_argument("bench_estimators: must be an array");
    c.bench_estimators.clear();
    for (const auto& name : b) {
      if (!name.is_string()) {
        throw std::invalid_argument("bench_estimators: entries must be strings");
      }
      c.bench_estimators.push_back(name.get<std::string>());
    }
  }
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array()) throw std::invalid_argument("seeds: must be an array");
    c.seeds.clear();
    for (const auto& v : s) {
      if (!v.is_number_unsigned()) {
        throw std::invalid_argument("seeds: entries must be non-negative integers");
      }
      c.seeds.push_back(v.get<uint64_t>());
    }
  }
  return c;
}

std::optional<InstanceConfig> ProfileInstance(const std::string& name) {
  InstanceConfig c;
  if (name == "small") return c;
  if (name == "large") {
    c.P = 512;
    return c;
  }
  return std::nullopt;
}

bool IsKnownProfile(const std::string& name) {
  return name == "small" || name == "large" || name == "theorem";
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"dpspace: memory lower-bound laboratory for user-level private streaming"};
  app.set_help_flag("--help", "print usage");
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 1;
  uint64_t num_seeds = 1;
  std::string profile;
  std::string out_dir = "out";
  std::string problem;
  InstanceConfig inst;
  std::string estimator;
  std::vector<std::string> params;
  double beta = 0.0;
  std::string strategy;
  double eps1 = 0.0;
  double eps2 = 0.0;
  uint64_t message_limit = 0;
  uint32_t fp_n = 0;
  uint64_t trials = 0;
  std::string formula;
  std::vector<std::string> bench_list;

  auto* o_config = app.add_option("--config", config_path, "JSON config or result file");
  auto* o_seed = app.add_option("--seed", seed, "first seed");
  auto* o_seeds = app.add_option("--seeds", num_seeds, "number of consecutive seeds");
  auto* o_profile = app.add_option("--profile", profile, "small | large | theorem");
  app.add_option("--out", out_dir, "output directory");
  auto* o_problem = app.add_option("--problem", problem, "countdistinct | maxselect | quantile");
  auto* o_w = app.add_option("--w", inst.w, "repetitions per phase");
  auto* o_k = app.add_option("--k", inst.k, "heavy set size");
  auto* o_h = app.add_option("--h", inst.h, "accuracy scale");
  auto* o_P = app.add_option("--P", inst.P, "phases");
  auto* o_N = app.add_option("--N", inst.N, "universe size");
  auto* o_prior = app.add_option("--prior", inst.prior, "uniform | logistic");
  auto* o_est = app.add_option("--estimator", estimator, "estimator name");
  auto* o_param = app.add_option("--param", params, "key=value parameter (repeatable)");
  auto* o_beta = app.add_option("--beta", beta, "attack failure probability");
  auto* o_strategy = app.add_option("--strategy", strategy,
                                    "random | intersection | all | none | oracle | reduction");
  auto* o_eps1 = app.add_option("--eps1", eps1, "game size slack");
  auto* o_eps2 = app.add_option("--eps2", eps2, "game appearance slack");
  auto* o_limit = app.add_option("--message-limit", message_limit, "message bit limit");
  auto* o_keep = app.add_flag("--keep-going", "play every player after a violation");
  auto* o_n = app.add_option("--n", fp_n, "fingerprinting sample size");
  auto* o_trials = app.add_option("--trials", trials, "Monte-Carlo trials");
  auto* o_formula = app.add_option("--formula", formula,
                                   "log_binom | comm_exact | comm_stirling | reduction_eps | "
                                   "theorem | corollary | encoding");
  auto* o_bench = app.add_option("--bench-estimators", bench_list, "estimators to time")
                      ->delimiter(',');

  const std::vector<std::string> commands = {"gen-instance", "run-attack", "play-game",
                                             "bounds",       "verify-fp",  "bench-algo"};
  for (const auto& name : commands) app.add_subcommand(name);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      std::string field = "command";
      const std::string what = e.what();
      const auto dash = what.find("--");
      if (dash != std::string::npos) {
        const auto end = what.find_first_of(" :", dash);
        field = what.substr(dash + 2, end == std::string::npos ? end : end - dash - 2);
      }
      err << ErrorJson(field, what).dump() << "\n";
      return 2;
    }

    ExperimentConfig config;
    if (o_config->count() != 0) {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("config: cannot open " + config_path);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
      }
      config = FromJson(j);
    }
    config.command = app.get_subcommands().front()->get_name();

    if (o_profile->count() != 0) {
      if (!IsKnownProfile(profile)) {
        throw std::invalid_argument("profile: unknown profile '" + profile + "'");
      }
      config.profile = profile;
      if (auto pi = ProfileInstance(profile)) config.instance = *pi;
      if (profile == "theorem") {
        config.bounds.formula = "corollary";
        config.bounds.params = {{"alpha", kTheoremAlpha}};
      }
    }
    if (o_problem->count() != 0) config.problem = problem;
    if (o_w->count() != 0) config.instance.w = inst.w;
    if (o_k->count() != 0) config.instance.k = inst.k;
    if (o_h->count() != 0) config.instance.h = inst.h;
    if (o_P->count() != 0) config.instance.P = inst.P;
    if (o_N->count() != 0) config.instance.N = inst.N;
    if (o_prior->count() != 0) {
      config.instance.prior = inst.prior;
      config.fp.prior = inst.prior;
    }
    if (o_beta->count() != 0) config.beta = beta;
    if (o_strategy->count() != 0) config.game.strategy = strategy;
    if (o_eps1->count() != 0) config.game.eps1 = eps1;
    if (o_eps2->count() != 0) config.game.eps2 = eps2;
    if (o_limit->count() != 0) config.game.message_limit_bits = message_limit;
    if (o_keep->count() != 0) config.game.stop_at_first_violation = false;
    if (o_n->count() != 0) config.fp.n = fp_n;
    if (o_trials->count() != 0) config.fp.trials = trials;
    if (o_formula->count() != 0) config.bounds.formula = formula;
    if (o_bench->count() != 0) config.bench_estimators = bench_list;
    if (o_seed->count() != 0 || o_seeds->count() != 0) {
      if (num_seeds == 0) throw std::invalid_argument("seeds: must be >= 1");
      config.seeds.clear();
      for (uint64_t s = 0; s < num_seeds; ++s) config.seeds.push_back(seed + s);
    }

    const bool fp_command = config.command == "verify-fp";
    const bool bounds_command = config.command == "bounds";
    if (o_est->count() != 0) {
      if (fp_command) {
        config.fp.estimator = estimator;
      } else {
        config.estimator.name = estimator;
        config.estimator.params.clear();
      }
    }
    if (o_param->count() != 0) {
      const char* field = fp_command ? "fp.param" : bounds_command ? "bounds.params"
                                                                   : "estimator.params";
      auto kv = ParseKeyValues(params, field);
      if (fp_command) {
        if (kv.size() != 1) throw std::invalid_argument("fp.param: expects one key=value");
        config.fp.param = kv.begin()->second;
      } else if (bounds_command) {
        for (const auto& [key, v] : kv) config.bounds.params[key] = v;
      } else {
        for (const auto& [key, v] : kv) config.estimator.params[key] = v;
      }
    }

    const fs::path out_path(out_dir);
    std::error_code ec;
    fs::create_directories(out_path, ec);
    if (ec) throw std::runtime_error("out: cannot create " + out_dir);

    json summary;
    if (config.command == "gen-instance") {
      summary = GenInstance(config, out_path);
    } else if (config.command == "run-attack") {
      summary = RunAttack(config, out_path);
    } else if (config.command == "play-game") {
      summary = PlayGameCommand(config, out_path);
    } else if (config.command == "bounds") {
      summary = BoundsCommand(config, out_path);
    } else if (config.command == "verify-fp") {
      summary = VerifyFp(config, out_path);
    } else {
      summary = BenchAlgo(config, out_path);
    }
    out << summary.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << ErrorFromMessage(e.what()).dump() << "\n";
    return 2;
  }
}

}  // namespace dpspace::cli
