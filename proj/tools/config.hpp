// Copyright 2026 The Shaping Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHAPING_TOOLS_CONFIG_HPP_
#define SHAPING_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shaping/shaper.hpp"

namespace shaping::cli {

// Invalid configuration; what() carries "<source>:<line>: <message>".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { kShaper, kLola, kNaive };
std::string_view MethodName(Method m);
Method ParseMethod(std::string_view name);

enum class Preset { kPaper, kDesk, kCi };
std::string_view PresetName(Preset p);

struct ExperimentConfig {
  Preset preset = Preset::kDesk;

  std::vector<GameKind> games{GameKind::kIpd};
  std::vector<int> n_players{3};
  std::vector<int> shaper_counts{1};
  std::vector<Method> methods{Method::kShaper};
  SeatKind coplayer = SeatKind::kNaive;
  std::vector<std::uint64_t> seeds{0};

  // Payoff constants; kind and n_players are set per grid cell.
  GameSpec game;
  TrialConfig trial;
  TrainConfig train;
  int checkpoint_every = 10;

  int eval_trials = 4;
  bool eval_elite = false;

  std::optional<std::string> output;

  // Experiment cell for one grid point.
  struct Cell {
    GameKind game;
    int n_players;
    int shaper_count;
    Method method;
    std::string Name() const;
  };
  // Grid in deterministic order. Naive cells ignore the shaper count and
  // appear once per (game, n_players).
  std::vector<Cell> Cells() const;
  ShaperSpec SpecFor(const Cell& cell) const;
  // Spec for the training seeds of `seed`.
  TrainConfig TrainFor(std::uint64_t seed) const;
};

// Preset defaults for trial length, population and evaluation counts.
void ApplyPreset(Preset preset, ExperimentConfig& config);

// Parses YAML text. Unknown keys and bad values raise ConfigError naming
// the key and its line.
ExperimentConfig ParseConfig(const std::string& text,
                             const std::string& source = "<config>");
ExperimentConfig LoadConfig(const std::string& path);

// Output root: the config's `output`, else $SHAPING_OUT, else "runs".
std::string ResolveOutputRoot(const ExperimentConfig& config,
                              const std::optional<std::string>& flag);

}  // namespace shaping::cli

#endif  // SHAPING_TOOLS_CONFIG_HPP_
