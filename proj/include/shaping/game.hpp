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

#ifndef SHAPING_GAME_HPP_
#define SHAPING_GAME_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shaping {

enum class Action : std::uint8_t { kDefect = 0, kCooperate = 1 };

enum class GameKind { kIpd, kSnowdrift, kToc, kStagHunt };

std::string_view GameKindName(GameKind kind);
// Accepts "ipd", "snowdrift", "toc", "staghunt" (case-insensitive).
GameKind ParseGameKind(std::string_view name);

// Symmetric N-player cooperate/defect game. Only the fields relevant to
// `kind` are read; the rest keep their defaults.
struct GameSpec {
  GameKind kind = GameKind::kIpd;
  int n_players = 3;

  // Snowdrift: shovelers split total_cost. ToC: cooperators pay cost and
  // everyone gets benefit when more than threshold cooperate.
  double benefit = 5.0;
  double cost = 3.0;
  // Snowdrift cost shared among shovelers.
  double total_cost = 3.0;
  // ToC threshold T. Unset means floor(n/2).
  std::optional<int> threshold;

  // Stag hunt: a hunt succeeds when at least stag_threshold cooperate.
  // Unset means ceil(n/2).
  double hunt_cost = 3.0;
  double reward = 6.0;
  std::optional<int> stag_threshold;

  int TocThreshold() const;
  int StagThreshold() const;
  // Number of distinct observation codes (2^n joint actions + start).
  int NumObservations() const { return (1 << n_players) + 1; }
  int StartCode() const { return 1 << n_players; }

  // Throws std::invalid_argument naming the violated constraint.
  void Validate() const;

  static GameSpec Make(GameKind kind, int n_players);
};

using JointAction = std::vector<Action>;
using PayoffVector = std::vector<double>;

// Per-player payoff for a player choosing `own` while `others_cooperating`
// of the remaining n-1 players cooperate.
double PlayerPayoff(const GameSpec& spec, Action own, int others_cooperating);

// Throws std::invalid_argument when joint.size() != spec.n_players.
PayoffVector Payoff(const GameSpec& spec, std::span<const Action> joint);

// Writes payoffs into `out` (size n) without allocating.
void PayoffInto(const GameSpec& spec, std::span<const Action> joint,
                std::span<double> out);

// Joint action `prev` seen from `agent_index`: bit j holds the action of
// player (agent_index + j) mod n, Cooperate = 1. No previous joint action
// maps to the start code 2^n.
int EncodeObservation(const std::optional<JointAction>& prev, int agent_index,
                      int n_players);
int EncodeObservation(std::span<const Action> prev, int agent_index);

// Joint action for index `bits` (bit i = player i cooperates).
JointAction JointFromBits(std::uint32_t bits, int n_players);

struct WelfareBounds {
  double min_total = 0.0;
  double max_total = 0.0;
};

// Extremes of summed payoff over all 2^n joint actions.
WelfareBounds ComputeWelfareBounds(const GameSpec& spec);

// Extremes of a single player's payoff over all joint actions.
WelfareBounds ComputePlayerPayoffBounds(const GameSpec& spec);

}  // namespace shaping

#endif  // SHAPING_GAME_HPP_
