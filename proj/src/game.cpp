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

#include "shaping/game.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>
#include <string>

namespace shaping {

namespace {

constexpr int kMaxPlayers = 16;

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view GameKindName(GameKind kind) {
  switch (kind) {
    case GameKind::kIpd:
      return "ipd";
    case GameKind::kSnowdrift:
      return "snowdrift";
    case GameKind::kToc:
      return "toc";
    case GameKind::kStagHunt:
      return "staghunt";
  }
  return "unknown";
}

GameKind ParseGameKind(std::string_view name) {
  const std::string key = Lower(name);
  if (key == "ipd") return GameKind::kIpd;
  if (key == "snowdrift") return GameKind::kSnowdrift;
  if (key == "toc") return GameKind::kToc;
  if (key == "staghunt" || key == "stag_hunt") return GameKind::kStagHunt;
  throw std::invalid_argument("unknown game '" + std::string(name) +
                              "' (expected ipd|snowdrift|toc|staghunt)");
}

int GameSpec::TocThreshold() const {
  return threshold.value_or(n_players / 2);
}

int GameSpec::StagThreshold() const {
  return stag_threshold.value_or((n_players + 1) / 2);
}

void GameSpec::Validate() const {
  if (n_players < 2) {
    throw std::invalid_argument("game: n_players must be >= 2");
  }
  if (n_players > kMaxPlayers) {
    throw std::invalid_argument("game: n_players must be <= 16");
  }
  switch (kind) {
    case GameKind::kIpd:
      break;
    case GameKind::kSnowdrift:
      if (!(benefit > total_cost)) {
        throw std::invalid_argument(
            "game: snowdrift requires benefit > total_cost");
      }
      break;
    case GameKind::kToc: {
      const int t = TocThreshold();
      if (t < 0 || t >= n_players) {
        throw std::invalid_argument(
            "game: toc threshold must satisfy 0 <= T < n_players");
      }
      break;
    }
    case GameKind::kStagHunt: {
      if (!(reward > hunt_cost)) {
        throw std::invalid_argument(
            "game: staghunt requires reward > hunt_cost");
      }
      const int t = StagThreshold();
      if (t < 1 || t > n_players) {
        throw std::invalid_argument(
            "game: staghunt threshold must satisfy 1 <= threshold <= "
            "n_players");
      }
      break;
    }
  }
}

GameSpec GameSpec::Make(GameKind kind, int n_players) {
  GameSpec spec;
  spec.kind = kind;
  spec.n_players = n_players;
  return spec;
}

double PlayerPayoff(const GameSpec& spec, Action own, int others_cooperating) {
  const bool coop = own == Action::kCooperate;
  const int k = others_cooperating + (coop ? 1 : 0);
  const double n = spec.n_players;
  switch (spec.kind) {
    case GameKind::kIpd:
      return 2.0 * others_cooperating + (coop ? 0.0 : 1.0);
    case GameKind::kSnowdrift:
      if (k == 0) return 0.0;
      return coop ? spec.benefit - spec.total_cost / k : spec.benefit;
    case GameKind::kToc:
      if (k > spec.TocThreshold()) {
        return coop ? spec.benefit - spec.cost : spec.benefit;
      }
      return coop ? -spec.cost : 0.0;
    case GameKind::kStagHunt:
      if (k >= spec.StagThreshold()) {
        const double share = k * spec.reward / n;
        return coop ? share - spec.hunt_cost : share;
      }
      return coop ? -spec.hunt_cost : 0.0;
  }
  return 0.0;
}

void PayoffInto(const GameSpec& spec, std::span<const Action> joint,
                std::span<double> out) {
  if (static_cast<int>(joint.size()) != spec.n_players ||
      out.size() != joint.size()) {
    throw std::invalid_argument("payoff: joint action length " +
                                std::to_string(joint.size()) +
                                " does not match n_players " +
                                std::to_string(spec.n_players));
  }
  int cooperators = 0;
  for (Action a : joint) cooperators += a == Action::kCooperate ? 1 : 0;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const int self = joint[i] == Action::kCooperate ? 1 : 0;
    out[i] = PlayerPayoff(spec, joint[i], cooperators - self);
  }
}

PayoffVector Payoff(const GameSpec& spec, std::span<const Action> joint) {
  PayoffVector out(joint.size());
  PayoffInto(spec, joint, out);
  return out;
}

int EncodeObservation(std::span<const Action> prev, int agent_index) {
  const int n = static_cast<int>(prev.size());
  int code = 0;
  for (int j = 0; j < n; ++j) {
    if (prev[(agent_index + j) % n] == Action::kCooperate) code |= 1 << j;
  }
  return code;
}

int EncodeObservation(const std::optional<JointAction>& prev, int agent_index,
                      int n_players) {
  if (agent_index < 0 || agent_index >= n_players) {
    throw std::invalid_argument("observation: agent index out of range");
  }
  if (!prev) return 1 << n_players;
  if (static_cast<int>(prev->size()) != n_players) {
    throw std::invalid_argument("observation: joint action length mismatch");
  }
  return EncodeObservation(std::span<const Action>(*prev), agent_index);
}

JointAction JointFromBits(std::uint32_t bits, int n_players) {
  JointAction joint(n_players);
  for (int i = 0; i < n_players; ++i) {
    joint[i] = (bits >> i) & 1u ? Action::kCooperate : Action::kDefect;
  }
  return joint;
}

WelfareBounds ComputeWelfareBounds(const GameSpec& spec) {
  WelfareBounds b{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  std::vector<double> pay(spec.n_players);
  for (std::uint32_t bits = 0; bits < (1u << spec.n_players); ++bits) {
    const JointAction joint = JointFromBits(bits, spec.n_players);
    PayoffInto(spec, joint, pay);
    double total = 0.0;
    for (double p : pay) total += p;
    b.min_total = std::min(b.min_total, total);
    b.max_total = std::max(b.max_total, total);
  }
  return b;
}

WelfareBounds ComputePlayerPayoffBounds(const GameSpec& spec) {
  WelfareBounds b{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  std::vector<double> pay(spec.n_players);
  for (std::uint32_t bits = 0; bits < (1u << spec.n_players); ++bits) {
    const JointAction joint = JointFromBits(bits, spec.n_players);
    PayoffInto(spec, joint, pay);
    for (double p : pay) {
      b.min_total = std::min(b.min_total, p);
      b.max_total = std::max(b.max_total, p);
    }
  }
  return b;
}

}  // namespace shaping
