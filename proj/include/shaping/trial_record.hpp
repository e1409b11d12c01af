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

#ifndef SHAPING_TRIAL_RECORD_HPP_
#define SHAPING_TRIAL_RECORD_HPP_

#include <string_view>
#include <vector>

namespace shaping {

enum class SeatKind { kShaper, kNaive, kLola };

std::string_view SeatKindName(SeatKind kind);
SeatKind ParseSeatKind(std::string_view name);

// Raw output of one trial. Returns are undiscounted per-episode sums.
struct TrialRecord {
  int episode_length = 0;
  std::vector<SeatKind> seats;
  // [episode][seat]
  std::vector<std::vector<double>> returns;
  std::vector<std::vector<double>> cooperation;
  // Mean per-step summed payoff of each episode.
  std::vector<double> welfare;
  // Sum of episode returns for each kShaper seat, in seat order.
  std::vector<double> trial_reward;

  int episodes() const { return static_cast<int>(returns.size()); }
  int n_players() const { return static_cast<int>(seats.size()); }
  std::vector<int> SeatsOfKind(SeatKind kind) const;
};

}  // namespace shaping

#endif  // SHAPING_TRIAL_RECORD_HPP_
