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
#ifndef SHAPING_EPISODE_HPP_
#define SHAPING_EPISODE_HPP_

#include <array>
#include <span>
#include <vector>

#include "shaping/game.hpp"
#include "shaping/rng.hpp"

namespace shaping {

// Logits are indexed by Action: [0] = Defect, [1] = Cooperate.
struct StepOutput {
  std::array<double, 2> logits{0.0, 0.0};
  double value = 0.0;
};

// A recurrent acting policy. Implementations are immutable while acting;
// the recurrent state lives with the caller.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual int HiddenSize() const = 0;
  virtual StepOutput Step(int observation, std::span<const double> hidden,
                          std::span<double> next_hidden) const = 0;
};

// Memoryless policy cooperating with a fixed probability.
class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(double prob_cooperate);
  static FixedPolicy AlwaysCooperate() { return FixedPolicy(1.0); }
  static FixedPolicy AlwaysDefect() { return FixedPolicy(0.0); }

  int HiddenSize() const override { return 0; }
  StepOutput Step(int observation, std::span<const double> hidden,
                  std::span<double> next_hidden) const override;

 private:
  double prob_cooperate_;
};

// Log-probability of `action` under a two-way softmax over `logits`.
double LogProb(const std::array<double, 2>& logits, Action action);
double ProbCooperate(const std::array<double, 2>& logits);

// Samples from the softmax; returns the action and its exact log-probability.
struct SampledAction {
  Action action = Action::kDefect;
  double log_prob = 0.0;
};
SampledAction SampleAction(const std::array<double, 2>& logits, Rng& rng);

// One agent's view of one episode. Step t consumed observations[t] with
// recurrent input hidden_at(t) and produced actions[t].
struct Trajectory {
  int hidden_size = 0;
  std::vector<int> observations;
  std::vector<Action> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  // Flattened [steps x hidden_size] recurrent inputs.
  std::vector<double> hiddens;
  std::vector<double> final_hidden;

  std::size_t size() const { return actions.size(); }
  std::span<const double> hidden_at(std::size_t t) const {
    return std::span<const double>(hiddens).subspan(t * hidden_size,
                                                    hidden_size);
  }
  double Return() const;
  double CooperationRate() const;
};

// Plays `episode_length` simultaneous rounds. hiddens[i] is agent i's
// recurrent state on entry and is overwritten with the final state, so a
// caller threading it into the next call keeps memory across episodes.
// Step 0 always sees the start observation.
std::vector<Trajectory> PlayEpisode(std::span<const Policy* const> policies,
                                    std::span<std::vector<double>> hiddens,
                                    const GameSpec& spec, int episode_length,
                                    Rng& rng);

}  // namespace shaping

#endif  // SHAPING_EPISODE_HPP_
