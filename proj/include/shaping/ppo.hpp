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

#ifndef SHAPING_PPO_HPP_
#define SHAPING_PPO_HPP_

#include <span>
#include <vector>

#include "shaping/episode.hpp"
#include "shaping/gru.hpp"
#include "shaping/optim.hpp"
#include "shaping/rng.hpp"

namespace shaping {

struct PpoConfig {
  int minibatches = 10;
  int epochs = 4;
  double gamma = 0.96;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double value_coef = 0.5;
  bool clip_value = true;
  double max_grad_norm = 0.5;
  // Annealing is disabled, so the start coefficient applies throughout.
  double entropy_coef = 0.1;
  double lr = 3e-4;
  double adam_eps = 1e-5;
  bool normalize_advantages = false;

  void Validate() const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// delta_t = r_t + gamma V_{t+1} - V_t, A_t = delta_t + gamma lambda A_{t+1},
// with V_T = bootstrap_value.
GaeResult Gae(std::span<const double> rewards, std::span<const double> values,
              double bootstrap_value, double gamma, double lambda);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
  double clip_fraction = 0.0;
};

// Loss and gradient of the clipped PPO objective over steps
// [start, start + length) of `traj`, re-unrolled from the stored hidden
// state at `start`. Losses are averaged over the segment. Accumulates into
// `grad` (which must be zeroed by the caller).
PpoStats PpoSegmentGradient(const GruNet& net, const Trajectory& traj,
                            std::size_t start, std::size_t length,
                            std::span<const double> advantages,
                            std::span<const double> returns,
                            const PpoConfig& config, std::span<double> grad);

// Contiguous [start, length) segments covering `steps` in at most
// `minibatches` near-equal pieces.
std::vector<std::pair<std::size_t, std::size_t>> SplitSegments(
    std::size_t steps, int minibatches);

// Recurrent PPO co-player. Hidden state persists across episodes and is
// reset only by constructing a fresh learner for the next trial.
class NaiveLearner {
 public:
  NaiveLearner(int input_dim, int hidden_dim, std::uint64_t seed);

  const GruPolicy& policy() const { return policy_; }
  GruPolicy& mutable_policy() { return policy_; }
  std::vector<double>& hidden() { return hidden_; }
  const std::vector<double>& hidden() const { return hidden_; }
  const AdamState& optimizer() const { return adam_; }
  int episodes_trained() const { return episodes_trained_; }

  struct ActResult {
    Action action;
    double log_prob;
    double value;
  };
  // Samples an action and advances the hidden state.
  ActResult Act(int observation, Rng& rng);

  // One learning update on an episode this learner played. Throws
  // std::invalid_argument on an empty trajectory and std::runtime_error if
  // the update produced non-finite parameters.
  PpoStats Update(const Trajectory& traj, const PpoConfig& config);

 private:
  GruPolicy policy_;
  AdamState adam_;
  std::vector<double> hidden_;
  Rng rng_;
  int episodes_trained_ = 0;
};

}  // namespace shaping

#endif  // SHAPING_PPO_HPP_
