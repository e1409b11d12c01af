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

#ifndef SHAPING_LOLA_HPP_
#define SHAPING_LOLA_HPP_

#include <span>
#include <vector>

#include "shaping/dice.hpp"
#include "shaping/gru.hpp"
#include "shaping/optim.hpp"

namespace shaping {

struct LolaConfig {
  // Step size of the anticipated co-player update.
  double inner_lr = 0.3;
  int lookahead_steps = 1;
  // Rollouts per batch; one inner and one outer batch per update.
  int batch_size = 4;
  double outer_lr = 0.01;
  double discount = 0.96;
  bool use_baseline = false;
  double value_coef = 0.5;
  double adam_eps = 1e-8;

  void Validate() const;
};

// Two-level LOLA-DiCE gradient for the seat `own_index`. Every other seat
// is a co-player whose next parameters are anticipated with a
// differentiable policy-gradient step on its own DiCE objective; all
// co-players are stepped simultaneously from the same inner batch.
class LolaLookahead {
 public:
  LolaLookahead(std::span<const TapePolicy* const> policies,
                std::span<const std::vector<double>> params, int own_index);

  // Builds virtual co-player parameters from `inner` (sampled under the
  // current parameters; log-probs are verified against it).
  void Lookahead(const RolloutBatch& inner, const LolaConfig& config);

  // Current parameters for the own seat, virtual ones for co-players.
  std::vector<std::vector<double>> VirtualParams() const;

  // d/d own params of the own DiCE objective on `outer`, which must be
  // sampled (or enumerated) under VirtualParams().
  std::vector<double> OuterGradient(const RolloutBatch& outer,
                                    const LolaConfig& config);

  // Differentiable virtual parameters of seat i (own seat: its leaf).
  ad::Var virtual_param(int seat) const { return virtual_[seat]; }
  ad::Var leaf(int seat) const { return leaves_[seat]; }
  ad::Tape& tape() { return tape_; }

 private:
  ad::Tape tape_;
  std::vector<const TapePolicy*> policies_;
  std::vector<ad::Var> leaves_;
  std::vector<ad::Var> virtual_;
  int own_index_;
};

// Anticipated parameters of seat `co_index`:
// params' = params + inner_lr * d dice(co-player return) / d params, kept on
// the tape. `params` holds one Var per seat.
ad::Var InnerLookahead(ad::Tape& tape,
                       std::span<const TapePolicy* const> policies,
                       std::span<const ad::Var> params,
                       const RolloutBatch& batch, int co_index,
                       const LolaConfig& config);

// LOLA learner occupying one seat with a GRU policy. It has parameter
// access to every other seat and updates once per episode.
class LolaLearner {
 public:
  LolaLearner(int input_dim, int hidden_dim, std::uint64_t seed);

  const GruPolicy& policy() const { return policy_; }
  GruPolicy& mutable_policy() { return policy_; }
  std::vector<double>& hidden() { return hidden_; }

  struct UpdateStats {
    double own_return = 0.0;
    double grad_norm = 0.0;
    double virtual_step_norm = 0.0;
  };

  // seats[i] and hiddens[i] describe seat i at its current state; seat
  // own_index must be this learner. Throws std::runtime_error when the
  // gradient is non-finite.
  UpdateStats Update(std::span<const GruPolicy* const> seats,
                     std::span<const std::vector<double>> hiddens,
                     int own_index, const GameSpec& spec, int episode_length,
                     const LolaConfig& config);

 private:
  GruPolicy policy_;
  AdamState adam_;
  std::vector<double> hidden_;
  Rng rng_;
};

// Samples `count` joint episodes from copies of `hiddens`.
RolloutBatch SampleBatch(std::span<const Policy* const> policies,
                         std::span<const std::vector<double>> hiddens,
                         const GameSpec& spec, int episode_length, int count,
                         Rng& rng);

}  // namespace shaping

#endif  // SHAPING_LOLA_HPP_
