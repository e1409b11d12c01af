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

#ifndef SHAPING_DICE_HPP_
#define SHAPING_DICE_HPP_

#include <memory>
#include <span>
#include <vector>

#include "shaping/autodiff.hpp"
#include "shaping/episode.hpp"

namespace shaping {

// One joint rollout (a trajectory per seat) with an importance weight.
// Sampled batches use weight 1; exact enumerations use the detached
// probability of the outcome.
struct JointRollout {
  std::vector<Trajectory> agents;
  double weight = 1.0;
};
using RolloutBatch = std::vector<JointRollout>;

// A policy whose per-step log-probabilities can be recomputed on a tape as
// functions of a flat parameter Var.
class TapePolicy {
 public:
  virtual ~TapePolicy() = default;
  virtual std::size_t ParamCount() const = 0;
  virtual std::vector<ad::Var> LogProbs(ad::Tape& tape, ad::Var params,
                                        const Trajectory& traj) const = 0;
};

// GRU actor-critic unrolled from the trajectory's stored initial hidden.
class GruTapePolicy final : public TapePolicy {
 public:
  GruTapePolicy(int input_dim, int hidden_dim)
      : input_dim_(input_dim), hidden_dim_(hidden_dim) {}
  std::size_t ParamCount() const override;
  std::vector<ad::Var> LogProbs(ad::Tape& tape, ad::Var params,
                                const Trajectory& traj) const override;

 private:
  int input_dim_;
  int hidden_dim_;
};

// Memoryless policy with a single parameter: the cooperate logit against a
// fixed zero defect logit, so P(C) = sigmoid(theta).
class BernoulliTapePolicy final : public TapePolicy {
 public:
  std::size_t ParamCount() const override { return 1; }
  std::vector<ad::Var> LogProbs(ad::Tape& tape, ad::Var params,
                                const Trajectory& traj) const override;
};

// exp(tau - stop_gradient(tau)): evaluates to exactly 1, differentiates
// like tau.
ad::Var MagicBox(ad::Var cumulative_log_prob);

// log_probs[b][i][t] for rollout b, seat i, step t.
using LogProbTable = std::vector<std::vector<std::vector<ad::Var>>>;

// Recomputes every seat's log-probabilities on `tape` under `params`.
// With `verify`, throws std::runtime_error if any recomputed value differs
// from the stored one by more than 1e-6 (stale log-probs).
LogProbTable RecomputeLogProbs(ad::Tape& tape,
                               std::span<const TapePolicy* const> policies,
                               std::span<const ad::Var> params,
                               const RolloutBatch& batch, bool verify);

struct DiceOptions {
  double discount = 0.96;
  // Adds sum_t (1 - box(a_t)) * discount^t * b_t with b_t the stored value
  // estimate of the scored seat.
  bool use_baseline = false;
};

// Weighted batch mean of sum_t box(a_{<=t}) discount^t r_t for seat
// `agent_index`, where a_{<=t} spans all seats' actions up to t.
ad::Var DiceObjective(const LogProbTable& log_probs,
                      const RolloutBatch& batch, int agent_index,
                      const DiceOptions& options);

// Plain weighted discounted return of `agent_index`; the value DiceObjective
// must reproduce.
double DiscountedReturn(const RolloutBatch& batch, int agent_index,
                        double discount);

}  // namespace shaping

#endif  // SHAPING_DICE_HPP_
