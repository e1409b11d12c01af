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

#include "shaping/dice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "shaping/gru.hpp"

namespace shaping {

std::size_t GruTapePolicy::ParamCount() const {
  return GruParamCount(input_dim_, hidden_dim_);
}

std::vector<ad::Var> GruTapePolicy::LogProbs(ad::Tape& tape, ad::Var params,
                                             const Trajectory& traj) const {
  const GruTapeWeights w = SliceGruWeights(params, input_dim_, hidden_dim_);
  if (traj.hidden_size != hidden_dim_) {
    throw std::invalid_argument("gru tape policy: hidden size mismatch");
  }
  const auto h0 = traj.hidden_at(0);
  ad::Var h = tape.Constant(Tensor::Vector({h0.begin(), h0.end()}));
  std::vector<ad::Var> out;
  out.reserve(traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const GruTapeStep step = GruTapeForward(w, traj.observations[t], h);
    out.push_back(ad::LogSoftmaxAt(step.logits,
                                   static_cast<std::size_t>(traj.actions[t])));
    h = step.hidden;
  }
  return out;
}

std::vector<ad::Var> BernoulliTapePolicy::LogProbs(
    ad::Tape& tape, ad::Var params, const Trajectory& traj) const {
  ad::Var logits = ad::Concat(tape.Scalar(0.0), ad::Element(params, 0));
  ad::Var logp_d = ad::LogSoftmaxAt(logits, 0);
  ad::Var logp_c = ad::LogSoftmaxAt(logits, 1);
  std::vector<ad::Var> out;
  out.reserve(traj.size());
  for (Action a : traj.actions) {
    out.push_back(a == Action::kCooperate ? logp_c : logp_d);
  }
  return out;
}

ad::Var MagicBox(ad::Var tau) {
  return ad::Exp(ad::Sub(tau, ad::StopGradient(tau)));
}

LogProbTable RecomputeLogProbs(ad::Tape& tape,
                               std::span<const TapePolicy* const> policies,
                               std::span<const ad::Var> params,
                               const RolloutBatch& batch, bool verify) {
  if (policies.size() != params.size()) {
    throw std::invalid_argument("dice: one parameter Var per policy required");
  }
  LogProbTable table(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const JointRollout& r = batch[b];
    if (r.agents.size() != policies.size()) {
      throw std::invalid_argument("dice: rollout seat count mismatch");
    }
    table[b].resize(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
      table[b][i] = policies[i]->LogProbs(tape, params[i], r.agents[i]);
      if (!verify) continue;
      for (std::size_t t = 0; t < table[b][i].size(); ++t) {
        const double diff =
            std::abs(table[b][i][t].item() - r.agents[i].log_probs[t]);
        if (diff > 1e-6) {
          throw std::runtime_error(
              "dice: stale log-probs for seat " + std::to_string(i) +
              " rollout " + std::to_string(b) + " step " + std::to_string(t) +
              " (|stored - recomputed| = " + std::to_string(diff) + ")");
        }
      }
    }
  }
  return table;
}

ad::Var DiceObjective(const LogProbTable& log_probs,
                      const RolloutBatch& batch, int agent_index,
                      const DiceOptions& options) {
  if (batch.empty()) throw std::invalid_argument("dice: empty batch");
  if (log_probs.size() != batch.size()) {
    throw std::invalid_argument("dice: log-prob table does not match batch");
  }
  double total_weight = 0.0;
  for (const JointRollout& r : batch) total_weight += r.weight;
  if (!(total_weight > 0.0)) {
    throw std::invalid_argument("dice: batch weights must sum to > 0");
  }

  ad::Var objective;
  auto accumulate = [&](ad::Var term) {
    objective = objective.valid() ? ad::Add(objective, term) : term;
  };
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const JointRollout& r = batch[b];
    const Trajectory& own = r.agents.at(agent_index);
    const double w = r.weight / total_weight;
    const std::size_t steps = own.size();
    ad::Var tau;
    double discount = 1.0;
    for (std::size_t t = 0; t < steps; ++t) {
      ad::Var step_logp;
      for (std::size_t i = 0; i < log_probs[b].size(); ++i) {
        ad::Var lp = log_probs[b][i][t];
        step_logp = step_logp.valid() ? ad::Add(step_logp, lp) : lp;
      }
      tau = tau.valid() ? ad::Add(tau, step_logp) : step_logp;
      const double coef = w * discount * own.rewards[t];
      accumulate(ad::Scale(MagicBox(tau), coef));
      if (options.use_baseline) {
        const double bcoef = w * discount * own.values[t];
        accumulate(ad::Scale(ad::Affine(MagicBox(step_logp), -1.0, 1.0), bcoef));
      }
      discount *= options.discount;
    }
  }
  return objective;
}

double DiscountedReturn(const RolloutBatch& batch, int agent_index,
                        double discount) {
  double total_weight = 0.0;
  double acc = 0.0;
  for (const JointRollout& r : batch) {
    const Trajectory& own = r.agents.at(agent_index);
    double d = 1.0;
    double ret = 0.0;
    for (double rew : own.rewards) {
      ret += d * rew;
      d *= discount;
    }
    acc += r.weight * ret;
    total_weight += r.weight;
  }
  return acc / total_weight;
}

}  // namespace shaping
