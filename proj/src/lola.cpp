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

#include "shaping/lola.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shaping {

void LolaConfig::Validate() const {
  if (lookahead_steps < 1) {
    throw std::invalid_argument("lola: lookahead_steps must be >= 1");
  }
  if (batch_size < 1) throw std::invalid_argument("lola: batch_size must be >= 1");
  if (inner_lr < 0.0) throw std::invalid_argument("lola: inner_lr must be >= 0");
  if (!(outer_lr > 0.0)) throw std::invalid_argument("lola: outer_lr must be > 0");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw std::invalid_argument("lola: discount must be in (0, 1]");
  }
}

ad::Var InnerLookahead(ad::Tape& tape,
                       std::span<const TapePolicy* const> policies,
                       std::span<const ad::Var> params,
                       const RolloutBatch& batch, int co_index,
                       const LolaConfig& config) {
  const DiceOptions dice{config.discount, config.use_baseline};
  std::vector<ad::Var> current(params.begin(), params.end());
  for (int step = 0; step < config.lookahead_steps; ++step) {
    const LogProbTable logp =
        RecomputeLogProbs(tape, policies, current, batch, /*verify=*/false);
    ad::Var objective = DiceObjective(logp, batch, co_index, dice);
    const ad::Var wrt[] = {current[co_index]};
    ad::Var grad = tape.Gradient(objective, wrt, /*create_graph=*/true)[0];
    current[co_index] = ad::Add(current[co_index], ad::Scale(grad, config.inner_lr));
  }
  return current[co_index];
}

LolaLookahead::LolaLookahead(std::span<const TapePolicy* const> policies,
                             std::span<const std::vector<double>> params,
                             int own_index)
    : policies_(policies.begin(), policies.end()), own_index_(own_index) {
  if (policies.size() != params.size()) {
    throw std::invalid_argument("lola: one parameter vector per seat required");
  }
  if (own_index < 0 || own_index >= static_cast<int>(params.size())) {
    throw std::invalid_argument("lola: own seat out of range");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != policies[i]->ParamCount()) {
      throw std::invalid_argument("lola: parameter count mismatch for seat " +
                                  std::to_string(i));
    }
    leaves_.push_back(tape_.Leaf(Tensor::Vector(params[i])));
  }
  virtual_ = leaves_;
}

void LolaLookahead::Lookahead(const RolloutBatch& inner,
                              const LolaConfig& config) {
  // Stale-log-prob guard: the inner batch must come from current params.
  RecomputeLogProbs(tape_, policies_, leaves_, inner, /*verify=*/true);
  for (int i = 0; i < static_cast<int>(leaves_.size()); ++i) {
    if (i == own_index_) continue;
    virtual_[i] = InnerLookahead(tape_, policies_, leaves_, inner, i, config);
  }
}

std::vector<std::vector<double>> LolaLookahead::VirtualParams() const {
  std::vector<std::vector<double>> out;
  out.reserve(virtual_.size());
  for (ad::Var v : virtual_) {
    const auto d = v.value().data();
    out.emplace_back(d.begin(), d.end());
  }
  return out;
}

std::vector<double> LolaLookahead::OuterGradient(const RolloutBatch& outer,
                                                 const LolaConfig& config) {
  const LogProbTable logp =
      RecomputeLogProbs(tape_, policies_, virtual_, outer, /*verify=*/false);
  ad::Var objective = DiceObjective(
      logp, outer, own_index_, {config.discount, config.use_baseline});
  const ad::Var wrt[] = {leaves_[own_index_]};
  const std::vector<Tensor> g = tape_.GradientValues(objective, wrt);
  const auto d = g[0].data();
  return {d.begin(), d.end()};
}

RolloutBatch SampleBatch(std::span<const Policy* const> policies,
                         std::span<const std::vector<double>> hiddens,
                         const GameSpec& spec, int episode_length, int count,
                         Rng& rng) {
  RolloutBatch batch;
  batch.reserve(count);
  for (int b = 0; b < count; ++b) {
    std::vector<std::vector<double>> h(hiddens.begin(), hiddens.end());
    batch.push_back({PlayEpisode(policies, h, spec, episode_length, rng), 1.0});
  }
  return batch;
}

LolaLearner::LolaLearner(int input_dim, int hidden_dim, std::uint64_t seed)
    : policy_(input_dim, hidden_dim,
              [&] {
                Rng init(DeriveSeed(seed, {0}));
                return InitGruParams(input_dim, hidden_dim, init);
              }()),
      adam_(AdamState::Zeros(GruParamCount(input_dim, hidden_dim))),
      hidden_(hidden_dim, 0.0),
      rng_(DeriveSeed(seed, {1})) {}

LolaLearner::UpdateStats LolaLearner::Update(
    std::span<const GruPolicy* const> seats,
    std::span<const std::vector<double>> hiddens, int own_index,
    const GameSpec& spec, int episode_length, const LolaConfig& config) {
  const int n = static_cast<int>(seats.size());
  if (n != spec.n_players || static_cast<int>(hiddens.size()) != n) {
    throw std::invalid_argument("lola_update: seat count mismatch");
  }
  if (seats[own_index] != &policy_) {
    throw std::invalid_argument("lola_update: own seat is not this learner");
  }

  std::vector<const Policy*> acting(seats.begin(), seats.end());
  const RolloutBatch inner = SampleBatch(acting, hiddens, spec, episode_length,
                                         config.batch_size, rng_);

  std::vector<GruTapePolicy> tape_policies;
  std::vector<std::vector<double>> params;
  tape_policies.reserve(n);
  for (const GruPolicy* p : seats) {
    tape_policies.emplace_back(p->input_dim(), p->HiddenSize());
    params.push_back(p->params());
  }
  std::vector<const TapePolicy*> tp;
  for (const auto& p : tape_policies) tp.push_back(&p);

  LolaLookahead lola(tp, params, own_index);
  lola.Lookahead(inner, config);
  const std::vector<std::vector<double>> virt = lola.VirtualParams();

  UpdateStats stats;
  std::vector<GruPolicy> virtual_policies;
  virtual_policies.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (i != own_index) {
      double sq = 0.0;
      for (std::size_t k = 0; k < virt[i].size(); ++k) {
        const double d = virt[i][k] - params[i][k];
        sq += d * d;
      }
      stats.virtual_step_norm += std::sqrt(sq);
    }
    virtual_policies.emplace_back(seats[i]->input_dim(), seats[i]->HiddenSize(),
                                  virt[i]);
  }
  std::vector<const Policy*> outer_acting;
  for (const auto& p : virtual_policies) outer_acting.push_back(&p);
  const RolloutBatch outer = SampleBatch(outer_acting, hiddens, spec,
                                         episode_length, config.batch_size,
                                         rng_);

  std::vector<double> grad = lola.OuterGradient(outer, config);
  for (double& g : grad) g = -g;  // descend on the negated objective

  // Critic regression on discounted returns-to-go of the outer batch.
  const GruNet net = policy_.net();
  const double inv_batch = 1.0 / static_cast<double>(outer.size());
  for (const JointRollout& r : outer) {
    const Trajectory& own = r.agents[own_index];
    const GruUnroll unroll(net, own.observations, own.hidden_at(0));
    std::vector<double> returns(own.size());
    double acc = 0.0;
    for (std::size_t t = own.size(); t-- > 0;) {
      acc = own.rewards[t] + config.discount * acc;
      returns[t] = acc;
    }
    std::vector<std::array<double, 2>> dlogits(own.size(), {0.0, 0.0});
    std::vector<double> dvalues(own.size());
    const double w = config.value_coef * inv_batch / own.size();
    for (std::size_t t = 0; t < own.size(); ++t) {
      dvalues[t] = w * (unroll.outputs()[t].value - returns[t]);
    }
    unroll.Backward(dlogits, dvalues, grad);
  }
  stats.own_return = DiscountedReturn(outer, own_index, config.discount);

  stats.grad_norm = GlobalNorm(grad);
  if (!std::isfinite(stats.grad_norm)) {
    throw std::runtime_error(
        "lola_update: non-finite gradient (norm " +
        std::to_string(stats.grad_norm) + ", virtual step norm " +
        std::to_string(stats.virtual_step_norm) + "); update aborted");
  }
  AdamStep(policy_.mutable_params(), grad, adam_,
           {config.outer_lr, 0.9, 0.999, config.adam_eps});
  return stats;
}

}  // namespace shaping
