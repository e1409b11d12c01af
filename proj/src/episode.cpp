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

#include "shaping/episode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shaping {

FixedPolicy::FixedPolicy(double prob_cooperate)
    : prob_cooperate_(prob_cooperate) {
  if (!(prob_cooperate >= 0.0 && prob_cooperate <= 1.0)) {
    throw std::invalid_argument("FixedPolicy: probability outside [0, 1]");
  }
}

StepOutput FixedPolicy::Step(int /*observation*/,
                             std::span<const double> /*hidden*/,
                             std::span<double> /*next_hidden*/) const {
  // Saturated logits; exp(-800) underflows to an exact 0/1 probability.
  constexpr double kSaturated = 800.0;
  StepOutput out;
  if (prob_cooperate_ <= 0.0) {
    out.logits = {0.0, -kSaturated};
  } else if (prob_cooperate_ >= 1.0) {
    out.logits = {-kSaturated, 0.0};
  } else {
    out.logits = {std::log1p(-prob_cooperate_), std::log(prob_cooperate_)};
  }
  return out;
}

double LogProb(const std::array<double, 2>& logits, Action action) {
  const double hi = std::max(logits[0], logits[1]);
  const double lse =
      hi + std::log(std::exp(logits[0] - hi) + std::exp(logits[1] - hi));
  return logits[static_cast<int>(action)] - lse;
}

double ProbCooperate(const std::array<double, 2>& logits) {
  return 1.0 / (1.0 + std::exp(logits[0] - logits[1]));
}

SampledAction SampleAction(const std::array<double, 2>& logits, Rng& rng) {
  const double u = Uniform01(rng);
  SampledAction s;
  s.action = u < ProbCooperate(logits) ? Action::kCooperate : Action::kDefect;
  s.log_prob = LogProb(logits, s.action);
  return s;
}

double Trajectory::Return() const {
  double total = 0.0;
  for (double r : rewards) total += r;
  return total;
}

double Trajectory::CooperationRate() const {
  if (actions.empty()) return 0.0;
  std::size_t c = 0;
  for (Action a : actions) c += a == Action::kCooperate ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(actions.size());
}

std::vector<Trajectory> PlayEpisode(std::span<const Policy* const> policies,
                                    std::span<std::vector<double>> hiddens,
                                    const GameSpec& spec, int episode_length,
                                    Rng& rng) {
  const int n = spec.n_players;
  if (static_cast<int>(policies.size()) != n ||
      static_cast<int>(hiddens.size()) != n) {
    throw std::invalid_argument(
        "play_episode: expected " + std::to_string(n) + " policies, got " +
        std::to_string(policies.size()));
  }
  if (episode_length < 1) {
    throw std::invalid_argument("play_episode: episode_length must be >= 1");
  }

  std::vector<Trajectory> out(n);
  for (int i = 0; i < n; ++i) {
    const int hs = policies[i]->HiddenSize();
    if (static_cast<int>(hiddens[i].size()) != hs) {
      throw std::invalid_argument("play_episode: hidden size mismatch for " +
                                  std::string("agent ") + std::to_string(i));
    }
    Trajectory& tr = out[i];
    tr.hidden_size = hs;
    tr.observations.reserve(episode_length);
    tr.actions.reserve(episode_length);
    tr.log_probs.reserve(episode_length);
    tr.values.reserve(episode_length);
    tr.rewards.reserve(episode_length);
    tr.hiddens.reserve(static_cast<std::size_t>(episode_length) * hs);
  }

  JointAction joint(n);
  std::vector<double> pay(n);
  std::vector<double> next;
  bool first = true;
  for (int t = 0; t < episode_length; ++t) {
    for (int i = 0; i < n; ++i) {
      Trajectory& tr = out[i];
      const int obs =
          first ? spec.StartCode() : EncodeObservation(joint, i);
      tr.observations.push_back(obs);
      tr.hiddens.insert(tr.hiddens.end(), hiddens[i].begin(),
                        hiddens[i].end());
      next.assign(hiddens[i].size(), 0.0);
      const StepOutput step = policies[i]->Step(obs, hiddens[i], next);
      hiddens[i].swap(next);
      tr.values.push_back(step.value);
      const SampledAction s = SampleAction(step.logits, rng);
      tr.log_probs.push_back(s.log_prob);
      tr.actions.push_back(s.action);
    }
    // All observations for this round are encoded before the joint action
    // is overwritten.
    for (int i = 0; i < n; ++i) joint[i] = out[i].actions.back();
    PayoffInto(spec, joint, pay);
    for (int i = 0; i < n; ++i) out[i].rewards.push_back(pay[i]);
    first = false;
  }
  for (int i = 0; i < n; ++i) out[i].final_hidden = hiddens[i];
  return out;
}

}  // namespace shaping
