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

// Small experiment drivers shared by the unit tests and the acceptance run.

#ifndef SHAPING_TESTS_HARNESS_HPP_
#define SHAPING_TESTS_HARNESS_HPP_

#include <array>
#include <cmath>
#include <vector>

#include "shaping/dice.hpp"
#include "shaping/ppo.hpp"

namespace harness {

// Recurrent PPO on a single-player game where Cooperate pays 1 and Defect
// pays 0, every step seeing the same observation. Returns P(Cooperate)
// after `updates` episodes of `steps` steps.
inline double TrainBandit(int updates, int steps, std::uint64_t seed,
                          const shaping::PpoConfig& config = {}) {
  using namespace shaping;
  const int hd = kDefaultHiddenDim;
  NaiveLearner learner(1, hd, seed);
  Rng rng(DeriveSeed(seed, {7}));
  std::vector<double> h(hd, 0.0), next(hd);
  for (int u = 0; u < updates; ++u) {
    Trajectory tr;
    tr.hidden_size = hd;
    for (int t = 0; t < steps; ++t) {
      tr.observations.push_back(0);
      tr.hiddens.insert(tr.hiddens.end(), h.begin(), h.end());
      const StepOutput out = learner.policy().Step(0, h, next);
      const SampledAction a = SampleAction(out.logits, rng);
      tr.actions.push_back(a.action);
      tr.log_probs.push_back(a.log_prob);
      tr.values.push_back(out.value);
      tr.rewards.push_back(a.action == Action::kCooperate ? 1.0 : 0.0);
      h.swap(next);
    }
    tr.final_hidden = h;
    learner.Update(tr, config);
  }
  return ProbCooperate(learner.policy().Step(0, h, next).logits);
}

// One-step two-player game with memoryless Bernoulli players, P(C) =
// sigmoid(theta). payoff[a0][a1] holds both players' rewards, index 1 =
// Cooperate.
struct OneShot {
  std::array<std::array<std::array<double, 2>, 2>, 2> payoff{};

  shaping::JointRollout Outcome(int a0, int a1, double theta0, double theta1,
                                double weight) const {
    using namespace shaping;
    const int acts[2] = {a0, a1};
    const double thetas[2] = {theta0, theta1};
    JointRollout r;
    r.weight = weight;
    r.agents.resize(2);
    for (int i = 0; i < 2; ++i) {
      Trajectory& t = r.agents[i];
      const double pc = 1.0 / (1.0 + std::exp(-thetas[i]));
      t.observations = {0};
      t.actions = {acts[i] == 1 ? Action::kCooperate : Action::kDefect};
      t.log_probs = {std::log(acts[i] == 1 ? pc : 1.0 - pc)};
      t.values = {0.0};
      t.rewards = {payoff[a0][a1][i]};
    }
    return r;
  }

  // All four outcomes weighted by their probability.
  shaping::RolloutBatch Enumerate(double theta0, double theta1) const {
    shaping::RolloutBatch b;
    const double p0 = 1.0 / (1.0 + std::exp(-theta0));
    const double p1 = 1.0 / (1.0 + std::exp(-theta1));
    for (int a0 = 0; a0 < 2; ++a0) {
      for (int a1 = 0; a1 < 2; ++a1) {
        const double w = (a0 ? p0 : 1 - p0) * (a1 ? p1 : 1 - p1);
        b.push_back(Outcome(a0, a1, theta0, theta1, w));
      }
    }
    return b;
  }

  shaping::RolloutBatch Sample(double theta0, double theta1, int count,
                               shaping::Rng& rng) const {
    shaping::RolloutBatch b;
    const double p0 = 1.0 / (1.0 + std::exp(-theta0));
    const double p1 = 1.0 / (1.0 + std::exp(-theta1));
    for (int k = 0; k < count; ++k) {
      const int a0 = shaping::Uniform01(rng) < p0 ? 1 : 0;
      const int a1 = shaping::Uniform01(rng) < p1 ? 1 : 0;
      b.push_back(Outcome(a0, a1, theta0, theta1, 1.0));
    }
    return b;
  }
};

}  // namespace harness

#endif  // SHAPING_TESTS_HARNESS_HPP_
