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

#include "shaping/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shaping {

void PpoConfig::Validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("ppo: gamma must be in (0, 1]");
  }
  if (!(gae_lambda > 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("ppo: gae_lambda must be in (0, 1]");
  }
  if (!(clip_eps > 0.0)) throw std::invalid_argument("ppo: clip_eps must be > 0");
  if (minibatches < 1 || epochs < 1) {
    throw std::invalid_argument("ppo: minibatches and epochs must be >= 1");
  }
  if (!(max_grad_norm > 0.0)) {
    throw std::invalid_argument("ppo: max_grad_norm must be > 0");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("ppo: lr must be > 0");
}

GaeResult Gae(std::span<const double> rewards, std::span<const double> values,
              double bootstrap_value, double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw std::invalid_argument("gae: rewards and values differ in length");
  }
  const std::size_t n = rewards.size();
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_value = bootstrap_value;
  double acc = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    acc = delta + gamma * lambda * acc;
    out.advantages[t] = acc;
    out.returns[t] = acc + values[t];
    next_value = values[t];
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> SplitSegments(
    std::size_t steps, int minibatches) {
  const std::size_t m =
      std::max<std::size_t>(1, std::min<std::size_t>(steps, minibatches));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(m);
  const std::size_t base = steps / m;
  const std::size_t extra = steps % m;
  std::size_t start = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out.emplace_back(start, len);
    start += len;
  }
  return out;
}

PpoStats PpoSegmentGradient(const GruNet& net, const Trajectory& traj,
                            std::size_t start, std::size_t length,
                            std::span<const double> advantages,
                            std::span<const double> returns,
                            const PpoConfig& config, std::span<double> grad) {
  if (start + length > traj.size() || length == 0) {
    throw std::invalid_argument("ppo: segment outside trajectory");
  }
  const GruUnroll unroll(
      net, std::span<const int>(traj.observations).subspan(start, length),
      traj.hidden_at(start));
  std::vector<std::array<double, 2>> dlogits(length);
  std::vector<double> dvalues(length);
  const double w = 1.0 / static_cast<double>(length);
  const double eps = config.clip_eps;
  PpoStats stats;
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t t = start + k;
    const StepOutput& out = unroll.outputs()[k];
    const int a = static_cast<int>(traj.actions[t]);
    const double logp_c = LogProb(out.logits, Action::kCooperate);
    const double logp_d = LogProb(out.logits, Action::kDefect);
    const double pi[2] = {std::exp(logp_d), std::exp(logp_c)};
    const double logpi[2] = {logp_d, logp_c};
    const double logp = logpi[a];
    const double adv = advantages[t];

    const double ratio = std::exp(logp - traj.log_probs[t]);
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    stats.policy_loss += -std::min(surr1, surr2) * w;
    if (std::abs(ratio - 1.0) > eps) stats.clip_fraction += w;
    const double dlogp = surr1 <= surr2 ? -surr1 : 0.0;

    const double entropy = -(pi[0] * logpi[0] + pi[1] * logpi[1]);
    stats.entropy += entropy * w;
    for (int j = 0; j < 2; ++j) {
      const double onehot = j == a ? 1.0 : 0.0;
      double d = dlogp * (onehot - pi[j]);
      // d(-c H)/dlogit_j = c pi_j (log pi_j + H)
      d += config.entropy_coef * pi[j] * (logpi[j] + entropy);
      dlogits[k][j] = d * w;
    }

    const double v = out.value;
    const double v_old = traj.values[t];
    const double ret = returns[t];
    const double l1 = (v - ret) * (v - ret);
    double dv = v - ret;
    double vloss = 0.5 * l1;
    if (config.clip_value) {
      const double delta = v - v_old;
      const double v_clip = v_old + std::clamp(delta, -eps, eps);
      const double l2 = (v_clip - ret) * (v_clip - ret);
      if (l2 > l1) {
        vloss = 0.5 * l2;
        dv = std::abs(delta) < eps ? (v_clip - ret) : 0.0;
      }
    }
    stats.value_loss += vloss * w;
    dvalues[k] = config.value_coef * dv * w;
  }
  unroll.Backward(dlogits, dvalues, grad);
  return stats;
}

NaiveLearner::NaiveLearner(int input_dim, int hidden_dim, std::uint64_t seed)
    : policy_(input_dim, hidden_dim,
              [&] {
                Rng init(DeriveSeed(seed, {0}));
                return InitGruParams(input_dim, hidden_dim, init);
              }()),
      adam_(AdamState::Zeros(GruParamCount(input_dim, hidden_dim))),
      hidden_(hidden_dim, 0.0),
      rng_(DeriveSeed(seed, {1})) {}

NaiveLearner::ActResult NaiveLearner::Act(int observation, Rng& rng) {
  std::vector<double> next(hidden_.size());
  const StepOutput out = policy_.Step(observation, hidden_, next);
  hidden_.swap(next);
  const SampledAction s = SampleAction(out.logits, rng);
  return {s.action, s.log_prob, out.value};
}

PpoStats NaiveLearner::Update(const Trajectory& traj, const PpoConfig& config) {
  if (traj.size() == 0) {
    throw std::invalid_argument("ppo_update: empty trajectory");
  }
  GaeResult gae = Gae(traj.rewards, traj.values, 0.0, config.gamma,
                      config.gae_lambda);
  if (config.normalize_advantages && gae.advantages.size() > 1) {
    const double n = static_cast<double>(gae.advantages.size());
    const double mean =
        std::accumulate(gae.advantages.begin(), gae.advantages.end(), 0.0) / n;
    double var = 0.0;
    for (double a : gae.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / n) + 1e-8;
    for (double& a : gae.advantages) a = (a - mean) / sd;
  }

  auto segments = SplitSegments(traj.size(), config.minibatches);
  const AdamConfig adam{config.lr, 0.9, 0.999, config.adam_eps};
  std::vector<double>& params = policy_.mutable_params();
  std::vector<double> grad(params.size());
  PpoStats total;
  int count = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(segments.begin(), segments.end(), rng_);
    for (const auto& [start, len] : segments) {
      std::fill(grad.begin(), grad.end(), 0.0);
      PpoStats s = PpoSegmentGradient(policy_.net(), traj, start, len,
                                      gae.advantages, gae.returns, config,
                                      grad);
      s.grad_norm = ClipGlobalNorm(grad, config.max_grad_norm);
      AdamStep(params, grad, adam_, adam);
      total.policy_loss += s.policy_loss;
      total.value_loss += s.value_loss;
      total.entropy += s.entropy;
      total.grad_norm += s.grad_norm;
      total.clip_fraction += s.clip_fraction;
      ++count;
    }
  }
  for (double p : params) {
    if (!std::isfinite(p)) {
      throw std::runtime_error("ppo_update: non-finite parameter after update " +
                               std::to_string(episodes_trained_));
    }
  }
  ++episodes_trained_;
  const double inv = 1.0 / count;
  total.policy_loss *= inv;
  total.value_loss *= inv;
  total.entropy *= inv;
  total.grad_norm *= inv;
  total.clip_fraction *= inv;
  return total;
}

}  // namespace shaping
