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

#include "shaping/open_es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace shaping {

void EsConfig::Validate() const {
  if (population < 2 || population % 2 != 0) {
    throw std::invalid_argument("es: population must be even and >= 2");
  }
  auto in_unit = [](double d) { return d > 0.0 && d <= 1.0; };
  if (!in_unit(sigma_decay) || !in_unit(lrate_decay)) {
    throw std::invalid_argument("es: decays must be in (0, 1]");
  }
  if (sigma_limit > sigma_init || lrate_limit > lrate_init) {
    throw std::invalid_argument("es: limits must not exceed initial values");
  }
  if (init_min > init_max || clip_min > clip_max) {
    throw std::invalid_argument("es: min bounds exceed max bounds");
  }
}

EsState EsState::Initialize(std::size_t dim, const EsConfig& config, Rng& rng) {
  EsState s;
  s.mean.assign(dim, config.init_min);
  if (config.init_max > config.init_min) {
    std::uniform_real_distribution<double> u(config.init_min, config.init_max);
    for (double& m : s.mean) m = u(rng);
  }
  s.sigma = config.sigma_init;
  s.lrate = config.lrate_init;
  s.adam = AdamState::Zeros(dim);
  return s;
}

nlohmann::json EsState::ToJson() const {
  return {{"mean", mean},       {"sigma", sigma},
          {"lrate", lrate},     {"adam_m", adam.m},
          {"adam_v", adam.v},   {"adam_step", adam.step},
          {"generation", generation}};
}

EsState EsState::FromJson(const nlohmann::json& j) {
  EsState s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.sigma = j.at("sigma");
  s.lrate = j.at("lrate");
  s.adam.m = j.at("adam_m").get<std::vector<double>>();
  s.adam.v = j.at("adam_v").get<std::vector<double>>();
  s.adam.step = j.at("adam_step");
  s.generation = j.at("generation");
  return s;
}

std::vector<double> CenteredRanks(std::span<const double> fitness) {
  const std::size_t n = fitness.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fitness[a] < fitness[b];
  });
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && fitness[order[j + 1]] == fitness[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) {
      out[order[k]] = rank / static_cast<double>(n - 1) - 0.5;
    }
    i = j + 1;
  }
  return out;
}

OpenEs::OpenEs(EsConfig config) : config_(config) { config_.Validate(); }

EsPopulation OpenEs::Ask(const EsState& state, Rng& rng) const {
  const std::size_t half = config_.population / 2;
  const std::size_t dim = state.mean.size();
  EsPopulation pop;
  pop.noise.assign(half, std::vector<double>(dim));
  pop.candidates.assign(config_.population, std::vector<double>(dim));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double e = normal(rng);
      pop.noise[i][d] = e;
      pop.candidates[i][d] = std::clamp(state.mean[d] + state.sigma * e,
                                        config_.clip_min, config_.clip_max);
      pop.candidates[i + half][d] = std::clamp(
          state.mean[d] - state.sigma * e, config_.clip_min, config_.clip_max);
    }
  }
  return pop;
}

std::vector<double> OpenEs::GradientEstimate(
    const EsState& state, const EsPopulation& population,
    std::span<const double> fitness) const {
  const std::size_t pop = population.candidates.size();
  const std::size_t half = population.noise.size();
  if (fitness.size() != pop || pop != 2 * half) {
    throw std::invalid_argument("es tell: expected " + std::to_string(pop) +
                                " fitnesses, got " +
                                std::to_string(fitness.size()));
  }
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (!std::isfinite(fitness[i])) {
      throw std::invalid_argument("es tell: non-finite fitness for candidate " +
                                  std::to_string(i) + "; generation rejected");
    }
  }
  const std::vector<double> shaped = CenteredRanks(fitness);
  const std::size_t dim = state.mean.size();
  std::vector<double> grad(dim, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    // Mirrored pair: +eps contributes shaped[i], -eps contributes shaped[i+half].
    const double w = shaped[i] - shaped[i + half];
    if (w == 0.0) continue;
    const std::vector<double>& e = population.noise[i];
    for (std::size_t d = 0; d < dim; ++d) grad[d] += w * e[d];
  }
  const double scale = 1.0 / (static_cast<double>(pop) * state.sigma);
  for (double& g : grad) g *= scale;
  return grad;
}

void OpenEs::Tell(EsState& state, const EsPopulation& population,
                  std::span<const double> fitness) const {
  const std::vector<double> grad = GradientEstimate(state, population, fitness);
  const AdamConfig adam{state.lrate, config_.beta1, config_.beta2, config_.eps};
  AdamStep(state.mean, grad, state.adam, adam, /*ascend=*/true);
  for (double& m : state.mean) m = std::clamp(m, config_.clip_min, config_.clip_max);
  state.sigma = std::max(state.sigma * config_.sigma_decay, config_.sigma_limit);
  state.lrate = std::max(state.lrate * config_.lrate_decay, config_.lrate_limit);
  ++state.generation;
}

}  // namespace shaping
