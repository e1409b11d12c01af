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

#ifndef SHAPING_OPEN_ES_HPP_
#define SHAPING_OPEN_ES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "shaping/optim.hpp"
#include "shaping/rng.hpp"

namespace shaping {

struct EsConfig {
  int population = 100;
  double sigma_init = 0.04;
  double sigma_decay = 0.999;
  double sigma_limit = 0.01;
  double lrate_init = 0.01;
  double lrate_decay = 0.9999;
  double lrate_limit = 0.001;
  double init_min = 0.0;
  double init_max = 0.0;
  double clip_min = -1e10;
  double clip_max = 1e10;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double eps = 1e-8;

  void Validate() const;
};

struct EsState {
  std::vector<double> mean;
  double sigma = 0.0;
  double lrate = 0.0;
  AdamState adam;
  std::int64_t generation = 0;

  // Mean drawn uniformly from [init_min, init_max] (all zeros by default).
  static EsState Initialize(std::size_t dim, const EsConfig& config, Rng& rng);

  nlohmann::json ToJson() const;
  static EsState FromJson(const nlohmann::json& j);
};

// One generation of mirrored candidates: for i < P/2 candidate i is
// mean + sigma * noise[i] and candidate i + P/2 is mean - sigma * noise[i].
struct EsPopulation {
  std::vector<std::vector<double>> candidates;
  std::vector<std::vector<double>> noise;
};

// Centered ranks in [-0.5, 0.5]; tied fitnesses share their average rank.
std::vector<double> CenteredRanks(std::span<const double> fitness);

class OpenEs {
 public:
  explicit OpenEs(EsConfig config);

  const EsConfig& config() const { return config_; }

  EsPopulation Ask(const EsState& state, Rng& rng) const;

  // Ascent step on the mean from rank-shaped fitnesses, then the sigma and
  // learning-rate schedules. Throws std::invalid_argument on a non-finite
  // or miscounted fitness vector, leaving `state` untouched.
  void Tell(EsState& state, const EsPopulation& population,
            std::span<const double> fitness) const;

  // Raw gradient estimate (before Adam) for the given population.
  std::vector<double> GradientEstimate(const EsState& state,
                                       const EsPopulation& population,
                                       std::span<const double> fitness) const;

 private:
  EsConfig config_;
};

}  // namespace shaping

#endif  // SHAPING_OPEN_ES_HPP_
