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

#ifndef SHAPING_SHAPER_HPP_
#define SHAPING_SHAPER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shaping/game.hpp"
#include "shaping/lola.hpp"
#include "shaping/open_es.hpp"
#include "shaping/ppo.hpp"
#include "shaping/trial_record.hpp"

namespace shaping {

// Trial structure shared by every seat configuration.
struct TrialConfig {
  GameSpec game;
  int episode_length = 100;
  int episodes = 1000;
  int hidden_dim = kDefaultHiddenDim;
  PpoConfig ppo;
  LolaConfig lola;

  void Validate() const;
};

// N shapers in seats [0, N) followed by K learning co-players.
struct ShaperSpec {
  TrialConfig trial;
  int num_shapers = 1;
  SeatKind coplayer = SeatKind::kNaive;

  int num_coplayers() const { return trial.game.n_players - num_shapers; }
  std::vector<SeatKind> Seats() const;
  std::size_t ParamsPerShaper() const;
  std::size_t GenomeSize() const;
  void Validate() const;
};

// Concatenated shaper parameter vectors in seat order.
using GroupGenome = std::vector<double>;

// Instrumentation passed to a hook after every episode's learning updates.
struct EpisodeEvent {
  int episode = 0;
  const std::vector<Trajectory>* trajectories = nullptr;
  // Per-seat parameters before and after this episode's updates (empty for
  // seats without parameters).
  std::vector<std::vector<double>> params_before;
  std::vector<std::vector<double>> params_after;
  // Per-seat hidden state carried into the next episode.
  std::vector<std::vector<double>> hidden_after;
};
using EpisodeHook = std::function<void(const EpisodeEvent&)>;

// Runs one trial. `shaper_policies` act in the kShaper seats (in order)
// and are never modified. Learning seats are freshly initialized from
// `coplayer_seed`; action sampling uses `env_seed`. All hidden states start
// at zero and persist across episodes. Throws std::runtime_error with the
// episode and seat if a learning update fails.
TrialRecord RunTrial(std::span<const SeatKind> seats,
                     std::span<const Policy* const> shaper_policies,
                     const TrialConfig& config, std::uint64_t coplayer_seed,
                     std::uint64_t env_seed, const EpisodeHook& hook = {});

TrialRecord RunTrial(std::span<const double> genome, const ShaperSpec& spec,
                     std::uint64_t coplayer_seed, std::uint64_t env_seed,
                     const EpisodeHook& hook = {});

enum class GroupFitness { kSum, kMean, kMin };
std::string_view GroupFitnessName(GroupFitness f);
GroupFitness ParseGroupFitness(std::string_view name);

// Seeds for one evaluation: opponent sample o uses coplayer seed
// DeriveSeed(base, {o}) and repeat r uses env seed DeriveSeed(base, {o, r}).
// Every genome evaluated with the same base faces the same co-players.
struct EvalSeeds {
  std::uint64_t base = 0;
  int opponent_samples = 1;
  int env_repeats = 1;

  std::uint64_t Coplayer(int o) const { return DeriveSeed(base, {std::uint64_t(o)}); }
  std::uint64_t Env(int o, int r) const {
    return DeriveSeed(base, {std::uint64_t(o), std::uint64_t(r)});
  }
};

struct GenomeEvaluation {
  double fitness = 0.0;
  // Means over the evaluated trials of the converged-window metrics.
  double welfare = 0.0;
  double shaper_norm = 0.0;
  double coplayer_norm = 0.0;
};

GenomeEvaluation EvaluateGenome(std::span<const double> genome,
                                const ShaperSpec& spec, const EvalSeeds& seeds,
                                GroupFitness fitness);

struct TrainConfig {
  EsConfig es;
  int generations = 100;
  int opponent_samples = 10;
  int env_repeats = 2;
  GroupFitness fitness = GroupFitness::kSum;
  int workers = 1;
  std::uint64_t seed = 0;
  // Stop early once mean fitness plateaus (0 disables).
  int plateau_window = 0;
  double plateau_tol = 0.01;

  void Validate() const;
};

struct GenerationMetrics {
  std::int64_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double elite_fitness = 0.0;
  double mean_welfare = 0.0;
  double mean_shaper_norm = 0.0;
  double mean_coplayer_norm = 0.0;
  double sigma = 0.0;
  double lrate = 0.0;

  nlohmann::json ToJson() const;
  static GenerationMetrics FromJson(const nlohmann::json& j);
};

inline constexpr const char* kTrainerFormat = "shaping.trainer.v1";

// ES over group genomes. Each generation draws its noise and co-player
// seeds from the master seed and the generation index alone, so a resumed
// run continues exactly where an uninterrupted one would be.
class ShaperTrainer {
 public:
  ShaperTrainer(ShaperSpec spec, TrainConfig config);

  // Runs one generation and returns its metrics.
  const GenerationMetrics& Step();
  bool Done() const;

  const EsState& state() const { return state_; }
  const std::vector<GenerationMetrics>& history() const { return history_; }
  const GroupGenome& elite() const { return elite_; }
  double elite_fitness() const { return elite_fitness_; }
  const ShaperSpec& spec() const { return spec_; }
  const TrainConfig& config() const { return config_; }

  // Co-player seed base used in generation g.
  std::uint64_t TrainSeedBase(std::int64_t g) const;

  nlohmann::json ToJson() const;
  // Restores progress saved by ToJson into a trainer built from the same
  // spec and config. Throws std::runtime_error on format or size mismatch.
  void Restore(const nlohmann::json& j);

 private:
  ShaperSpec spec_;
  TrainConfig config_;
  OpenEs es_;
  EsState state_;
  GroupGenome elite_;
  double elite_fitness_;
  std::vector<GenerationMetrics> history_;
};

// Convenience wrapper: runs `config.generations` generations (or until
// plateau).
struct TrainResult {
  GroupGenome mean;
  GroupGenome elite;
  std::vector<GenerationMetrics> history;
};
TrainResult TrainShapers(const ShaperSpec& spec, const TrainConfig& config);

// Evaluation seeds are drawn from a stream disjoint from training; the
// function checks the actual seed values against every training seed base
// of `train_generations` generations and throws std::logic_error on overlap.
std::vector<std::uint64_t> EvalSeedList(std::uint64_t master_seed,
                                        int num_trials,
                                        std::int64_t train_generations);

std::vector<TrialRecord> EvaluateTrained(std::span<const double> genome,
                                         const ShaperSpec& spec,
                                         std::span<const std::uint64_t> seeds,
                                         int workers = 1);

// Runs fn(i) for i in [0, count) on `workers` threads. Exceptions are
// rethrown on the calling thread (lowest index first).
void ParallelFor(int count, int workers, const std::function<void(int)>& fn);

}  // namespace shaping

#endif  // SHAPING_SHAPER_HPP_
