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

#include "shaping/shaper.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "shaping/checkpoint.hpp"
#include "shaping/metrics.hpp"

namespace shaping {

namespace {

constexpr std::uint64_t kAskStream = 0;
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;
constexpr std::uint64_t kInitStream = 3;

std::vector<double> Copy(std::span<const double> s) { return {s.begin(), s.end()}; }

}  // namespace

void TrialConfig::Validate() const {
  game.Validate();
  if (episode_length < 1) throw std::invalid_argument("trial: episode_length must be >= 1");
  if (episodes < 1) throw std::invalid_argument("trial: episodes must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("trial: hidden_dim must be >= 1");
  ppo.Validate();
  lola.Validate();
}

std::vector<SeatKind> ShaperSpec::Seats() const {
  std::vector<SeatKind> seats(num_shapers, SeatKind::kShaper);
  seats.resize(trial.game.n_players, coplayer);
  return seats;
}

std::size_t ShaperSpec::ParamsPerShaper() const {
  return GruParamCount(trial.game.NumObservations(), trial.hidden_dim);
}

std::size_t ShaperSpec::GenomeSize() const {
  return ParamsPerShaper() * static_cast<std::size_t>(num_shapers);
}

void ShaperSpec::Validate() const {
  trial.Validate();
  if (num_shapers < 1) throw std::invalid_argument("shaper: num_shapers must be >= 1");
  if (num_coplayers() < 0) {
    throw std::invalid_argument("shaper: num_shapers exceeds n_players");
  }
  if (coplayer == SeatKind::kShaper) {
    throw std::invalid_argument("shaper: co-player kind must be naive or lola");
  }
}

TrialRecord RunTrial(std::span<const SeatKind> seats,
                     std::span<const Policy* const> shaper_policies,
                     const TrialConfig& config, std::uint64_t coplayer_seed,
                     std::uint64_t env_seed, const EpisodeHook& hook) {
  const int n = config.game.n_players;
  if (static_cast<int>(seats.size()) != n) {
    throw std::invalid_argument("run_trial: " + std::to_string(seats.size()) +
                                " seats for a " + std::to_string(n) +
                                "-player game");
  }
  const int input_dim = config.game.NumObservations();
  const int hdim = config.hidden_dim;

  std::vector<std::unique_ptr<NaiveLearner>> naive(n);
  std::vector<std::unique_ptr<LolaLearner>> lola(n);
  std::vector<const Policy*> acting(n, nullptr);
  std::vector<const GruPolicy*> gru(n, nullptr);
  std::size_t next_shaper = 0;
  bool any_lola = false;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = DeriveSeed(coplayer_seed, {std::uint64_t(i)});
    switch (seats[i]) {
      case SeatKind::kShaper:
        if (next_shaper >= shaper_policies.size()) {
          throw std::invalid_argument("run_trial: not enough shaper policies");
        }
        acting[i] = shaper_policies[next_shaper++];
        gru[i] = dynamic_cast<const GruPolicy*>(acting[i]);
        break;
      case SeatKind::kNaive:
        naive[i] = std::make_unique<NaiveLearner>(input_dim, hdim, seed);
        acting[i] = gru[i] = &naive[i]->policy();
        break;
      case SeatKind::kLola:
        lola[i] = std::make_unique<LolaLearner>(input_dim, hdim, seed);
        acting[i] = gru[i] = &lola[i]->policy();
        any_lola = true;
        break;
    }
  }
  if (next_shaper != shaper_policies.size()) {
    throw std::invalid_argument("run_trial: more shaper policies than shaper seats");
  }
  if (any_lola) {
    for (int i = 0; i < n; ++i) {
      if (gru[i] == nullptr) {
        throw std::invalid_argument(
            "run_trial: LOLA seats need GRU policies in every seat");
      }
    }
  }

  std::vector<std::vector<double>> hiddens(n);
  for (int i = 0; i < n; ++i) hiddens[i].assign(acting[i]->HiddenSize(), 0.0);

  TrialRecord record;
  record.episode_length = config.episode_length;
  record.seats.assign(seats.begin(), seats.end());
  record.returns.reserve(config.episodes);
  record.cooperation.reserve(config.episodes);
  record.welfare.reserve(config.episodes);
  record.trial_reward.assign(shaper_policies.size(), 0.0);

  auto snapshot = [&] {
    std::vector<std::vector<double>> p(n);
    for (int i = 0; i < n; ++i) {
      if (gru[i] != nullptr) p[i] = gru[i]->params();
    }
    return p;
  };

  Rng env(env_seed);
  for (int e = 0; e < config.episodes; ++e) {
    std::vector<Trajectory> trajs =
        PlayEpisode(acting, hiddens, config.game, config.episode_length, env);

    std::vector<double> ret(n), coop(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      ret[i] = trajs[i].Return();
      coop[i] = trajs[i].CooperationRate();
      total += ret[i];
    }
    std::size_t s = 0;
    for (int i = 0; i < n; ++i) {
      if (seats[i] == SeatKind::kShaper) record.trial_reward[s++] += ret[i];
    }
    record.returns.push_back(std::move(ret));
    record.cooperation.push_back(std::move(coop));
    record.welfare.push_back(total / config.episode_length);

    EpisodeEvent event;
    if (hook) {
      event.episode = e;
      event.params_before = snapshot();
    }

    // Simultaneous updates: LOLA seats read the pre-update parameters of
    // every other seat.
    if (any_lola) {
      std::vector<GruPolicy> frozen;
      frozen.reserve(n);
      for (int i = 0; i < n; ++i) frozen.push_back(*gru[i]);
      for (int i = 0; i < n; ++i) {
        if (!lola[i]) continue;
        std::vector<const GruPolicy*> view(n);
        for (int j = 0; j < n; ++j) view[j] = j == i ? gru[i] : &frozen[j];
        try {
          lola[i]->Update(view, hiddens, i, config.game, config.episode_length,
                          config.lola);
        } catch (const std::runtime_error& err) {
          throw std::runtime_error("run_trial: episode " + std::to_string(e) +
                                   " seat " + std::to_string(i) +
                                   " (lola): " + err.what());
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!naive[i]) continue;
      try {
        naive[i]->Update(trajs[i], config.ppo);
      } catch (const std::exception& err) {
        throw std::runtime_error("run_trial: episode " + std::to_string(e) +
                                 " seat " + std::to_string(i) +
                                 " (naive): " + err.what());
      }
    }

    if (hook) {
      event.trajectories = &trajs;
      event.params_after = snapshot();
      event.hidden_after = hiddens;
      hook(event);
    }
  }
  return record;
}

TrialRecord RunTrial(std::span<const double> genome, const ShaperSpec& spec,
                     std::uint64_t coplayer_seed, std::uint64_t env_seed,
                     const EpisodeHook& hook) {
  if (genome.size() != spec.GenomeSize()) {
    throw std::invalid_argument("run_trial: genome has " +
                                std::to_string(genome.size()) +
                                " values, spec needs " +
                                std::to_string(spec.GenomeSize()));
  }
  const int input_dim = spec.trial.game.NumObservations();
  const std::size_t per = spec.ParamsPerShaper();
  std::vector<GruPolicy> shapers;
  shapers.reserve(spec.num_shapers);
  for (int s = 0; s < spec.num_shapers; ++s) {
    shapers.emplace_back(input_dim, spec.trial.hidden_dim,
                         Copy(genome.subspan(s * per, per)));
  }
  std::vector<const Policy*> ptrs;
  for (const GruPolicy& p : shapers) ptrs.push_back(&p);
  const std::vector<SeatKind> seats = spec.Seats();
  return RunTrial(seats, ptrs, spec.trial, coplayer_seed, env_seed, hook);
}

std::string_view GroupFitnessName(GroupFitness f) {
  switch (f) {
    case GroupFitness::kSum:
      return "sum";
    case GroupFitness::kMean:
      return "mean";
    case GroupFitness::kMin:
      return "min";
  }
  return "unknown";
}

GroupFitness ParseGroupFitness(std::string_view name) {
  if (name == "sum") return GroupFitness::kSum;
  if (name == "mean") return GroupFitness::kMean;
  if (name == "min") return GroupFitness::kMin;
  throw std::invalid_argument("unknown group fitness '" + std::string(name) +
                              "' (expected sum|mean|min)");
}

GenomeEvaluation EvaluateGenome(std::span<const double> genome,
                                const ShaperSpec& spec, const EvalSeeds& seeds,
                                GroupFitness fitness) {
  if (seeds.opponent_samples < 1 || seeds.env_repeats < 1) {
    throw std::invalid_argument("evaluate_genome: repeat counts must be >= 1");
  }
  GenomeEvaluation out;
  const int window = DefaultWindow(spec.trial.episodes);
  std::vector<int> shaper_seats(spec.num_shapers);
  for (int s = 0; s < spec.num_shapers; ++s) shaper_seats[s] = s;
  int trials = 0;
  for (int o = 0; o < seeds.opponent_samples; ++o) {
    for (int r = 0; r < seeds.env_repeats; ++r) {
      const TrialRecord rec =
          RunTrial(genome, spec, seeds.Coplayer(o), seeds.Env(o, r));
      double group = 0.0;
      switch (fitness) {
        case GroupFitness::kSum:
          for (double j : rec.trial_reward) group += j;
          break;
        case GroupFitness::kMean:
          for (double j : rec.trial_reward) group += j;
          group /= static_cast<double>(rec.trial_reward.size());
          break;
        case GroupFitness::kMin:
          group = *std::min_element(rec.trial_reward.begin(),
                                    rec.trial_reward.end());
          break;
      }
      out.fitness += group;
      out.welfare += NormalizedGlobalWelfare(rec, spec.trial.game, window);
      const RoleReturns roles =
          ComputeRoleReturns(rec, spec.trial.game, shaper_seats, window);
      out.shaper_norm += roles.shaper_norm.value_or(0.0);
      out.coplayer_norm += roles.naive_norm.value_or(0.0);
      ++trials;
    }
  }
  out.fitness /= trials;
  out.welfare /= trials;
  out.shaper_norm /= trials;
  out.coplayer_norm /= trials;
  return out;
}

void TrainConfig::Validate() const {
  es.Validate();
  if (generations < 0) throw std::invalid_argument("train: generations must be >= 0");
  if (opponent_samples < 1) {
    throw std::invalid_argument("train: opponent_samples must be >= 1");
  }
  if (env_repeats < 1) throw std::invalid_argument("train: env_repeats must be >= 1");
  if (workers < 1) throw std::invalid_argument("train: workers must be >= 1");
  if (plateau_window < 0) {
    throw std::invalid_argument("train: plateau_window must be >= 0");
  }
}

nlohmann::json GenerationMetrics::ToJson() const {
  return {{"generation", generation},
          {"best_fitness", best_fitness},
          {"mean_fitness", mean_fitness},
          {"elite_fitness", elite_fitness},
          {"mean_welfare", mean_welfare},
          {"mean_shaper_norm", mean_shaper_norm},
          {"mean_coplayer_norm", mean_coplayer_norm},
          {"sigma", sigma},
          {"lrate", lrate}};
}

GenerationMetrics GenerationMetrics::FromJson(const nlohmann::json& j) {
  GenerationMetrics m;
  m.generation = j.at("generation").get<std::int64_t>();
  m.best_fitness = j.at("best_fitness").get<double>();
  m.mean_fitness = j.at("mean_fitness").get<double>();
  m.elite_fitness = j.at("elite_fitness").get<double>();
  m.mean_welfare = j.at("mean_welfare").get<double>();
  m.mean_shaper_norm = j.at("mean_shaper_norm").get<double>();
  m.mean_coplayer_norm = j.at("mean_coplayer_norm").get<double>();
  m.sigma = j.at("sigma").get<double>();
  m.lrate = j.at("lrate").get<double>();
  return m;
}

void ParallelFor(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ShaperTrainer::ShaperTrainer(ShaperSpec spec, TrainConfig config)
    : spec_(std::move(spec)),
      config_(std::move(config)),
      es_(config_.es),
      elite_fitness_(-std::numeric_limits<double>::infinity()) {
  spec_.Validate();
  config_.Validate();
  Rng init(DeriveSeed(config_.seed, {kInitStream}));
  state_ = EsState::Initialize(spec_.GenomeSize(), config_.es, init);
  elite_ = state_.mean;
}

std::uint64_t ShaperTrainer::TrainSeedBase(std::int64_t g) const {
  return DeriveSeed(config_.seed, {kTrainStream, std::uint64_t(g)});
}

bool ShaperTrainer::Done() const {
  if (static_cast<int>(history_.size()) >= config_.generations) return true;
  if (config_.plateau_window > 0) {
    std::vector<double> series;
    for (const GenerationMetrics& m : history_) series.push_back(m.mean_fitness);
    return HasPlateaued(series, config_.plateau_window,
                        2 * config_.plateau_window, config_.plateau_tol);
  }
  return false;
}

const GenerationMetrics& ShaperTrainer::Step() {
  const std::int64_t g = state_.generation;
  Rng ask(DeriveSeed(config_.seed, {kAskStream, std::uint64_t(g)}));
  const EsPopulation pop = es_.Ask(state_, ask);
  const int count = static_cast<int>(pop.candidates.size());
  const EvalSeeds seeds{TrainSeedBase(g), config_.opponent_samples,
                        config_.env_repeats};
  std::vector<GenomeEvaluation> evals(count);
  ParallelFor(count, config_.workers, [&](int i) {
    evals[i] = EvaluateGenome(pop.candidates[i], spec_, seeds, config_.fitness);
  });

  GenerationMetrics m;
  m.generation = g;
  m.sigma = state_.sigma;
  m.lrate = state_.lrate;
  std::vector<double> fitness(count);
  int best = 0;
  for (int i = 0; i < count; ++i) {
    fitness[i] = evals[i].fitness;
    m.mean_fitness += evals[i].fitness;
    m.mean_welfare += evals[i].welfare;
    m.mean_shaper_norm += evals[i].shaper_norm;
    m.mean_coplayer_norm += evals[i].coplayer_norm;
    if (fitness[i] > fitness[best]) best = i;
  }
  m.mean_fitness /= count;
  m.mean_welfare /= count;
  m.mean_shaper_norm /= count;
  m.mean_coplayer_norm /= count;
  m.best_fitness = fitness[best];
  if (fitness[best] > elite_fitness_) {
    elite_fitness_ = fitness[best];
    elite_ = pop.candidates[best];
  }
  m.elite_fitness = elite_fitness_;

  es_.Tell(state_, pop, fitness);
  history_.push_back(m);
  return history_.back();
}

nlohmann::json ShaperTrainer::ToJson() const {
  nlohmann::json hist = nlohmann::json::array();
  for (const GenerationMetrics& m : history_) hist.push_back(m.ToJson());
  return {{"format", kTrainerFormat},
          {"genome_size", spec_.GenomeSize()},
          {"es", state_.ToJson()},
          {"elite", elite_},
          {"elite_fitness", elite_fitness_},
          {"history", hist}};
}

void ShaperTrainer::Restore(const nlohmann::json& j) {
  if (j.value("format", std::string()) != kTrainerFormat) {
    throw std::runtime_error("trainer checkpoint: expected format " +
                             std::string(kTrainerFormat));
  }
  if (j.at("genome_size").get<std::size_t>() != spec_.GenomeSize()) {
    throw std::runtime_error("trainer checkpoint: genome size does not match spec");
  }
  EsState state = EsState::FromJson(j.at("es"));
  if (state.mean.size() != spec_.GenomeSize()) {
    throw std::runtime_error("trainer checkpoint: ES mean size mismatch");
  }
  std::vector<GenerationMetrics> hist;
  for (const auto& m : j.at("history")) hist.push_back(GenerationMetrics::FromJson(m));
  if (static_cast<std::int64_t>(hist.size()) != state.generation) {
    throw std::runtime_error("trainer checkpoint: history length does not match generation");
  }
  state_ = std::move(state);
  elite_ = j.at("elite").get<std::vector<double>>();
  // -inf is stored as null when no generation ran yet.
  elite_fitness_ = j.at("elite_fitness").is_null()
                       ? -std::numeric_limits<double>::infinity()
                       : j.at("elite_fitness").get<double>();
  history_ = std::move(hist);
}

TrainResult TrainShapers(const ShaperSpec& spec, const TrainConfig& config) {
  ShaperTrainer trainer(spec, config);
  while (!trainer.Done()) trainer.Step();
  return {trainer.state().mean, trainer.elite(), trainer.history()};
}

std::vector<std::uint64_t> EvalSeedList(std::uint64_t master_seed,
                                        int num_trials,
                                        std::int64_t train_generations) {
  std::set<std::uint64_t> train;
  for (std::int64_t g = 0; g < train_generations; ++g) {
    train.insert(DeriveSeed(master_seed, {kTrainStream, std::uint64_t(g)}));
  }
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < num_trials; ++i) {
    const std::uint64_t s = DeriveSeed(master_seed, {kEvalStream, std::uint64_t(i)});
    if (train.contains(s)) {
      throw std::logic_error("evaluation seed collides with a training seed");
    }
    seeds.push_back(s);
  }
  return seeds;
}

std::vector<TrialRecord> EvaluateTrained(std::span<const double> genome,
                                         const ShaperSpec& spec,
                                         std::span<const std::uint64_t> seeds,
                                         int workers) {
  std::vector<TrialRecord> out(seeds.size());
  ParallelFor(static_cast<int>(seeds.size()), workers, [&](int i) {
    const EvalSeeds s{seeds[i], 1, 1};
    out[i] = RunTrial(genome, spec, s.Coplayer(0), s.Env(0, 0));
  });
  return out;
}

}  // namespace shaping
