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

#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace shaping::cli {

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kShaper:
      return "shaper";
    case Method::kLola:
      return "lola";
    case Method::kNaive:
      return "naive";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  if (name == "shaper") return Method::kShaper;
  if (name == "lola") return Method::kLola;
  if (name == "naive") return Method::kNaive;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected shaper|lola|naive)");
}

std::string_view PresetName(Preset p) {
  switch (p) {
    case Preset::kPaper:
      return "paper";
    case Preset::kDesk:
      return "desk";
    case Preset::kCi:
      return "ci";
  }
  return "unknown";
}

void ApplyPreset(Preset preset, ExperimentConfig& c) {
  c.preset = preset;
  switch (preset) {
    case Preset::kPaper:
      c.trial.episodes = 1000;
      c.trial.episode_length = 100;
      c.train.es.population = 100;
      c.train.opponent_samples = 10;
      c.train.env_repeats = 2;
      c.train.generations = 2000;
      c.train.plateau_window = 50;
      c.eval_trials = 5;
      break;
    case Preset::kDesk:
      c.trial.episodes = 100;
      c.trial.episode_length = 25;
      c.train.es.population = 32;
      c.train.opponent_samples = 1;
      c.train.env_repeats = 1;
      c.train.generations = 60;
      c.train.plateau_window = 0;
      c.eval_trials = 4;
      break;
    case Preset::kCi:
      c.trial.episodes = 20;
      c.trial.episode_length = 10;
      c.train.es.population = 8;
      c.train.opponent_samples = 1;
      c.train.env_repeats = 1;
      c.train.generations = 3;
      c.train.plateau_window = 0;
      c.eval_trials = 2;
      break;
  }
}

std::string ExperimentConfig::Cell::Name() const {
  std::string name = std::string(GameKindName(game)) + "_n" +
                     std::to_string(n_players) + "_" +
                     std::string(MethodName(method));
  if (method != Method::kNaive) name += std::to_string(shaper_count);
  return name;
}

std::vector<ExperimentConfig::Cell> ExperimentConfig::Cells() const {
  std::vector<Cell> cells;
  for (GameKind g : games) {
    for (int n : n_players) {
      for (Method m : methods) {
        if (m == Method::kNaive) {
          cells.push_back({g, n, 0, m});
          continue;
        }
        for (int s : shaper_counts) {
          if (s >= 1 && s <= n) cells.push_back({g, n, s, m});
        }
      }
    }
  }
  return cells;
}

ShaperSpec ExperimentConfig::SpecFor(const Cell& cell) const {
  ShaperSpec spec;
  spec.trial = trial;
  spec.trial.game = game;
  spec.trial.game.kind = cell.game;
  spec.trial.game.n_players = cell.n_players;
  spec.num_shapers = std::max(1, cell.shaper_count);
  spec.coplayer = coplayer;
  return spec;
}

TrainConfig ExperimentConfig::TrainFor(std::uint64_t seed) const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

namespace {

std::string Where(const std::string& source, const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.line < 0) return source;
  return source + ":" + std::to_string(m.line + 1);
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const YAML::Node& node, const std::string& key,
                         const std::string& message) const {
    throw ConfigError(Where(source_, node) + ": key '" + key + "': " + message);
  }

  template <typename T>
  T As(const YAML::Node& node, const std::string& key) const {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      Fail(node, key, "cannot parse '" + Scalar(node) + "'");
    }
  }

  template <typename T>
  std::vector<T> List(const YAML::Node& node, const std::string& key) const {
    std::vector<T> out;
    if (node.IsScalar()) {
      out.push_back(As<T>(node, key));
    } else if (node.IsSequence()) {
      for (const YAML::Node& item : node) out.push_back(As<T>(item, key));
    } else {
      Fail(node, key, "expected a value or a list");
    }
    if (out.empty()) Fail(node, key, "list must not be empty");
    return out;
  }

  // Dispatches each entry of `map` to its handler; unknown keys fail.
  void Map(const YAML::Node& map, const std::string& prefix,
           const std::map<std::string,
                          std::function<void(const YAML::Node&, const std::string&)>>&
               handlers) const {
    if (!map.IsMap()) Fail(map, prefix, "expected a mapping");
    for (const auto& kv : map) {
      const std::string key = kv.first.as<std::string>();
      const std::string full = prefix.empty() ? key : prefix + "." + key;
      const auto it = handlers.find(key);
      if (it == handlers.end()) Fail(kv.first, full, "unknown key");
      try {
        it->second(kv.second, full);
      } catch (const std::invalid_argument& e) {
        Fail(kv.second, full, e.what());
      }
    }
  }

  const std::string& source() const { return source_; }

 private:
  static std::string Scalar(const YAML::Node& node) {
    return node.IsScalar() ? node.Scalar() : std::string("<non-scalar>");
  }
  std::string source_;
};

using Handler = std::function<void(const YAML::Node&, const std::string&)>;

template <typename T>
Handler Set(const Reader& r, T& target) {
  return [&r, &target](const YAML::Node& n, const std::string& key) {
    target = r.As<T>(n, key);
  };
}

Handler SetOptionalInt(const Reader& r, std::optional<int>& target) {
  return [&r, &target](const YAML::Node& n, const std::string& key) {
    if (n.IsNull()) {
      target.reset();
    } else {
      target = r.As<int>(n, key);
    }
  };
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  const Reader r(source);
  if (!root.IsMap()) r.Fail(root, "<root>", "expected a mapping");

  // The preset supplies defaults that the remaining keys override.
  if (root["preset"]) {
    const std::string p = r.As<std::string>(root["preset"], "preset");
    if (p == "paper") {
      ApplyPreset(Preset::kPaper, c);
    } else if (p == "desk") {
      ApplyPreset(Preset::kDesk, c);
    } else if (p == "ci") {
      ApplyPreset(Preset::kCi, c);
    } else {
      r.Fail(root["preset"], "preset", "expected paper|desk|ci, got '" + p + "'");
    }
  } else {
    ApplyPreset(Preset::kDesk, c);
  }

  PpoConfig& ppo = c.trial.ppo;
  LolaConfig& lola = c.trial.lola;
  EsConfig& es = c.train.es;
  TrainConfig& train = c.train;

  r.Map(root, "", {
      {"preset", [](const YAML::Node&, const std::string&) {}},
      {"games", [&](const YAML::Node& n, const std::string& k) {
         c.games.clear();
         for (const std::string& g : r.List<std::string>(n, k)) {
           c.games.push_back(ParseGameKind(g));
         }
       }},
      {"n_players", [&](const YAML::Node& n, const std::string& k) {
         c.n_players = r.List<int>(n, k);
       }},
      {"shaper_counts", [&](const YAML::Node& n, const std::string& k) {
         c.shaper_counts = r.List<int>(n, k);
       }},
      {"methods", [&](const YAML::Node& n, const std::string& k) {
         c.methods.clear();
         for (const std::string& m : r.List<std::string>(n, k)) {
           c.methods.push_back(ParseMethod(m));
         }
       }},
      {"coplayer", [&](const YAML::Node& n, const std::string& k) {
         c.coplayer = ParseSeatKind(r.As<std::string>(n, k));
       }},
      {"seeds", [&](const YAML::Node& n, const std::string& k) {
         c.seeds = r.List<std::uint64_t>(n, k);
         std::set<std::uint64_t> uniq(c.seeds.begin(), c.seeds.end());
         if (uniq.size() != c.seeds.size()) r.Fail(n, k, "seeds must be distinct");
       }},
      {"output", [&](const YAML::Node& n, const std::string& k) {
         c.output = r.As<std::string>(n, k);
       }},
      {"game", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"benefit", Set(r, c.game.benefit)},
             {"cost", Set(r, c.game.cost)},
             {"total_cost", Set(r, c.game.total_cost)},
             {"threshold", SetOptionalInt(r, c.game.threshold)},
             {"hunt_cost", Set(r, c.game.hunt_cost)},
             {"reward", Set(r, c.game.reward)},
             {"stag_threshold", SetOptionalInt(r, c.game.stag_threshold)},
         });
       }},
      {"trial", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"episodes", Set(r, c.trial.episodes)},
             {"episode_length", Set(r, c.trial.episode_length)},
             {"hidden_dim", Set(r, c.trial.hidden_dim)},
         });
       }},
      {"ppo", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"minibatches", Set(r, ppo.minibatches)},
             {"epochs", Set(r, ppo.epochs)},
             {"gamma", Set(r, ppo.gamma)},
             {"gae_lambda", Set(r, ppo.gae_lambda)},
             {"clip_eps", Set(r, ppo.clip_eps)},
             {"value_coef", Set(r, ppo.value_coef)},
             {"clip_value", Set(r, ppo.clip_value)},
             {"max_grad_norm", Set(r, ppo.max_grad_norm)},
             {"entropy_coef", Set(r, ppo.entropy_coef)},
             {"lr", Set(r, ppo.lr)},
             {"adam_eps", Set(r, ppo.adam_eps)},
             {"normalize_advantages", Set(r, ppo.normalize_advantages)},
         });
       }},
      {"lola", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"inner_lr", Set(r, lola.inner_lr)},
             {"lookahead_steps", Set(r, lola.lookahead_steps)},
             {"batch_size", Set(r, lola.batch_size)},
             {"outer_lr", Set(r, lola.outer_lr)},
             {"discount", Set(r, lola.discount)},
             {"use_baseline", Set(r, lola.use_baseline)},
             {"value_coef", Set(r, lola.value_coef)},
         });
       }},
      {"es", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"population", Set(r, es.population)},
             {"sigma_init", Set(r, es.sigma_init)},
             {"sigma_decay", Set(r, es.sigma_decay)},
             {"sigma_limit", Set(r, es.sigma_limit)},
             {"lrate_init", Set(r, es.lrate_init)},
             {"lrate_decay", Set(r, es.lrate_decay)},
             {"lrate_limit", Set(r, es.lrate_limit)},
             {"init_min", Set(r, es.init_min)},
             {"init_max", Set(r, es.init_max)},
             {"clip_min", Set(r, es.clip_min)},
             {"clip_max", Set(r, es.clip_max)},
             {"beta1", Set(r, es.beta1)},
             {"beta2", Set(r, es.beta2)},
             {"eps", Set(r, es.eps)},
         });
       }},
      {"train", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"generations", Set(r, train.generations)},
             {"opponent_samples", Set(r, train.opponent_samples)},
             {"env_repeats", Set(r, train.env_repeats)},
             {"fitness", [&](const YAML::Node& v, const std::string& key) {
                train.fitness = ParseGroupFitness(r.As<std::string>(v, key));
              }},
             {"plateau_window", Set(r, train.plateau_window)},
             {"plateau_tol", Set(r, train.plateau_tol)},
             {"checkpoint_every", Set(r, c.checkpoint_every)},
         });
       }},
      {"evaluate", [&](const YAML::Node& n, const std::string& k) {
         r.Map(n, k, {
             {"trials", Set(r, c.eval_trials)},
             {"genome", [&](const YAML::Node& v, const std::string& key) {
                const std::string g = r.As<std::string>(v, key);
                if (g != "mean" && g != "elite") {
                  r.Fail(v, key, "expected mean|elite, got '" + g + "'");
                }
                c.eval_elite = g == "elite";
              }},
         });
       }},
  });

  // Whole-config checks, reported against the offending section.
  auto check = [&](const char* key, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      const YAML::Node n = root[key] ? root[key] : root;
      r.Fail(n, key, e.what());
    }
  };
  for (int n : c.n_players) {
    if (n < 2 || n > 16) r.Fail(root["n_players"], "n_players", "values must be in [2, 16]");
  }
  for (int s : c.shaper_counts) {
    if (s < 1) r.Fail(root["shaper_counts"], "shaper_counts", "values must be >= 1");
  }
  check("trial", [&] {
    for (const auto& cell : c.Cells()) c.SpecFor(cell).Validate();
  });
  check("es", [&] { c.train.Validate(); });
  if (c.checkpoint_every < 1) {
    r.Fail(root["train"] ? root["train"] : root, "train.checkpoint_every", "must be >= 1");
  }
  if (c.eval_trials < 1) {
    r.Fail(root["evaluate"] ? root["evaluate"] : root, "evaluate.trials", "must be >= 1");
  }
  if (c.Cells().empty()) r.Fail(root, "shaper_counts", "grid has no valid cells");
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), path);
}

std::string ResolveOutputRoot(const ExperimentConfig& config,
                              const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (config.output) return *config.output;
  if (const char* env = std::getenv("SHAPING_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

}  // namespace shaping::cli
