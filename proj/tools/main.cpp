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

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using shaping::cli::RunOptions;

void AddRunFlags(CLI::App* cmd, RunOptions& o, std::optional<std::uint64_t>& seed,
                 std::optional<std::string>& out) {
  cmd->add_option("--config", o.config_path, "Experiment config (YAML)")->required();
  cmd->add_option("--seed", seed, "Run only this seed instead of the config's list");
  cmd->add_option("--workers", o.workers, "Parallel genome evaluations")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", out, "Output root (else config output, $SHAPING_OUT, ./runs)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"N-player opponent-shaping experiments"};
  app.require_subcommand(1);

  RunOptions run;
  run.log = &std::cerr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  auto* train = app.add_subcommand("train", "Train shapers for every grid cell and seed");
  AddRunFlags(train, run, seed, out);
  train->add_flag("--resume", run.resume, "Continue from existing checkpoints");

  std::optional<std::string> checkpoint;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate against unseen co-players");
  AddRunFlags(evaluate, run, seed, out);
  evaluate->add_option("--checkpoint", checkpoint,
                       "Checkpoint to evaluate (default: each cell's own)");

  auto* sweep = app.add_subcommand("sweep", "Train and evaluate the whole grid");
  AddRunFlags(sweep, run, seed, out);
  sweep->add_flag("--resume", run.resume, "Skip finished cells");

  std::vector<std::string> csvs;
  std::string plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "Render SVG figures from report CSVs");
  plot->add_option("csv", csvs, "Report CSV files")->required();
  plot->add_option("--out", plot_out, "Directory for the SVG files");

  std::string game = "ipd";
  int players = 3;
  std::map<std::string, double> params;
  std::vector<std::string> param_args;
  std::string layout = "auto";
  std::optional<std::string> table_out;
  auto* payoff = app.add_subcommand("payoff-table", "Print a game's payoff table");
  payoff->add_option("--game", game, "ipd|snowdrift|toc|staghunt");
  payoff->add_option("--players", players, "Number of players")->check(CLI::Range(2, 16));
  payoff->add_option("--param", param_args, "Payoff constant as key=value (repeatable)");
  payoff->add_option("--layout", layout, "auto|full|summary");
  payoff->add_option("--out", table_out, "Write CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);
  run.seed = seed;
  run.out = out;

  try {
    if (*train) return shaping::cli::CmdTrain(run);
    if (*evaluate) return shaping::cli::CmdEvaluate(run, checkpoint);
    if (*sweep) return shaping::cli::CmdSweep(run);
    if (*plot) return shaping::cli::CmdPlot(csvs, plot_out, &std::cerr);
    if (*payoff) {
      for (const std::string& kv : param_args) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
          std::cerr << "error: --param expects key=value, got '" << kv << "'\n";
          return 2;
        }
        params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      }
      return shaping::cli::CmdPayoffTable(game, players, params, layout, table_out);
    }
  } catch (const shaping::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
