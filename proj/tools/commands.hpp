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

#ifndef SHAPING_TOOLS_COMMANDS_HPP_
#define SHAPING_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "shaping/metrics.hpp"

namespace shaping::cli {

inline constexpr const char* kCheckpointFormat = "shaping.checkpoint.v1";

struct RunOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool resume = false;
  std::optional<std::string> out;
  std::ostream* log = nullptr;
};

// Loads the config and applies --seed / --workers.
ExperimentConfig PrepareConfig(const RunOptions& options);

std::string CellDir(const std::string& root, const ExperimentConfig::Cell& cell,
                    std::uint64_t seed);

// Trains one shaper cell for one seed, writing metrics.jsonl and
// checkpoint.json under CellDir. With `resume`, picks up from an existing
// checkpoint. Returns the checkpoint path.
std::string TrainCell(const ExperimentConfig& config,
                      const ExperimentConfig::Cell& cell, std::uint64_t seed,
                      const std::string& root, bool resume, std::ostream* log);

// Per-seed report for a cell: SHAPER cells evaluate the given checkpoint,
// the other methods run their own trials. Values are means over the
// evaluation trials.
WelfareReport EvaluateCell(const ExperimentConfig& config,
                           const ExperimentConfig::Cell& cell,
                           std::uint64_t seed,
                           const std::optional<std::string>& checkpoint);

int CmdTrain(const RunOptions& options);
int CmdEvaluate(const RunOptions& options,
                const std::optional<std::string>& checkpoint);
int CmdSweep(const RunOptions& options);
int CmdPlot(const std::vector<std::string>& csv_paths,
            const std::string& out_dir, std::ostream* log);

// Layout: full rows over the number of cooperating co-players, or
// the two-column threshold summary for the commons game.
void WritePayoffTable(std::ostream& out, const GameSpec& spec, bool summary);
int CmdPayoffTable(const std::string& game, int n_players,
                   const std::map<std::string, double>& params,
                   const std::string& format, const std::optional<std::string>& out);

}  // namespace shaping::cli

#endif  // SHAPING_TOOLS_COMMANDS_HPP_
