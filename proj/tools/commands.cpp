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

#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "shaping/checkpoint.hpp"
#include "svg.hpp"

namespace shaping::cli {

namespace fs = std::filesystem;

namespace {

void Log(std::ostream* log, const std::string& line) {
  if (log != nullptr) *log << line << std::endl;
}

std::string FormatMetric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Shortest text that reads back to the same double.
std::string Exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

nlohmann::json CellJson(const ExperimentConfig& config,
                        const ExperimentConfig::Cell& cell) {
  const ShaperSpec spec = config.SpecFor(cell);
  return {{"game", GameKindName(cell.game)},
          {"n_players", cell.n_players},
          {"shaper_count", spec.num_shapers},
          {"coplayer", SeatKindName(spec.coplayer)},
          {"episodes", spec.trial.episodes},
          {"episode_length", spec.trial.episode_length},
          {"hidden_dim", spec.trial.hidden_dim},
          {"genome_size", spec.GenomeSize()}};
}

nlohmann::json LoadCheckpoint(const std::string& path) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing checkpoint '" + path +
                             "' (run the train command first)");
  }
  nlohmann::json j = ReadJsonFile(path);
  const std::string format = j.value("format", std::string("<none>"));
  if (format != kCheckpointFormat) {
    throw std::runtime_error("checkpoint '" + path + "' has format '" + format +
                             "', expected '" + kCheckpointFormat + "'");
  }
  return j;
}

void SaveTraining(const ShaperTrainer& trainer, const nlohmann::json& cell,
                  const fs::path& dir) {
  std::string lines;
  for (const GenerationMetrics& m : trainer.history()) {
    lines += m.ToJson().dump() + "\n";
  }
  WriteTextFile(dir / "metrics.jsonl", lines);
  WriteJsonFile(dir / "checkpoint.json", {{"format", kCheckpointFormat},
                                          {"cell", cell},
                                          {"trainer", trainer.ToJson()}});
}

std::vector<int> Range(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

WelfareReport AverageReports(const std::vector<WelfareReport>& trials) {
  ReportSummary s = Summarize(trials);
  WelfareReport row = s.mean;
  row.status = "ok";
  bool all = true;
  int latest = 0;
  for (const WelfareReport& r : trials) {
    if (!r.converged_episode) all = false;
    else latest = std::max(latest, *r.converged_episode);
  }
  if (all) row.converged_episode = latest;
  return row;
}

std::string Sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string RowKey(const WelfareReport& r) {
  return r.game + "|" + std::to_string(r.n_players) + "|" +
         std::to_string(r.shaper_count) + "|" + r.coplayer + "|" + r.method +
         "|" + r.seed;
}

}  // namespace

ExperimentConfig PrepareConfig(const RunOptions& options) {
  ExperimentConfig config = LoadConfig(options.config_path);
  if (options.seed) config.seeds = {*options.seed};
  config.train.workers = std::max(1, options.workers);
  return config;
}

std::string CellDir(const std::string& root, const ExperimentConfig::Cell& cell,
                    std::uint64_t seed) {
  return (fs::path(root) / cell.Name() / ("seed_" + std::to_string(seed))).string();
}

std::string TrainCell(const ExperimentConfig& config,
                      const ExperimentConfig::Cell& cell, std::uint64_t seed,
                      const std::string& root, bool resume, std::ostream* log) {
  const fs::path dir = CellDir(root, cell, seed);
  const fs::path ckpt = dir / "checkpoint.json";
  const nlohmann::json cell_json = CellJson(config, cell);
  ShaperTrainer trainer(config.SpecFor(cell), config.TrainFor(seed));
  if (resume && fs::exists(ckpt)) {
    const nlohmann::json j = LoadCheckpoint(ckpt.string());
    if (j.at("cell") != cell_json) {
      throw std::runtime_error("checkpoint '" + ckpt.string() +
                               "' was written for a different configuration");
    }
    trainer.Restore(j.at("trainer"));
    Log(log, cell.Name() + " seed " + std::to_string(seed) + ": resuming at generation " +
                 std::to_string(trainer.history().size()));
  }
  while (!trainer.Done()) {
    const GenerationMetrics& m = trainer.Step();
    Log(log, cell.Name() + " seed " + std::to_string(seed) + " gen " +
                 std::to_string(m.generation) + " best " + FormatMetric(m.best_fitness) +
                 " mean " + FormatMetric(m.mean_fitness) + " welfare " +
                 FormatMetric(m.mean_welfare));
    if (trainer.history().size() % config.checkpoint_every == 0) {
      SaveTraining(trainer, cell_json, dir);
    }
  }
  SaveTraining(trainer, cell_json, dir);
  return ckpt.string();
}

WelfareReport EvaluateCell(const ExperimentConfig& config,
                           const ExperimentConfig::Cell& cell,
                           std::uint64_t seed,
                           const std::optional<std::string>& checkpoint) {
  const ShaperSpec spec = config.SpecFor(cell);
  const std::vector<std::uint64_t> seeds =
      EvalSeedList(seed, config.eval_trials, config.train.generations);
  const int window = DefaultWindow(spec.trial.episodes);
  const int n = spec.trial.game.n_players;

  std::vector<TrialRecord> records;
  std::vector<int> shaping;
  switch (cell.method) {
    case Method::kShaper: {
      const nlohmann::json j = LoadCheckpoint(*checkpoint);
      if (j.at("cell").at("genome_size").get<std::size_t>() != spec.GenomeSize()) {
        throw std::runtime_error("checkpoint '" + *checkpoint +
                                 "' genome size does not match " + cell.Name());
      }
      const nlohmann::json& t = j.at("trainer");
      const GroupGenome genome = config.eval_elite
                                     ? t.at("elite").get<GroupGenome>()
                                     : t.at("es").at("mean").get<GroupGenome>();
      records = EvaluateTrained(genome, spec, seeds, config.train.workers);
      shaping = Range(spec.num_shapers);
      break;
    }
    case Method::kLola:
    case Method::kNaive: {
      std::vector<SeatKind> seats(n, SeatKind::kNaive);
      if (cell.method == Method::kLola) {
        for (int i = 0; i < cell.shaper_count; ++i) seats[i] = SeatKind::kLola;
        shaping = Range(cell.shaper_count);
      }
      records.resize(seeds.size());
      ParallelFor(static_cast<int>(seeds.size()), config.train.workers, [&](int i) {
        const EvalSeeds s{seeds[i], 1, 1};
        records[i] = RunTrial(seats, {}, spec.trial, s.Coplayer(0), s.Env(0, 0));
      });
      break;
    }
  }
  std::vector<WelfareReport> trials;
  for (const TrialRecord& r : records) {
    trials.push_back(MakeWelfareReport(r, spec.trial.game, shaping, window));
  }
  WelfareReport row = AverageReports(trials);
  row.coplayer = cell.method == Method::kShaper ? std::string(SeatKindName(spec.coplayer))
                                                : "naive";
  row.method = std::string(MethodName(cell.method));
  row.shaper_count = cell.method == Method::kNaive ? 0 : cell.shaper_count;
  row.seed = std::to_string(seed);
  return row;
}

int CmdTrain(const RunOptions& options) {
  const ExperimentConfig config = PrepareConfig(options);
  const std::string root = ResolveOutputRoot(config, options.out);
  int trained = 0;
  for (const auto& cell : config.Cells()) {
    if (cell.method != Method::kShaper) {
      Log(options.log, cell.Name() + ": nothing to train for this method");
      continue;
    }
    for (std::uint64_t seed : config.seeds) {
      const std::string path =
          TrainCell(config, cell, seed, root, options.resume, options.log);
      Log(options.log, "wrote " + path);
      ++trained;
    }
  }
  if (trained == 0) Log(options.log, "no shaper cells in the grid");
  return 0;
}

int CmdEvaluate(const RunOptions& options,
                const std::optional<std::string>& checkpoint) {
  const ExperimentConfig config = PrepareConfig(options);
  const std::string root = ResolveOutputRoot(config, options.out);
  std::ostringstream csv;
  WriteWelfareCsvPreamble(csv);
  nlohmann::json json = nlohmann::json::array();
  for (const auto& cell : config.Cells()) {
    std::vector<WelfareReport> rows;
    for (std::uint64_t seed : config.seeds) {
      std::optional<std::string> ckpt;
      if (cell.method == Method::kShaper) {
        ckpt = checkpoint ? *checkpoint
                          : (fs::path(CellDir(root, cell, seed)) / "checkpoint.json").string();
      }
      rows.push_back(EvaluateCell(config, cell, seed, ckpt));
      Log(options.log, cell.Name() + " seed " + std::to_string(seed) + " welfare " +
                           FormatMetric(rows.back().normalized_global_welfare));
    }
    const ReportSummary summary = Summarize(rows);
    rows.push_back(summary.mean);
    rows.push_back(summary.stddev);
    for (const WelfareReport& r : rows) {
      WriteWelfareCsvRow(csv, r);
      auto nullable = [](double v) {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
      };
      json.push_back({{"game", r.game},
                      {"n_players", r.n_players},
                      {"shaper_count", r.shaper_count},
                      {"coplayer", r.coplayer},
                      {"method", r.method},
                      {"seed", r.seed},
                      {"normalized_global_welfare", nullable(r.normalized_global_welfare)},
                      {"shaper_norm", nullable(r.shaper_norm)},
                      {"naive_norm", nullable(r.naive_norm)},
                      {"window_start", r.window_start},
                      {"window_end", r.window_end},
                      {"converged_episode", r.converged_episode
                                                ? nlohmann::json(*r.converged_episode)
                                                : nlohmann::json(nullptr)},
                      {"status", r.status}});
    }
  }
  const fs::path out = fs::path(root) / "evaluate.csv";
  WriteTextFile(out, csv.str());
  WriteJsonFile(fs::path(root) / "evaluate.json",
                {{"schema", kReportSchemaVersion}, {"rows", json}});
  Log(options.log, "wrote " + out.string());
  return 0;
}

int CmdSweep(const RunOptions& options) {
  const ExperimentConfig config = PrepareConfig(options);
  const std::string root = ResolveOutputRoot(config, options.out);
  const fs::path out = fs::path(root) / "sweep.csv";

  std::map<std::string, WelfareReport> done;
  if (options.resume && fs::exists(out)) {
    for (WelfareReport& r : ReadWelfareCsv(out.string())) {
      if (r.status == "ok") done[RowKey(r)] = std::move(r);
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<WelfareReport> rows;
  bool failed = false;
  auto flush = [&] {
    std::ostringstream csv;
    WriteWelfareCsvPreamble(csv);
    for (const WelfareReport& r : rows) WriteWelfareCsvRow(csv, r);
    WriteTextFile(out, csv.str());
  };
  for (const auto& cell : config.Cells()) {
    for (std::uint64_t seed : config.seeds) {
      WelfareReport probe;
      probe.game = std::string(GameKindName(cell.game));
      probe.n_players = cell.n_players;
      probe.shaper_count = cell.method == Method::kNaive ? 0 : cell.shaper_count;
      probe.coplayer = cell.method == Method::kShaper
                           ? std::string(SeatKindName(config.coplayer))
                           : "naive";
      probe.method = std::string(MethodName(cell.method));
      probe.seed = std::to_string(seed);
      if (auto it = done.find(RowKey(probe)); it != done.end()) {
        Log(options.log, cell.Name() + " seed " + probe.seed + ": already done");
        rows.push_back(it->second);
        continue;
      }
      try {
        std::optional<std::string> ckpt;
        if (cell.method == Method::kShaper) {
          ckpt = TrainCell(config, cell, seed, root, options.resume, options.log);
        }
        rows.push_back(EvaluateCell(config, cell, seed, ckpt));
      } catch (const std::exception& e) {
        failed = true;
        probe.normalized_global_welfare = probe.shaper_norm = probe.naive_norm = nan;
        probe.status = "failed: " + Sanitize(e.what());
        Log(options.log, cell.Name() + " seed " + probe.seed + " " + probe.status);
        rows.push_back(probe);
      }
      flush();
    }
  }
  flush();
  Log(options.log, "wrote " + out.string());
  return failed ? 3 : 0;
}

namespace {

struct Agg {
  std::vector<double> welfare, shaper, naive;
};

std::pair<double, double> MeanStd(const std::vector<double>& v) {
  std::vector<double> x;
  for (double d : v) {
    if (!std::isnan(d)) x.push_back(d);
  }
  if (x.empty()) return {std::nan(""), std::nan("")};
  double m = 0.0;
  for (double d : x) m += d;
  m /= x.size();
  double var = 0.0;
  for (double d : x) var += (d - m) * (d - m);
  return {m, x.size() > 1 ? std::sqrt(var / (x.size() - 1)) : 0.0};
}

}  // namespace

int CmdPlot(const std::vector<std::string>& csv_paths, const std::string& out_dir,
            std::ostream* log) {
  if (csv_paths.empty()) throw std::invalid_argument("plot: no CSV files given");
  std::vector<WelfareReport> rows;
  for (const std::string& p : csv_paths) {
    for (WelfareReport& r : ReadWelfareCsv(p)) {
      if (r.seed == "mean" || r.seed == "std" || r.status != "ok") continue;
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) {
    throw std::runtime_error("plot: no per-seed rows in the given CSV files");
  }

  // fig1: welfare per game x players, one bar per method.
  std::map<std::string, std::map<std::string, Agg>> by_group;  // group -> method
  std::set<std::string> methods;
  std::map<std::string, std::map<int, Agg>> by_count;  // game/n -> shaper count
  for (const WelfareReport& r : rows) {
    const std::string group = r.game + " n=" + std::to_string(r.n_players);
    const std::string method =
        r.method == "naive" ? "naive" : r.method + " x" + std::to_string(r.shaper_count);
    methods.insert(method);
    Agg& a = by_group[group][method];
    a.welfare.push_back(r.normalized_global_welfare);
    a.shaper.push_back(r.shaper_norm);
    a.naive.push_back(r.naive_norm);
    if (r.method == "shaper") by_count[group][r.shaper_count].welfare.push_back(r.normalized_global_welfare);
  }

  BarChart fig1{"Normalized global welfare", "welfare", {}, {}, 0.0, 1.0};
  for (const auto& [group, _] : by_group) fig1.groups.push_back(group);
  for (const std::string& m : methods) {
    Series s{m, {}, {}};
    for (const std::string& g : fig1.groups) {
      const auto it = by_group[g].find(m);
      const auto [mean, sd] = it == by_group[g].end()
                                  ? std::pair{std::nan(""), std::nan("")}
                                  : MeanStd(it->second.welfare);
      s.mean.push_back(mean);
      s.stddev.push_back(sd);
    }
    fig1.series.push_back(std::move(s));
  }

  // fig3: shaping seats vs co-players.
  BarChart fig3{"Shaping agent vs co-player normalized return", "normalized return",
                {}, {{"shaping agent", {}, {}}, {"co-players", {}, {}}}, 0.0, 1.0};
  for (const auto& [group, per_method] : by_group) {
    for (const auto& [method, agg] : per_method) {
      if (method == "naive") continue;
      fig3.groups.push_back(group + " " + method);
      const auto [sm, ss] = MeanStd(agg.shaper);
      const auto [nm, ns] = MeanStd(agg.naive);
      fig3.series[0].mean.push_back(sm);
      fig3.series[0].stddev.push_back(ss);
      fig3.series[1].mean.push_back(nm);
      fig3.series[1].stddev.push_back(ns);
    }
  }

  // fig2: welfare against shaper count.
  LineChart fig2{"Welfare vs number of shapers", "shapers", "welfare", {}, {}, 0.0, 1.0};
  std::set<int> counts;
  for (const auto& [_, per] : by_count) {
    for (const auto& [k, __] : per) counts.insert(k);
  }
  fig2.x.assign(counts.begin(), counts.end());
  for (const auto& [group, per] : by_count) {
    Series s{group, {}, {}};
    for (int k : counts) {
      const auto it = per.find(k);
      const auto [mean, sd] = it == per.end() ? std::pair{std::nan(""), std::nan("")}
                                              : MeanStd(it->second.welfare);
      s.mean.push_back(mean);
      s.stddev.push_back(sd);
    }
    fig2.series.push_back(std::move(s));
  }

  const fs::path dir(out_dir);
  WriteTextFile(dir / "fig1_welfare.svg", RenderBarChart(fig1));
  Log(log, "wrote " + (dir / "fig1_welfare.svg").string());
  if (!fig3.groups.empty()) {
    WriteTextFile(dir / "fig3_roles.svg", RenderBarChart(fig3));
    Log(log, "wrote " + (dir / "fig3_roles.svg").string());
  }
  if (!fig2.series.empty()) {
    WriteTextFile(dir / "fig2_shaper_count.svg", RenderLineChart(fig2));
    Log(log, "wrote " + (dir / "fig2_shaper_count.svg").string());
  }
  return 0;
}

void WritePayoffTable(std::ostream& out, const GameSpec& spec, bool summary) {
  spec.Validate();
  if (summary) {
    if (spec.kind != GameKind::kToc) {
      throw std::invalid_argument("payoff-table: summary layout exists only for toc");
    }
    // Rule summary; the defector's left cell is unreachable when T = n-1.
    out << "action,more_than_T,T_or_fewer\n";
    out << "C," << Exact(spec.benefit - spec.cost) << ',' << Exact(0.0 - spec.cost) << '\n';
    out << "D," << Exact(spec.benefit) << ",0\n";
    return;
  }
  out << "action";
  for (int m = 0; m < spec.n_players; ++m) out << ',' << m;
  out << '\n';
  for (Action a : {Action::kCooperate, Action::kDefect}) {
    out << (a == Action::kCooperate ? "C" : "D");
    for (int m = 0; m < spec.n_players; ++m) out << ',' << Exact(PlayerPayoff(spec, a, m));
    out << '\n';
  }
}

int CmdPayoffTable(const std::string& game, int n_players,
                   const std::map<std::string, double>& params,
                   const std::string& format, const std::optional<std::string>& out) {
  GameSpec spec = GameSpec::Make(ParseGameKind(game), n_players);
  for (const auto& [key, value] : params) {
    if (key == "benefit") spec.benefit = value;
    else if (key == "cost") spec.cost = value;
    else if (key == "total_cost") spec.total_cost = value;
    else if (key == "threshold") spec.threshold = static_cast<int>(value);
    else if (key == "hunt_cost") spec.hunt_cost = value;
    else if (key == "reward") spec.reward = value;
    else if (key == "stag_threshold") spec.stag_threshold = static_cast<int>(value);
    else throw std::invalid_argument("payoff-table: unknown parameter '" + key + "'");
  }
  bool summary = false;
  if (format == "auto") {
    summary = spec.kind == GameKind::kToc;
  } else if (format == "summary") {
    summary = true;
  } else if (format != "full") {
    throw std::invalid_argument("payoff-table: layout must be auto|full|summary");
  }
  std::ostringstream table;
  WritePayoffTable(table, spec, summary);
  if (out) {
    WriteTextFile(*out, table.str());
  } else {
    std::cout << table.str();
  }
  return 0;
}

}  // namespace shaping::cli
