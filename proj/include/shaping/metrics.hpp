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

#ifndef SHAPING_METRICS_HPP_
#define SHAPING_METRICS_HPP_

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "shaping/game.hpp"
#include "shaping/trial_record.hpp"

namespace shaping {

// Default converged window: the final 10% of episodes (at least one).
int DefaultWindow(int episodes);

// Maps a mean per-step total payoff onto [0, 1] with the enumerated
// welfare bounds. Throws std::invalid_argument if the game is degenerate.
double NormalizeWelfare(double per_step_total, const WelfareBounds& bounds);

// Normalized global welfare over the final `window` episodes.
double NormalizedGlobalWelfare(const TrialRecord& record, const GameSpec& spec,
                               int window);

// Per-step welfare of each episode, normalized.
std::vector<double> NormalizedWelfareSeries(const TrialRecord& record,
                                            const GameSpec& spec);

struct RoleReturns {
  // Mean per-step return normalized by single-player payoff bounds.
  // Absent when the role has no seats.
  std::optional<double> shaper_norm;
  std::optional<double> naive_norm;
  std::vector<double> per_seat;
};

// `shaper_seats` partitions the seats into shaper and non-shaper roles.
// Throws std::invalid_argument on out-of-range or repeated seats.
RoleReturns ComputeRoleReturns(const TrialRecord& record, const GameSpec& spec,
                               std::span<const int> shaper_seats, int window);

// First index i >= window at which every value in series[i-window, i) lies
// within rel_tol (relative) of that slice's mean, and the same holds at
// every later index. std::nullopt if that never happens.
std::optional<int> DetectConvergence(std::span<const double> series,
                                     double rel_tol, int window);

// Plateau test for training loops: the `ma_window` moving average changed
// by less than rel_tol (relative) over the last `horizon` entries.
bool HasPlateaued(std::span<const double> series, int ma_window, int horizon,
                  double rel_tol);

inline constexpr int kReportSchemaVersion = 1;

struct WelfareReport {
  std::string game;
  int n_players = 0;
  int shaper_count = 0;
  std::string coplayer;
  std::string method;
  std::string seed;
  double normalized_global_welfare = 0.0;
  double shaper_norm = 0.0;  // NaN when absent
  double naive_norm = 0.0;   // NaN when absent
  int window_start = 0;
  int window_end = 0;
  std::optional<int> converged_episode;
  std::string status = "ok";
};

// `shaping_seats` form the shaper role (SHAPER or LOLA seats).
WelfareReport MakeWelfareReport(const TrialRecord& record,
                                const GameSpec& spec,
                                std::span<const int> shaping_seats, int window);

// Means and sample standard deviations (n-1; 0 for a single row) of the
// numeric columns. Identity columns are taken from the first row.
struct ReportSummary {
  WelfareReport mean;
  WelfareReport stddev;
};
ReportSummary Summarize(std::span<const WelfareReport> rows);

// First line "# schema <version>", then the header below.
std::string WelfareCsvHeader();
void WriteWelfareCsvPreamble(std::ostream& out);
void WriteWelfareCsvRow(std::ostream& out, const WelfareReport& row);
// Parses a file written by the functions above. Throws std::runtime_error
// on schema mismatch.
std::vector<WelfareReport> ReadWelfareCsv(const std::string& path);

}  // namespace shaping

#endif  // SHAPING_METRICS_HPP_
