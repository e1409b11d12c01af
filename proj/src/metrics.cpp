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

#include "shaping/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace shaping {

std::string_view SeatKindName(SeatKind kind) {
  switch (kind) {
    case SeatKind::kShaper:
      return "shaper";
    case SeatKind::kNaive:
      return "naive";
    case SeatKind::kLola:
      return "lola";
  }
  return "unknown";
}

SeatKind ParseSeatKind(std::string_view name) {
  if (name == "shaper") return SeatKind::kShaper;
  if (name == "naive") return SeatKind::kNaive;
  if (name == "lola") return SeatKind::kLola;
  throw std::invalid_argument("unknown seat kind '" + std::string(name) +
                              "' (expected shaper|naive|lola)");
}

std::vector<int> TrialRecord::SeatsOfKind(SeatKind kind) const {
  std::vector<int> out;
  for (int i = 0; i < n_players(); ++i) {
    if (seats[i] == kind) out.push_back(i);
  }
  return out;
}

int DefaultWindow(int episodes) { return std::max(1, episodes / 10); }

double NormalizeWelfare(double per_step_total, const WelfareBounds& bounds) {
  const double range = bounds.max_total - bounds.min_total;
  if (!(range > 0.0)) {
    throw std::invalid_argument(
        "welfare: degenerate game (max total == min total), cannot normalize");
  }
  return (per_step_total - bounds.min_total) / range;
}

namespace {

void CheckWindow(const TrialRecord& record, int window) {
  if (window < 1 || window > record.episodes()) {
    throw std::invalid_argument("metrics: window " + std::to_string(window) +
                                " outside trial of " +
                                std::to_string(record.episodes()) +
                                " episodes");
  }
  if (record.episode_length < 1) {
    throw std::invalid_argument("metrics: record has no episode length");
  }
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double NormalizedGlobalWelfare(const TrialRecord& record, const GameSpec& spec,
                               int window) {
  CheckWindow(record, window);
  const WelfareBounds bounds = ComputeWelfareBounds(spec);
  double sum = 0.0;
  for (int e = record.episodes() - window; e < record.episodes(); ++e) {
    sum += record.welfare[e];
  }
  return NormalizeWelfare(sum / window, bounds);
}

std::vector<double> NormalizedWelfareSeries(const TrialRecord& record,
                                            const GameSpec& spec) {
  const WelfareBounds bounds = ComputeWelfareBounds(spec);
  std::vector<double> out;
  out.reserve(record.welfare.size());
  for (double w : record.welfare) out.push_back(NormalizeWelfare(w, bounds));
  return out;
}

RoleReturns ComputeRoleReturns(const TrialRecord& record, const GameSpec& spec,
                               std::span<const int> shaper_seats, int window) {
  CheckWindow(record, window);
  const int n = record.n_players();
  std::vector<bool> is_shaper(n, false);
  for (int s : shaper_seats) {
    if (s < 0 || s >= n) {
      throw std::invalid_argument("role_returns: seat " + std::to_string(s) +
                                  " out of range");
    }
    if (is_shaper[s]) {
      throw std::invalid_argument("role_returns: seat " + std::to_string(s) +
                                  " listed twice");
    }
    is_shaper[s] = true;
  }
  const WelfareBounds b = ComputePlayerPayoffBounds(spec);
  const double range = b.max_total - b.min_total;
  if (!(range > 0.0)) {
    throw std::invalid_argument("role_returns: degenerate per-player payoffs");
  }

  RoleReturns out;
  out.per_seat.assign(n, 0.0);
  const double steps = static_cast<double>(window) * record.episode_length;
  for (int e = record.episodes() - window; e < record.episodes(); ++e) {
    for (int i = 0; i < n; ++i) out.per_seat[i] += record.returns[e][i];
  }
  double shaper_sum = 0.0, naive_sum = 0.0;
  int shaper_count = 0, naive_count = 0;
  for (int i = 0; i < n; ++i) {
    out.per_seat[i] = (out.per_seat[i] / steps - b.min_total) / range;
    if (is_shaper[i]) {
      shaper_sum += out.per_seat[i];
      ++shaper_count;
    } else {
      naive_sum += out.per_seat[i];
      ++naive_count;
    }
  }
  if (shaper_count > 0) out.shaper_norm = shaper_sum / shaper_count;
  if (naive_count > 0) out.naive_norm = naive_sum / naive_count;
  return out;
}

std::optional<int> DetectConvergence(std::span<const double> series,
                                     double rel_tol, int window) {
  if (window < 2) throw std::invalid_argument("convergence: window must be >= 2");
  const int n = static_cast<int>(series.size());
  std::optional<int> found;
  for (int i = window; i <= n; ++i) {
    double mean = 0.0;
    for (int k = i - window; k < i; ++k) mean += series[k];
    mean /= window;
    const double scale = std::max(std::abs(mean), 1e-12);
    bool settled = true;
    for (int k = i - window; k < i && settled; ++k) {
      settled = std::abs(series[k] - mean) <= rel_tol * scale;
    }
    if (!settled) {
      found.reset();
    } else if (!found) {
      found = i;
    }
  }
  return found;
}

bool HasPlateaued(std::span<const double> series, int ma_window, int horizon,
                  double rel_tol) {
  const int n = static_cast<int>(series.size());
  if (ma_window < 1 || horizon < 1 || n < ma_window + horizon) return false;
  auto ma = [&](int end) {
    double s = 0.0;
    for (int k = end - ma_window; k < end; ++k) s += series[k];
    return s / ma_window;
  };
  const double now = ma(n);
  const double then = ma(n - horizon);
  return std::abs(now - then) <= rel_tol * std::max(std::abs(then), 1e-12);
}

WelfareReport MakeWelfareReport(const TrialRecord& record,
                                const GameSpec& spec,
                                std::span<const int> shaping_seats, int window) {
  WelfareReport r;
  r.game = std::string(GameKindName(spec.kind));
  r.n_players = spec.n_players;
  r.shaper_count = static_cast<int>(shaping_seats.size());
  r.normalized_global_welfare = NormalizedGlobalWelfare(record, spec, window);
  const RoleReturns roles = ComputeRoleReturns(record, spec, shaping_seats, window);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.shaper_norm = roles.shaper_norm.value_or(nan);
  r.naive_norm = roles.naive_norm.value_or(nan);
  r.window_start = record.episodes() - window;
  r.window_end = record.episodes();
  r.converged_episode = DetectConvergence(NormalizedWelfareSeries(record, spec),
                                          0.05, std::max(2, window));
  return r;
}

ReportSummary Summarize(std::span<const WelfareReport> rows) {
  if (rows.empty()) throw std::invalid_argument("summary: no rows");
  ReportSummary s{rows[0], rows[0]};
  s.mean.seed = "mean";
  s.stddev.seed = "std";
  s.mean.converged_episode.reset();
  s.stddev.converged_episode.reset();
  const double count = static_cast<double>(rows.size());
  auto stat = [&](double WelfareReport::*field) {
    double mean = 0.0;
    for (const WelfareReport& r : rows) mean += r.*field;
    mean /= count;
    double var = 0.0;
    for (const WelfareReport& r : rows) var += (r.*field - mean) * (r.*field - mean);
    s.mean.*field = mean;
    s.stddev.*field = rows.size() > 1 ? std::sqrt(var / (count - 1.0)) : 0.0;
  };
  stat(&WelfareReport::normalized_global_welfare);
  stat(&WelfareReport::shaper_norm);
  stat(&WelfareReport::naive_norm);
  for (const WelfareReport& r : rows) {
    if (r.status != "ok") {
      s.mean.status = "partial";
      s.stddev.status = "partial";
    }
  }
  return s;
}

std::string WelfareCsvHeader() {
  return "game,n_players,shaper_count,coplayer,method,seed,"
         "normalized_global_welfare,shaper_norm,naive_norm,window_start,"
         "window_end,converged_episode,status";
}

void WriteWelfareCsvPreamble(std::ostream& out) {
  out << "# schema " << kReportSchemaVersion << "\n" << WelfareCsvHeader() << "\n";
}

void WriteWelfareCsvRow(std::ostream& out, const WelfareReport& r) {
  out << r.game << ',' << r.n_players << ',' << r.shaper_count << ','
      << r.coplayer << ',' << r.method << ',' << r.seed << ','
      << FormatDouble(r.normalized_global_welfare) << ','
      << FormatDouble(r.shaper_norm) << ',' << FormatDouble(r.naive_norm)
      << ',' << r.window_start << ',' << r.window_end << ',';
  if (r.converged_episode) out << *r.converged_episode;
  out << ',' << r.status << "\n";
}

std::vector<WelfareReport> ReadWelfareCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  const std::string preamble = "# schema " + std::to_string(kReportSchemaVersion);
  if (!std::getline(in, line) || line != preamble) {
    throw std::runtime_error(path + ": expected '" + preamble + "' on line 1");
  }
  if (!std::getline(in, line) || line != WelfareCsvHeader()) {
    throw std::runtime_error(path + ": header does not match schema " +
                             std::to_string(kReportSchemaVersion));
  }
  std::vector<WelfareReport> rows;
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 13) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 13 columns, got " +
                               std::to_string(f.size()));
    }
    try {
      WelfareReport r;
      r.game = f[0];
      r.n_players = std::stoi(f[1]);
      r.shaper_count = std::stoi(f[2]);
      r.coplayer = f[3];
      r.method = f[4];
      r.seed = f[5];
      r.normalized_global_welfare = std::stod(f[6]);
      r.shaper_norm = std::stod(f[7]);
      r.naive_norm = std::stod(f[8]);
      r.window_start = std::stoi(f[9]);
      r.window_end = std::stoi(f[10]);
      if (!f[11].empty()) r.converged_episode = std::stoi(f[11]);
      r.status = f[12];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed number");
    }
  }
  return rows;
}

}  // namespace shaping
