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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "shaping/metrics.hpp"
#include "shaping/shaper.hpp"

namespace shaping {
namespace {

// Record of fixed-policy play; every seat is labelled a shaper seat.
TrialRecord FixedPlay(const GameSpec& game, const std::vector<double>& prob_c, int episodes,
                      int length, std::uint64_t seed) {
  std::vector<FixedPolicy> fixed;
  for (double p : prob_c) fixed.emplace_back(p);
  std::vector<const Policy*> ps;
  for (const auto& f : fixed) ps.push_back(&f);
  const std::vector<SeatKind> seats(prob_c.size(), SeatKind::kShaper);
  TrialConfig t;
  t.game = game;
  t.episodes = episodes;
  t.episode_length = length;
  return RunTrial(seats, ps, t, 0, seed);
}

const GameSpec kIpd3 = GameSpec::Make(GameKind::kIpd, 3);

TEST(Welfare, EndpointsInIpd) {
  EXPECT_DOUBLE_EQ(NormalizedGlobalWelfare(FixedPlay(kIpd3, {1, 1, 1}, 10, 5, 1), kIpd3, 3), 1.0);
  for (int n = 2; n <= 5; ++n) {
    const GameSpec g = GameSpec::Make(GameKind::kIpd, n);
    const TrialRecord r = FixedPlay(g, std::vector<double>(n, 0.0), 4, 5, 1);
    EXPECT_DOUBLE_EQ(NormalizedGlobalWelfare(r, g, 2), 0.0);
  }
}

TEST(Welfare, UniformPlayIsOneHalf) {
  const TrialRecord r = FixedPlay(kIpd3, {0.5, 0.5, 0.5}, 100, 100, 3);
  EXPECT_NEAR(NormalizedGlobalWelfare(r, kIpd3, 100), 0.5, 0.02);
}

TEST(Welfare, IpdWelfareTracksCooperationRate) {
  const TrialRecord r = FixedPlay(kIpd3, {0.2, 0.3, 0.7}, 100, 100, 4);
  double coop = 0.0;
  for (const auto& e : r.cooperation) {
    for (double c : e) coop += c;
  }
  coop /= 300.0;
  EXPECT_NEAR(NormalizedGlobalWelfare(r, kIpd3, 100), coop, 0.02);
  EXPECT_NEAR(coop, 0.4, 0.02);
}

TEST(Welfare, InvariantUnderSeatRelabeling) {
  const TrialRecord r = FixedPlay(kIpd3, {0.2, 0.9, 0.5}, 20, 10, 5);
  TrialRecord p = r;
  for (auto& e : p.returns) std::rotate(e.begin(), e.begin() + 1, e.end());
  EXPECT_DOUBLE_EQ(NormalizedGlobalWelfare(r, kIpd3, 5), NormalizedGlobalWelfare(p, kIpd3, 5));
}

TEST(Welfare, WindowAveragesFinalEpisodes) {
  TrialRecord r;
  r.episode_length = 1;
  r.seats.assign(3, SeatKind::kNaive);
  // Per-step totals 3 (all D) then 12 (all C).
  for (int e = 0; e < 10; ++e) {
    const bool late = e >= 8;
    r.returns.push_back(late ? std::vector<double>{4, 4, 4} : std::vector<double>{1, 1, 1});
    r.welfare.push_back(late ? 12.0 : 3.0);
  }
  EXPECT_DOUBLE_EQ(NormalizedGlobalWelfare(r, kIpd3, 2), 1.0);
  EXPECT_DOUBLE_EQ(NormalizedGlobalWelfare(r, kIpd3, 4), 0.5);
  EXPECT_EQ(DefaultWindow(1000), 100);
  EXPECT_EQ(DefaultWindow(5), 1);
  EXPECT_THROW(NormalizedGlobalWelfare(r, kIpd3, 11), std::invalid_argument);
}

TEST(Welfare, DegenerateBoundsThrow) {
  EXPECT_THROW(NormalizeWelfare(1.0, {2.0, 2.0}), std::invalid_argument);
}

TEST(RoleReturns, DefectorAmongCooperators) {
  const TrialRecord r = FixedPlay(kIpd3, {0, 1, 1}, 3, 4, 1);
  EXPECT_DOUBLE_EQ(r.returns[0][0] / 4.0, 5.0);
  EXPECT_DOUBLE_EQ(r.returns[0][1] / 4.0, 2.0);
  const int shapers[] = {0};
  const RoleReturns rr = ComputeRoleReturns(r, kIpd3, shapers, 2);
  EXPECT_DOUBLE_EQ(*rr.shaper_norm, 1.0);
  EXPECT_DOUBLE_EQ(*rr.naive_norm, 0.4);
  EXPECT_DOUBLE_EQ(rr.per_seat[0], 1.0);
}

TEST(RoleReturns, SymmetricPlayGivesEqualRoles) {
  const TrialRecord r = FixedPlay(kIpd3, {0.5, 0.5, 0.5}, 100, 100, 8);
  const int shapers[] = {1};
  const RoleReturns rr = ComputeRoleReturns(r, kIpd3, shapers, 100);
  EXPECT_NEAR(*rr.shaper_norm, *rr.naive_norm, 0.03);
}

TEST(RoleReturns, EmptyRoleIsAbsent) {
  const TrialRecord r = FixedPlay(kIpd3, {0.3, 0.6, 0.9}, 10, 10, 9);
  const RoleReturns rr = ComputeRoleReturns(r, kIpd3, {}, 10);
  EXPECT_FALSE(rr.shaper_norm.has_value());
  ASSERT_TRUE(rr.naive_norm.has_value());
  double total = 0.0;
  for (const auto& e : r.returns) total += e[0] + e[1] + e[2];
  // Whole-population mean per-step return, per-player bounds [0, 5].
  EXPECT_NEAR(*rr.naive_norm, total / (3.0 * 100.0) / 5.0, 1e-12);
}

TEST(RoleReturns, InvalidSeatsThrow) {
  const TrialRecord r = FixedPlay(kIpd3, {0.5, 0.5, 0.5}, 2, 2, 1);
  const int out_of_range[] = {3};
  const int repeated[] = {1, 1};
  EXPECT_THROW(ComputeRoleReturns(r, kIpd3, out_of_range, 1), std::invalid_argument);
  EXPECT_THROW(ComputeRoleReturns(r, kIpd3, repeated, 1), std::invalid_argument);
}

TEST(Convergence, ConstantAndAlternating) {
  const std::vector<double> flat(30, 0.7);
  EXPECT_EQ(DetectConvergence(flat, 0.01, 5), 5);
  std::vector<double> alt(40);
  for (int i = 0; i < 40; ++i) alt[i] = i % 2;
  EXPECT_FALSE(DetectConvergence(alt, 0.01, 4).has_value());
  EXPECT_THROW(DetectConvergence(flat, 0.01, 1), std::invalid_argument);
}

TEST(Convergence, LateDisturbanceResetsDetection) {
  std::vector<double> s(60, 0.5);
  s[40] = 0.9;
  EXPECT_EQ(DetectConvergence(s, 0.05, 5), 46);
}

TEST(Convergence, NoisyGeometricApproach) {
  const double a = 0.8, rho = 0.9, tol = 0.05;
  const int w = 10, n = 300;
  // Closed-form settling index for x_k = a (1 - rho^k): the widest
  // deviation in a rising window is its first or last point.
  const double avg = (1 - std::pow(rho, w)) / (w * (1 - rho));
  int settle = -1;
  for (int i = w; i <= n && settle < 0; ++i) {
    const double base = a * std::pow(rho, i - w);
    const double mean = a - base * avg;
    const double dev = std::max(base * (1 - avg), base * (avg - std::pow(rho, w - 1)));
    if (dev <= tol * mean) settle = i;
  }
  ASSERT_GT(settle, w);
  Rng rng(14);
  std::uniform_real_distribution<double> noise(-0.002, 0.002);
  std::vector<double> s(n);
  for (int k = 0; k < n; ++k) s[k] = a * (1 - std::pow(rho, k)) + noise(rng);
  const auto got = DetectConvergence(s, tol, w);
  ASSERT_TRUE(got.has_value());
  EXPECT_LE(std::abs(*got - settle), w);
  std::vector<double> clean(n);
  for (int k = 0; k < n; ++k) clean[k] = a * (1 - std::pow(rho, k));
  EXPECT_EQ(DetectConvergence(clean, tol, w), settle);
}

TEST(Plateau, MovingAverageTest) {
  std::vector<double> s;
  for (int i = 0; i < 20; ++i) s.push_back(i);
  EXPECT_FALSE(HasPlateaued(s, 5, 5, 0.01));
  s.assign(20, 3.0);
  EXPECT_TRUE(HasPlateaued(s, 5, 5, 0.01));
  EXPECT_FALSE(HasPlateaued(s, 15, 10, 0.01));
}

WelfareReport Row(const std::string& seed, double w) {
  WelfareReport r;
  r.game = "ipd";
  r.n_players = 3;
  r.shaper_count = 1;
  r.coplayer = "naive";
  r.method = "shaper";
  r.seed = seed;
  r.normalized_global_welfare = w;
  r.shaper_norm = 0.1 + w / 3;
  r.naive_norm = std::nan("");
  r.window_start = 90;
  r.window_end = 100;
  return r;
}

TEST(Summary, MeanAndSampleStd) {
  const std::vector<WelfareReport> rows{Row("0", 0.2), Row("1", 0.4), Row("2", 0.9)};
  const ReportSummary s = Summarize(rows);
  EXPECT_EQ(s.mean.seed, "mean");
  EXPECT_EQ(s.stddev.seed, "std");
  EXPECT_NEAR(s.mean.normalized_global_welfare, 0.5, 1e-15);
  EXPECT_NEAR(s.stddev.normalized_global_welfare, std::sqrt((0.09 + 0.01 + 0.16) / 2), 1e-15);
  EXPECT_TRUE(std::isnan(s.mean.naive_norm));
  EXPECT_EQ(Summarize(std::vector<WelfareReport>{Row("0", 0.3)}).stddev.normalized_global_welfare,
            0.0);
}

class CsvTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("shaping_csv_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CsvTest, RoundTrip) {
  std::vector<WelfareReport> rows{Row("3", 1.0 / 3.0), Row("4", 0.123456789012345678)};
  rows[0].converged_episode = 57;
  rows[1].status = "failed";
  const auto path = (dir_ / "r.csv").string();
  {
    std::ofstream out(path);
    WriteWelfareCsvPreamble(out);
    for (const auto& r : rows) WriteWelfareCsvRow(out, r);
  }
  const auto back = ReadWelfareCsv(path);
  ASSERT_EQ(back.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].seed, rows[i].seed);
    EXPECT_EQ(back[i].normalized_global_welfare, rows[i].normalized_global_welfare);
    EXPECT_EQ(back[i].shaper_norm, rows[i].shaper_norm);
    EXPECT_TRUE(std::isnan(back[i].naive_norm));
    EXPECT_EQ(back[i].converged_episode, rows[i].converged_episode);
    EXPECT_EQ(back[i].status, rows[i].status);
    EXPECT_EQ(back[i].window_end, 100);
  }
}

TEST_F(CsvTest, SchemaAndColumnMismatch) {
  const auto path = (dir_ / "bad.csv").string();
  {
    std::ofstream out(path);
    out << "# schema 2\n" << WelfareCsvHeader() << "\n";
  }
  EXPECT_THROW(ReadWelfareCsv(path), std::runtime_error);
  {
    std::ofstream out(path);
    WriteWelfareCsvPreamble(out);
    out << "ipd,3,1\n";
  }
  EXPECT_THROW(ReadWelfareCsv(path), std::runtime_error);
  EXPECT_THROW(ReadWelfareCsv((dir_ / "missing.csv").string()), std::runtime_error);
}

TEST(Report, FromTrialRecord) {
  const TrialRecord r = FixedPlay(kIpd3, {0, 1, 1}, 20, 5, 2);
  const int shapers[] = {0};
  const WelfareReport rep = MakeWelfareReport(r, kIpd3, shapers, 4);
  EXPECT_EQ(rep.game, "ipd");
  EXPECT_EQ(rep.shaper_count, 1);
  EXPECT_EQ(rep.window_start, 16);
  EXPECT_EQ(rep.window_end, 20);
  // Welfare per step 5 + 2 + 2 = 9 within bounds [3, 12].
  EXPECT_DOUBLE_EQ(rep.normalized_global_welfare, 6.0 / 9.0);
  EXPECT_EQ(rep.converged_episode, 4);
}

}  // namespace
}  // namespace shaping
