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
#include <limits>

#include "harness.hpp"
#include "oracles.hpp"
#include "shaping/lola.hpp"

namespace shaping {
namespace {

using oracle::Sigmoid;

harness::OneShot MatchingPennies() {
  harness::OneShot g;
  g.payoff[0][0] = {1, -1};
  g.payoff[1][1] = {1, -1};
  g.payoff[0][1] = {-1, 1};
  g.payoff[1][0] = {-1, 1};
  return g;
}

harness::OneShot OneShotIpd() {
  harness::OneShot g;
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a1 = 0; a1 < 2; ++a1) {
      const auto p = oracle::Payoffs("ipd", {a0, a1});
      g.payoff[a0][a1] = {p[0], p[1]};
    }
  }
  return g;
}

// Expected reward of `seat` with P(C) = sigmoid(theta).
double Value(const harness::OneShot& g, int seat, double t0, double t1) {
  const double p = Sigmoid(t0), q = Sigmoid(t1);
  double v = 0.0;
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a1 = 0; a1 < 2; ++a1) {
      v += (a0 ? p : 1 - p) * (a1 ? q : 1 - q) * g.payoff[a0][a1][seat];
    }
  }
  return v;
}

// Exact LOLA gradient of seat 0 via nested finite differences: the inner
// step is re-run at every perturbed theta0.
double TwoLevelFd(const harness::OneShot& g, double t0, double t1, double lr) {
  auto inner = [&](double a) {
    const double h = 1e-5;
    return t1 + lr * (Value(g, 1, a, t1 + h) - Value(g, 1, a, t1 - h)) / (2 * h);
  };
  auto outer = [&](const std::vector<double>& a) { return Value(g, 0, a[0], inner(a[0])); };
  return oracle::FdGradient(outer, {t0}, 1e-4)[0];
}

LolaConfig Config(double inner_lr) {
  LolaConfig c;
  c.inner_lr = inner_lr;
  c.discount = 1.0;
  return c;
}

struct Exact {
  std::vector<std::vector<double>> virt;
  double grad = 0.0;
};

Exact ExactLola(const harness::OneShot& g, double t0, double t1, double lr) {
  BernoulliTapePolicy bp;
  const TapePolicy* ps[] = {&bp, &bp};
  const std::vector<std::vector<double>> params{{t0}, {t1}};
  LolaLookahead la(ps, params, 0);
  la.Lookahead(g.Enumerate(t0, t1), Config(lr));
  Exact e;
  e.virt = la.VirtualParams();
  e.grad = la.OuterGradient(g.Enumerate(t0, e.virt[1][0]), Config(lr))[0];
  return e;
}

TEST(LolaConfig, DefaultsAndValidation) {
  const LolaConfig c;
  EXPECT_EQ(c.inner_lr, 0.3);
  EXPECT_EQ(c.lookahead_steps, 1);
  LolaConfig bad;
  bad.lookahead_steps = 0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
  bad = LolaConfig{};
  bad.batch_size = 0;
  EXPECT_THROW(bad.Validate(), std::invalid_argument);
}

TEST(InnerLookahead, ZeroLearningRateIsIdentity) {
  const harness::OneShot g = OneShotIpd();
  const Exact e = ExactLola(g, 0.2, -0.4, 0.0);
  EXPECT_EQ(e.virt[1][0], -0.4);
  EXPECT_EQ(e.virt[0][0], 0.2);
}

TEST(InnerLookahead, StepMatchesCoPlayerGradient) {
  const harness::OneShot g = OneShotIpd();
  const double lr = 0.7;
  const Exact e = ExactLola(g, 0.2, -0.4, lr);
  const double h = 1e-6;
  const double grad1 = (Value(g, 1, 0.2, -0.4 + h) - Value(g, 1, 0.2, -0.4 - h)) / (2 * h);
  EXPECT_NEAR(e.virt[1][0], -0.4 + lr * grad1, 1e-8);
}

TEST(InnerLookahead, ZeroCoPlayerAdvantagesGiveNoStep) {
  harness::OneShot g = OneShotIpd();
  for (auto& row : g.payoff) {
    for (auto& cell : row) cell[1] = 0.0;
  }
  const harness::OneShot* pg = &g;
  Rng rng(3);
  BernoulliTapePolicy bp;
  const TapePolicy* ps[] = {&bp, &bp};
  const std::vector<std::vector<double>> params{{0.5}, {-1.0}};
  LolaLookahead la(ps, params, 0);
  la.Lookahead(pg->Sample(0.5, -1.0, 16, rng), Config(0.3));
  EXPECT_LT(std::abs(la.VirtualParams()[1][0] + 1.0), 1e-9);
}

TEST(LolaGradient, MatchesTwoLevelFiniteDifferences) {
  for (const harness::OneShot& g : {OneShotIpd(), MatchingPennies()}) {
    for (auto [t0, t1] : {std::pair{0.3, -0.5}, std::pair{-1.2, 0.8}}) {
      const double lr = 1.0;
      const double fd = TwoLevelFd(g, t0, t1, lr);
      const double got = ExactLola(g, t0, t1, lr).grad;
      EXPECT_LT(std::abs(got - fd) / std::max(std::abs(fd), 1e-3), 1e-3) << t0 << " " << t1;
    }
  }
}

TEST(LolaGradient, SecondOrderTermIsNonzero) {
  // In one-shot IPD the co-player's gradient ignores seat 0, so use a game
  // where it does not.
  const harness::OneShot g = MatchingPennies();
  const double t0 = 0.3, t1 = -0.5;
  const Exact lola = ExactLola(g, t0, t1, 1.0);
  // The same outer objective with the co-player's virtual parameter held
  // fixed, i.e. without differentiating through the lookahead.
  const double h = 1e-6;
  const double first = (Value(g, 0, t0 + h, lola.virt[1][0]) -
                        Value(g, 0, t0 - h, lola.virt[1][0])) / (2 * h);
  EXPECT_GT(std::abs(lola.grad - first), 1e-3);
}

TEST(LolaGradient, FrozenCoPlayersReduceToNaiveDice) {
  GruPolicy a(5, 8, [] { Rng r(1); return InitGruParams(5, 8, r); }());
  GruPolicy b(5, 8, [] { Rng r(2); return InitGruParams(5, 8, r); }());
  const std::vector<const Policy*> acting{&a, &b};
  const std::vector<std::vector<double>> h(2, std::vector<double>(8, 0.0));
  Rng rng(4);
  const GameSpec spec = GameSpec::Make(GameKind::kIpd, 2);
  const RolloutBatch inner = SampleBatch(acting, h, spec, 5, 3, rng);
  const RolloutBatch outer = SampleBatch(acting, h, spec, 5, 3, rng);
  GruTapePolicy tp(5, 8);
  const TapePolicy* ps[] = {&tp, &tp};
  const std::vector<std::vector<double>> params{a.params(), b.params()};
  LolaConfig cfg;
  cfg.inner_lr = 0.0;
  LolaLookahead la(ps, params, 0);
  la.Lookahead(inner, cfg);
  const std::vector<double> g = la.OuterGradient(outer, cfg);

  ad::Tape tape;
  std::vector<ad::Var> leaves{tape.Leaf(Tensor::Vector(a.params())),
                              tape.Leaf(Tensor::Vector(b.params()))};
  const LogProbTable lp = RecomputeLogProbs(tape, ps, leaves, outer, true);
  const ad::Var obj = DiceObjective(lp, outer, 0, {cfg.discount, false});
  const ad::Var wrt[] = {leaves[0]};
  const Tensor naive = tape.GradientValues(obj, wrt)[0];
  ASSERT_EQ(g.size(), naive.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], naive[i], 1e-12);
}

TEST(LolaGradient, MonteCarloMeanMatchesAnalyticMatchingGame) {
  const harness::OneShot g = MatchingPennies();
  const double t0 = 0.5, t1 = -0.3, lr = 1.0;
  // By hand: V0 = (2p-1)(2q'-1), q' = sigmoid(t1 - lr (2p-1) 2q(1-q)).
  const double p = Sigmoid(t0), q = Sigmoid(t1);
  const double t1v = t1 - lr * (2 * p - 1) * 2 * q * (1 - q);
  const double qv = Sigmoid(t1v);
  const double dt1v = -lr * 2 * p * (1 - p) * 2 * q * (1 - q);
  const double analytic = 2 * p * (1 - p) * (2 * qv - 1) + (2 * p - 1) * 2 * qv * (1 - qv) * dt1v;

  BernoulliTapePolicy bp;
  const TapePolicy* ps[] = {&bp, &bp};
  const std::vector<std::vector<double>> params{{t0}, {t1}};
  Rng rng(11);
  const int chunks = 100, per_chunk = 100;
  double sum = 0.0, sq = 0.0;
  for (int c = 0; c < chunks; ++c) {
    LolaLookahead la(ps, params, 0);
    la.Lookahead(g.Enumerate(t0, t1), Config(lr));
    const double v1 = la.VirtualParams()[1][0];
    EXPECT_NEAR(v1, t1v, 1e-12);
    const double est = la.OuterGradient(g.Sample(t0, v1, per_chunk, rng), Config(lr))[0];
    sum += est;
    sq += est * est;
  }
  const double mean = sum / chunks;
  const double se = std::sqrt((sq / chunks - mean * mean) / (chunks - 1));
  EXPECT_LT(std::abs(mean - analytic), 3 * se) << mean << " vs " << analytic << " se " << se;
}

TEST(LolaLookahead, AllCoPlayersSteppedSimultaneously) {
  // Three memoryless players in one-shot IPD, enumerated exactly. Each
  // co-player's virtual step is its own gradient at the current joint
  // parameters.
  const std::vector<double> theta{0.4, -0.2, 0.9};
  auto value = [&](int seat, const std::vector<double>& th) {
    double v = 0.0;
    for (int bits = 0; bits < 8; ++bits) {
      double w = 1.0;
      std::vector<int> coop(3);
      for (int i = 0; i < 3; ++i) {
        coop[i] = (bits >> i) & 1;
        w *= coop[i] ? Sigmoid(th[i]) : 1 - Sigmoid(th[i]);
      }
      v += w * oracle::Payoffs("ipd", coop)[seat];
    }
    return v;
  };
  RolloutBatch batch;
  for (int bits = 0; bits < 8; ++bits) {
    JointRollout r;
    r.weight = 1.0;
    std::vector<int> coop(3);
    for (int i = 0; i < 3; ++i) coop[i] = (bits >> i) & 1;
    const auto pay = oracle::Payoffs("ipd", coop);
    r.agents.resize(3);
    for (int i = 0; i < 3; ++i) {
      const double pc = Sigmoid(theta[i]);
      r.weight *= coop[i] ? pc : 1 - pc;
      r.agents[i].observations = {0};
      r.agents[i].actions = {coop[i] ? Action::kCooperate : Action::kDefect};
      r.agents[i].log_probs = {std::log(coop[i] ? pc : 1 - pc)};
      r.agents[i].values = {0.0};
      r.agents[i].rewards = {pay[i]};
    }
    batch.push_back(r);
  }
  BernoulliTapePolicy bp;
  const TapePolicy* ps[] = {&bp, &bp, &bp};
  const std::vector<std::vector<double>> params{{theta[0]}, {theta[1]}, {theta[2]}};
  LolaLookahead la(ps, params, 0);
  const LolaConfig cfg = Config(0.5);
  la.Lookahead(batch, cfg);
  const auto virt = la.VirtualParams();
  EXPECT_EQ(virt[0][0], theta[0]);
  for (int j = 1; j < 3; ++j) {
    auto f = [&](const std::vector<double>& x) {
      std::vector<double> th = theta;
      th[j] = x[0];
      return value(j, th);
    };
    const double grad = oracle::FdGradient(f, {theta[j]})[0];
    EXPECT_NEAR(virt[j][0], theta[j] + 0.5 * grad, 1e-8);
  }
}

TEST(LolaLookahead, RejectsStaleInnerBatch) {
  const harness::OneShot g = OneShotIpd();
  BernoulliTapePolicy bp;
  const TapePolicy* ps[] = {&bp, &bp};
  const std::vector<std::vector<double>> params{{0.1}, {0.2}};
  LolaLookahead la(ps, params, 0);
  EXPECT_THROW(la.Lookahead(g.Enumerate(0.1, 0.25), Config(0.3)), std::runtime_error);
}

struct ThreeSeats {
  LolaLearner lola{9, 16, 5};
  GruPolicy a{9, 16, [] { Rng r(6); return InitGruParams(9, 16, r); }()};
  GruPolicy b{9, 16, [] { Rng r(7); return InitGruParams(9, 16, r); }()};
  std::vector<std::vector<double>> hiddens = std::vector<std::vector<double>>(
      3, std::vector<double>(16, 0.0));

  LolaLearner::UpdateStats Update() {
    const GruPolicy* seats[] = {&a, &lola.policy(), &b};
    return lola.Update(seats, hiddens, 1, GameSpec::Make(GameKind::kIpd, 3), 10, LolaConfig{});
  }
};

TEST(LolaLearner, UpdateIsDeterministicAndMovesOwnParams) {
  ThreeSeats x, y;
  const std::vector<double> before = x.lola.policy().params();
  const std::vector<double> a_before = x.a.params();
  const auto sx = x.Update();
  const auto sy = y.Update();
  EXPECT_EQ(x.lola.policy().params(), y.lola.policy().params());
  EXPECT_NE(x.lola.policy().params(), before);
  EXPECT_EQ(x.a.params(), a_before);
  EXPECT_TRUE(std::isfinite(sx.grad_norm));
  EXPECT_GT(sx.virtual_step_norm, 0.0);
  EXPECT_EQ(sx.own_return, sy.own_return);
}

TEST(LolaLearner, NonFiniteGradientAborts) {
  ThreeSeats x;
  x.lola.mutable_policy().mutable_params()[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(x.Update(), std::runtime_error);
}

TEST(LolaLearner, RejectsForeignOwnSeat) {
  ThreeSeats x;
  const GruPolicy* seats[] = {&x.a, &x.b, &x.lola.policy()};
  EXPECT_THROW(x.lola.Update(seats, x.hiddens, 1, GameSpec::Make(GameKind::kIpd, 3), 10,
                             LolaConfig{}),
               std::invalid_argument);
}

}  // namespace
}  // namespace shaping
