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

// Independent reference implementations used as test oracles. Nothing here
// calls into the library code under test except for plain data types.

#ifndef SHAPING_TESTS_ORACLES_HPP_
#define SHAPING_TESTS_ORACLES_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace oracle {

// Per-player payoffs written straight from the game rules, with the
// cooperator count taken over the whole joint action.
inline std::vector<double> Payoffs(const std::string& game, const std::vector<int>& coop,
                                   double benefit = 5, double cost = 3,
                                   double total_cost = 3, double hunt_cost = 3,
                                   double reward = 6) {
  const int n = static_cast<int>(coop.size());
  int k = 0;
  for (int c : coop) k += c;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const bool c = coop[i] == 1;
    if (game == "ipd") {
      const int others = k - (c ? 1 : 0);
      out[i] = c ? 2.0 * others : 2.0 * others + 1.0;
    } else if (game == "staghunt") {
      const int need = (n + 1) / 2;
      if (k >= need) {
        out[i] = k * reward / n - (c ? hunt_cost : 0.0);
      } else {
        out[i] = c ? -hunt_cost : 0.0;
      }
    } else if (game == "toc") {
      const int t = n / 2;
      if (k > t) {
        out[i] = c ? benefit - cost : benefit;
      } else {
        out[i] = c ? -cost : 0.0;
      }
    } else if (game == "snowdrift") {
      if (k == 0) {
        out[i] = 0.0;
      } else {
        out[i] = c ? benefit - total_cost / k : benefit;
      }
    }
  }
  return out;
}

inline double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Element-by-element GRU actor-critic step over the flat parameter layout
// [Wz bz Wr br Wc bc Wa ba Wv bv], weights row-major over [x, h].
struct GruOut {
  std::vector<double> h;
  double logit_d = 0.0;
  double logit_c = 0.0;
  double value = 0.0;
};

inline GruOut GruStep(const std::vector<double>& p, int in, int hd, int obs,
                      const std::vector<double>& h) {
  const int cols = in + hd;
  std::size_t o = 0;
  auto take = [&](std::size_t n) {
    const std::size_t at = o;
    o += n;
    return at;
  };
  const std::size_t wz = take(hd * cols), bz = take(hd);
  const std::size_t wr = take(hd * cols), br = take(hd);
  const std::size_t wc = take(hd * cols), bc = take(hd);
  const std::size_t wa = take(2 * hd), ba = take(2);
  const std::size_t wv = take(hd), bv = take(1);
  std::vector<double> z(hd), r(hd), c(hd);
  for (int j = 0; j < hd; ++j) {
    double az = p[bz + j] + p[wz + j * cols + obs];
    double ar = p[br + j] + p[wr + j * cols + obs];
    for (int k = 0; k < hd; ++k) {
      az += p[wz + j * cols + in + k] * h[k];
      ar += p[wr + j * cols + in + k] * h[k];
    }
    z[j] = Sigmoid(az);
    r[j] = Sigmoid(ar);
  }
  for (int j = 0; j < hd; ++j) {
    double ac = p[bc + j] + p[wc + j * cols + obs];
    for (int k = 0; k < hd; ++k) ac += p[wc + j * cols + in + k] * r[k] * h[k];
    c[j] = std::tanh(ac);
  }
  GruOut out;
  out.h.resize(hd);
  for (int j = 0; j < hd; ++j) out.h[j] = (1.0 - z[j]) * h[j] + z[j] * c[j];
  out.logit_d = p[ba];
  out.logit_c = p[ba + 1];
  out.value = p[bv];
  for (int k = 0; k < hd; ++k) {
    out.logit_d += p[wa + k] * out.h[k];
    out.logit_c += p[wa + hd + k] * out.h[k];
    out.value += p[wv + k] * out.h[k];
  }
  return out;
}

// Log-probability of action a (1 = cooperate) from two logits.
inline double LogProb(double logit_d, double logit_c, int a) {
  const double m = std::max(logit_d, logit_c);
  const double lse = m + std::log(std::exp(logit_d - m) + std::exp(logit_c - m));
  return (a == 1 ? logit_c : logit_d) - lse;
}

// Central finite-difference gradient.
inline std::vector<double> FdGradient(const std::function<double(const std::vector<double>&)>& f,
                                      std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double RelError(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace oracle

#endif  // SHAPING_TESTS_ORACLES_HPP_
