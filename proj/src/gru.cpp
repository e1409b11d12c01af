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

#include "shaping/gru.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shaping {

namespace {

inline double Sigmoid(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                  : std::exp(v) / (1.0 + std::exp(v));
}

}  // namespace

ParamLayout GruLayout(int input_dim, int hidden_dim) {
  const std::size_t in = input_dim + hidden_dim;
  ParamLayout layout;
  layout.AddMatrix("gate_update.weight", hidden_dim, in);
  layout.AddVector("gate_update.bias", hidden_dim);
  layout.AddMatrix("gate_reset.weight", hidden_dim, in);
  layout.AddVector("gate_reset.bias", hidden_dim);
  layout.AddMatrix("candidate.weight", hidden_dim, in);
  layout.AddVector("candidate.bias", hidden_dim);
  layout.AddMatrix("actor.weight", kNumActions, hidden_dim);
  layout.AddVector("actor.bias", kNumActions);
  layout.AddMatrix("critic.weight", 1, hidden_dim);
  layout.AddVector("critic.bias", 1);
  return layout;
}

std::size_t GruParamCount(int input_dim, int hidden_dim) {
  return 3 * static_cast<std::size_t>(input_dim + hidden_dim + 1) * hidden_dim +
         static_cast<std::size_t>(hidden_dim + 1) * kNumActions +
         static_cast<std::size_t>(hidden_dim + 1);
}

std::vector<double> InitGruParams(int input_dim, int hidden_dim, Rng& rng) {
  const ParamLayout layout = GruLayout(input_dim, hidden_dim);
  std::vector<double> p(layout.size(), 0.0);
  const double gate_scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  constexpr double kHeadScale = 0.01;
  for (const ParamSlice& s : layout.slices()) {
    if (s.cols == 0) continue;  // biases start at zero
    const bool head = s.name.rfind("actor", 0) == 0 ||
                      s.name.rfind("critic", 0) == 0;
    std::uniform_real_distribution<double> dist(
        head ? -kHeadScale : -gate_scale, head ? kHeadScale : gate_scale);
    for (std::size_t i = 0; i < s.size(); ++i) p[s.offset + i] = dist(rng);
  }
  return p;
}

GruNet::GruNet(int input_dim, int hidden_dim, std::span<const double> params)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), params_(params) {
  if (params.size() != GruParamCount(input_dim, hidden_dim)) {
    throw std::invalid_argument(
        "gru: expected " + std::to_string(GruParamCount(input_dim, hidden_dim)) +
        " parameters, got " + std::to_string(params.size()));
  }
  const std::size_t h = hidden_dim;
  const std::size_t gate = h * (input_dim + hidden_dim);
  off_.wz = 0;
  off_.bz = off_.wz + gate;
  off_.wr = off_.bz + h;
  off_.br = off_.wr + gate;
  off_.wc = off_.br + h;
  off_.bc = off_.wc + gate;
  off_.wa = off_.bc + h;
  off_.ba = off_.wa + kNumActions * h;
  off_.wv = off_.ba + kNumActions;
  off_.bv = off_.wv + h;
}

void GruNet::Forward(int obs, const double* h, double* z, double* r,
                     double* rh, double* c, double* h_next) const {
  if (obs < 0 || obs >= input_dim_) {
    throw std::invalid_argument("gru: observation code " + std::to_string(obs) +
                                " outside [0, " + std::to_string(input_dim_) +
                                ")");
  }
  const int hd = hidden_dim_;
  const std::size_t stride = input_dim_ + hidden_dim_;
  const double* p = params_.data();
  for (int i = 0; i < hd; ++i) {
    const double* wz = p + off_.wz + i * stride;
    const double* wr = p + off_.wr + i * stride;
    double az = wz[obs] + p[off_.bz + i];
    double ar = wr[obs] + p[off_.br + i];
    for (int j = 0; j < hd; ++j) {
      az += wz[input_dim_ + j] * h[j];
      ar += wr[input_dim_ + j] * h[j];
    }
    z[i] = Sigmoid(az);
    r[i] = Sigmoid(ar);
  }
  for (int j = 0; j < hd; ++j) rh[j] = r[j] * h[j];
  for (int i = 0; i < hd; ++i) {
    const double* wc = p + off_.wc + i * stride;
    double ac = wc[obs] + p[off_.bc + i];
    for (int j = 0; j < hd; ++j) ac += wc[input_dim_ + j] * rh[j];
    c[i] = std::tanh(ac);
    h_next[i] = (1.0 - z[i]) * h[i] + z[i] * c[i];
  }
}

StepOutput GruNet::Heads(const double* hn) const {
  const int hd = hidden_dim_;
  const double* p = params_.data();
  StepOutput out;
  for (int a = 0; a < kNumActions; ++a) {
    double acc = p[off_.ba + a];
    const double* w = p + off_.wa + a * hd;
    for (int j = 0; j < hd; ++j) acc += w[j] * hn[j];
    out.logits[a] = acc;
  }
  double v = p[off_.bv];
  for (int j = 0; j < hd; ++j) v += p[off_.wv + j] * hn[j];
  out.value = v;
  return out;
}

StepOutput GruNet::Step(int observation, std::span<const double> hidden,
                        std::span<double> next_hidden) const {
  if (static_cast<int>(hidden.size()) != hidden_dim_ ||
      static_cast<int>(next_hidden.size()) != hidden_dim_) {
    throw std::invalid_argument("gru: hidden state must have length " +
                                std::to_string(hidden_dim_));
  }
  double z[64], r[64], rh[64], c[64];
  std::vector<double> heap;
  double* zp = z;
  double* rp = r;
  double* rhp = rh;
  double* cp = c;
  if (hidden_dim_ > 64) {
    heap.resize(4 * hidden_dim_);
    zp = heap.data();
    rp = zp + hidden_dim_;
    rhp = rp + hidden_dim_;
    cp = rhp + hidden_dim_;
  }
  Forward(observation, hidden.data(), zp, rp, rhp, cp, next_hidden.data());
  return Heads(next_hidden.data());
}

GruUnroll::GruUnroll(const GruNet& net, std::span<const int> observations,
                     std::span<const double> initial_hidden)
    : net_(net), obs_(observations.begin(), observations.end()) {
  const std::size_t hd = net.hidden_dim();
  if (initial_hidden.size() != hd) {
    throw std::invalid_argument("gru unroll: initial hidden size mismatch");
  }
  const std::size_t n = obs_.size();
  h_in_.resize(n * hd);
  z_.resize(n * hd);
  r_.resize(n * hd);
  rh_.resize(n * hd);
  c_.resize(n * hd);
  h_out_.resize(n * hd);
  outputs_.resize(n);
  const double* h = initial_hidden.data();
  for (std::size_t t = 0; t < n; ++t) {
    std::copy(h, h + hd, h_in_.begin() + t * hd);
    net_.Forward(obs_[t], h_in_.data() + t * hd, z_.data() + t * hd,
                 r_.data() + t * hd, rh_.data() + t * hd, c_.data() + t * hd,
                 h_out_.data() + t * hd);
    outputs_[t] = net_.Heads(h_out_.data() + t * hd);
    h = h_out_.data() + t * hd;
  }
}

std::span<const double> GruUnroll::final_hidden() const {
  const std::size_t hd = net_.hidden_dim();
  return std::span<const double>(h_out_).subspan(h_out_.size() - hd, hd);
}

void GruUnroll::Backward(std::span<const std::array<double, 2>> dlogits,
                         std::span<const double> dvalues,
                         std::span<double> grad) const {
  const std::size_t n = obs_.size();
  if (dlogits.size() != n || dvalues.size() != n ||
      grad.size() != net_.params().size()) {
    throw std::invalid_argument("gru backward: size mismatch");
  }
  const int hd = net_.hidden_dim();
  const int in = net_.input_dim();
  const std::size_t stride = in + hd;
  const double* p = net_.params().data();
  const GruNet::Offsets& o = net_.off_;
  double* g = grad.data();

  std::vector<double> dh(hd, 0.0), dh_prev(hd), daz(hd), dar(hd), dac(hd),
      drh(hd);
  for (std::size_t t = n; t-- > 0;) {
    const double* hin = h_in_.data() + t * hd;
    const double* z = z_.data() + t * hd;
    const double* r = r_.data() + t * hd;
    const double* rh = rh_.data() + t * hd;
    const double* c = c_.data() + t * hd;
    const double* hout = h_out_.data() + t * hd;
    const int obs = obs_[t];

    // Heads.
    for (int a = 0; a < kNumActions; ++a) {
      const double d = dlogits[t][a];
      if (d == 0.0) continue;
      g[o.ba + a] += d;
      for (int j = 0; j < hd; ++j) {
        g[o.wa + a * hd + j] += d * hout[j];
        dh[j] += d * p[o.wa + a * hd + j];
      }
    }
    if (dvalues[t] != 0.0) {
      const double d = dvalues[t];
      g[o.bv] += d;
      for (int j = 0; j < hd; ++j) {
        g[o.wv + j] += d * hout[j];
        dh[j] += d * p[o.wv + j];
      }
    }

    // h' = (1 - z) h + z c
    for (int i = 0; i < hd; ++i) {
      const double dz = dh[i] * (c[i] - hin[i]);
      const double dc = dh[i] * z[i];
      dh_prev[i] = dh[i] * (1.0 - z[i]);
      daz[i] = dz * z[i] * (1.0 - z[i]);
      dac[i] = dc * (1.0 - c[i] * c[i]);
    }
    std::fill(drh.begin(), drh.end(), 0.0);
    for (int i = 0; i < hd; ++i) {
      const double d = dac[i];
      double* gw = g + o.wc + i * stride;
      const double* w = p + o.wc + i * stride;
      gw[obs] += d;
      g[o.bc + i] += d;
      for (int j = 0; j < hd; ++j) {
        gw[in + j] += d * rh[j];
        drh[j] += d * w[in + j];
      }
    }
    for (int j = 0; j < hd; ++j) {
      const double dr = drh[j] * hin[j];
      dh_prev[j] += drh[j] * r[j];
      dar[j] = dr * r[j] * (1.0 - r[j]);
    }
    for (int i = 0; i < hd; ++i) {
      double* gwz = g + o.wz + i * stride;
      double* gwr = g + o.wr + i * stride;
      const double* wz = p + o.wz + i * stride;
      const double* wr = p + o.wr + i * stride;
      gwz[obs] += daz[i];
      gwr[obs] += dar[i];
      g[o.bz + i] += daz[i];
      g[o.br + i] += dar[i];
      for (int j = 0; j < hd; ++j) {
        gwz[in + j] += daz[i] * hin[j];
        gwr[in + j] += dar[i] * hin[j];
        dh_prev[j] += daz[i] * wz[in + j] + dar[i] * wr[in + j];
      }
    }
    dh.swap(dh_prev);
  }
}

GruPolicy::GruPolicy(int input_dim, int hidden_dim, std::vector<double> params)
    : input_dim_(input_dim), hidden_dim_(hidden_dim), params_(std::move(params)) {
  if (params_.size() != GruParamCount(input_dim, hidden_dim)) {
    throw std::invalid_argument("gru policy: parameter count mismatch");
  }
}

StepOutput GruPolicy::Step(int observation, std::span<const double> hidden,
                           std::span<double> next_hidden) const {
  return net().Step(observation, hidden, next_hidden);
}

ParamVector GruPolicy::ToParamVector() const {
  return ParamVector{GruLayout(input_dim_, hidden_dim_), params_};
}

GruTapeWeights SliceGruWeights(ad::Var params, int input_dim, int hidden_dim) {
  const ParamLayout layout = GruLayout(input_dim, hidden_dim);
  if (params.value().size() != layout.size()) {
    throw std::invalid_argument("gru tape: parameter count mismatch");
  }
  auto take = [&](const std::string& name) {
    const ParamSlice& s = layout.Find(name);
    return s.cols == 0 ? ad::Slice(params, s.offset, 1, s.rows)
                       : ad::Slice(params, s.offset, 2, s.rows, s.cols);
  };
  GruTapeWeights w;
  w.input_dim = input_dim;
  w.hidden_dim = hidden_dim;
  w.wz = take("gate_update.weight");
  w.bz = take("gate_update.bias");
  w.wr = take("gate_reset.weight");
  w.br = take("gate_reset.bias");
  w.wc = take("candidate.weight");
  w.bc = take("candidate.bias");
  w.wa = take("actor.weight");
  w.ba = take("actor.bias");
  w.wv = take("critic.weight");
  w.bv = take("critic.bias");
  return w;
}

GruTapeStep GruTapeForward(const GruTapeWeights& w, int observation,
                           ad::Var hidden) {
  using namespace ad;
  if (observation < 0 || observation >= w.input_dim) {
    throw std::invalid_argument("gru tape: observation out of range");
  }
  Tape* tape = hidden.tape();
  Tensor onehot = Tensor::Zeros(1, w.input_dim);
  onehot[observation] = 1.0;
  Var x = tape->Constant(std::move(onehot));
  Var xh = Concat(x, hidden);
  Var z = Sigmoid(MatVec(w.wz, xh) + w.bz);
  Var r = Sigmoid(MatVec(w.wr, xh) + w.br);
  Var c = Tanh(MatVec(w.wc, Concat(x, r * hidden)) + w.bc);
  Var h_next = Affine(z, -1.0, 1.0) * hidden + z * c;
  GruTapeStep out;
  out.hidden = h_next;
  out.logits = MatVec(w.wa, h_next) + w.ba;
  out.value = Element(MatVec(w.wv, h_next) + w.bv, 0);
  return out;
}

}  // namespace shaping
