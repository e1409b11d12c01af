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

#ifndef SHAPING_GRU_HPP_
#define SHAPING_GRU_HPP_

#include <array>
#include <span>
#include <vector>

#include "shaping/autodiff.hpp"
#include "shaping/episode.hpp"
#include "shaping/params.hpp"
#include "shaping/rng.hpp"

namespace shaping {

inline constexpr int kDefaultHiddenDim = 16;
inline constexpr int kNumActions = 2;

// Slice order: gate_update, gate_reset, candidate (each [H x (I+H)] weight
// plus [H] bias), actor [2 x H] + [2], critic [1 x H] + [1].
ParamLayout GruLayout(int input_dim, int hidden_dim = kDefaultHiddenDim);
std::size_t GruParamCount(int input_dim, int hidden_dim = kDefaultHiddenDim);

// Scaled-uniform gate weights, +-0.01 heads, zero biases.
std::vector<double> InitGruParams(int input_dim, int hidden_dim, Rng& rng);

// Non-owning view of a GRU actor-critic over a flat parameter span. The
// input is a one-hot observation code in [0, input_dim).
//
//   z  = sigmoid(Wz [x, h] + bz)
//   r  = sigmoid(Wr [x, h] + br)
//   c  = tanh(Wc [x, r*h] + bc)
//   h' = (1 - z) * h + z * c
//   logits = Wa h' + ba,  value = Wv h' + bv
class GruNet {
 public:
  GruNet(int input_dim, int hidden_dim, std::span<const double> params);

  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }
  std::span<const double> params() const { return params_; }

  StepOutput Step(int observation, std::span<const double> hidden,
                  std::span<double> next_hidden) const;

 private:
  friend class GruUnroll;

  struct Offsets {
    std::size_t wz, bz, wr, br, wc, bc, wa, ba, wv, bv;
  };

  // Gate pre-activations need the cache for backprop; Step skips it.
  void Forward(int observation, const double* h, double* z, double* r,
               double* rh, double* c, double* h_next) const;
  StepOutput Heads(const double* h_next) const;

  int input_dim_;
  int hidden_dim_;
  std::span<const double> params_;
  Offsets off_;
};

// Forward unroll that keeps activations for backprop through time.
class GruUnroll {
 public:
  GruUnroll(const GruNet& net, std::span<const int> observations,
            std::span<const double> initial_hidden);

  std::size_t size() const { return outputs_.size(); }
  const std::vector<StepOutput>& outputs() const { return outputs_; }
  std::span<const double> final_hidden() const;

  // Accumulates d loss / d params into `grad` given the loss sensitivity to
  // each step's logits and value.
  void Backward(std::span<const std::array<double, 2>> dlogits,
                std::span<const double> dvalues, std::span<double> grad) const;

 private:
  GruNet net_;
  std::vector<int> obs_;
  // Per-step [H] blocks: input hidden, z, r, r*h, candidate, output hidden.
  std::vector<double> h_in_, z_, r_, rh_, c_, h_out_;
  std::vector<StepOutput> outputs_;
};

// Policy owning its parameters.
class GruPolicy final : public Policy {
 public:
  GruPolicy(int input_dim, int hidden_dim, std::vector<double> params);

  int HiddenSize() const override { return hidden_dim_; }
  StepOutput Step(int observation, std::span<const double> hidden,
                  std::span<double> next_hidden) const override;

  int input_dim() const { return input_dim_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  GruNet net() const { return GruNet(input_dim_, hidden_dim_, params_); }
  ParamVector ToParamVector() const;

 private:
  int input_dim_;
  int hidden_dim_;
  std::vector<double> params_;
};

// Tape-recorded version of the same network, for higher-order gradients.
struct GruTapeWeights {
  int input_dim = 0;
  int hidden_dim = 0;
  ad::Var wz, bz, wr, br, wc, bc, wa, ba, wv, bv;
};

GruTapeWeights SliceGruWeights(ad::Var params, int input_dim, int hidden_dim);

struct GruTapeStep {
  ad::Var logits;
  ad::Var value;
  ad::Var hidden;
};

GruTapeStep GruTapeForward(const GruTapeWeights& w, int observation,
                           ad::Var hidden);

}  // namespace shaping

#endif  // SHAPING_GRU_HPP_
