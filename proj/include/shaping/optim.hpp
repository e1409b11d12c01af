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

#ifndef SHAPING_OPTIM_HPP_
#define SHAPING_OPTIM_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace shaping {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  static AdamState Zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}; }
};

// Bias-corrected Adam. Descends by default; `ascend` flips the sign.
void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, const AdamConfig& config, bool ascend = false);

double GlobalNorm(std::span<const double> grads);

// Rescales in place so the L2 norm is at most max_norm. Returns the
// pre-clip norm.
double ClipGlobalNorm(std::span<double> grads, double max_norm);

}  // namespace shaping

#endif  // SHAPING_OPTIM_HPP_
