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

#include "shaping/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace shaping {

void AdamStep(std::span<double> params, std::span<const double> grads,
              AdamState& state, const AdamConfig& config, bool ascend) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n) {
    throw std::invalid_argument("adam: shape mismatch");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  // m_hat / (sqrt(v_hat) + eps) rewritten with the bias corrections folded
  // into the step size and epsilon, which keeps the loop branch-free.
  const double step = (ascend ? 1.0 : -1.0) * config.lr * std::sqrt(c2) / c1;
  const double eps = config.eps * std::sqrt(c2);
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  double* p = params.data();
  double* m = state.m.data();
  double* v = state.v.data();
  const double* g = grads.data();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] += step * m[i] / (std::sqrt(v[i]) + eps);
  }
}

double GlobalNorm(std::span<const double> grads) {
  // Four independent partial sums so the reduction vectorizes.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = grads.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int k = 0; k < 4; ++k) acc[k] += grads[i + k] * grads[i + k];
  }
  for (; i < n; ++i) acc[0] += grads[i] * grads[i];
  return std::sqrt((acc[0] + acc[1]) + (acc[2] + acc[3]));
}

double ClipGlobalNorm(std::span<double> grads, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw std::invalid_argument("clip_global_norm: max_norm must be > 0");
  }
  const double norm = GlobalNorm(grads);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grads) g *= s;
  }
  return norm;
}

}  // namespace shaping
