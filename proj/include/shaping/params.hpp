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

#ifndef SHAPING_PARAMS_HPP_
#define SHAPING_PARAMS_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "shaping/tensor.hpp"

namespace shaping {

struct ParamSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  // 0 marks a vector-shaped slice.
  std::size_t cols = 0;

  std::size_t size() const { return rows * (cols == 0 ? 1 : cols); }
  bool operator==(const ParamSlice&) const = default;
};

class ParamLayout {
 public:
  ParamLayout() = default;

  void AddMatrix(std::string name, std::size_t rows, std::size_t cols);
  void AddVector(std::string name, std::size_t rows);

  const std::vector<ParamSlice>& slices() const { return slices_; }
  const ParamSlice& Find(const std::string& name) const;
  std::size_t size() const { return size_; }
  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<ParamSlice> slices_;
  std::size_t size_ = 0;
};

// Flat parameter genome plus the descriptor mapping slices to named weights.
struct ParamVector {
  ParamLayout layout;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  std::map<std::string, Tensor> Unflatten() const;
  static ParamVector Flatten(const ParamLayout& layout,
                             const std::map<std::string, Tensor>& named);
};

}  // namespace shaping

#endif  // SHAPING_PARAMS_HPP_
