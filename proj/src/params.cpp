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

#include "shaping/params.hpp"

#include <algorithm>
#include <stdexcept>

namespace shaping {

void ParamLayout::AddMatrix(std::string name, std::size_t rows,
                            std::size_t cols) {
  slices_.push_back({std::move(name), size_, rows, cols});
  size_ += rows * cols;
}

void ParamLayout::AddVector(std::string name, std::size_t rows) {
  slices_.push_back({std::move(name), size_, rows, 0});
  size_ += rows;
}

const ParamSlice& ParamLayout::Find(const std::string& name) const {
  auto it = std::find_if(slices_.begin(), slices_.end(),
                         [&](const ParamSlice& s) { return s.name == name; });
  if (it == slices_.end()) {
    throw std::out_of_range("param layout has no slice '" + name + "'");
  }
  return *it;
}

std::map<std::string, Tensor> ParamVector::Unflatten() const {
  if (values.size() != layout.size()) {
    throw std::invalid_argument("unflatten: value count does not match layout");
  }
  std::map<std::string, Tensor> out;
  for (const ParamSlice& s : layout.slices()) {
    std::vector<double> v(values.begin() + s.offset,
                          values.begin() + s.offset + s.size());
    out.emplace(s.name, s.cols == 0
                            ? Tensor::Vector(std::move(v))
                            : Tensor::Matrix(s.rows, s.cols, std::move(v)));
  }
  return out;
}

ParamVector ParamVector::Flatten(const ParamLayout& layout,
                                 const std::map<std::string, Tensor>& named) {
  ParamVector pv;
  pv.layout = layout;
  pv.values.assign(layout.size(), 0.0);
  for (const ParamSlice& s : layout.slices()) {
    auto it = named.find(s.name);
    if (it == named.end()) {
      throw std::invalid_argument("flatten: missing weight '" + s.name + "'");
    }
    if (it->second.size() != s.size()) {
      throw std::invalid_argument("flatten: weight '" + s.name +
                                  "' has wrong size");
    }
    std::copy(it->second.data().begin(), it->second.data().end(),
              pv.values.begin() + s.offset);
  }
  return pv;
}

}  // namespace shaping
