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

#include "shaping/tensor.hpp"

#include <stdexcept>

namespace shaping {

Tensor::Tensor(int rank, std::size_t rows, std::size_t cols,
               std::vector<double> data)
    : rank_(rank), dims_{rows, cols}, data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("tensor: data length " +
                                std::to_string(data_.size()) +
                                " does not match shape " + ShapeString());
  }
}

Tensor Tensor::Scalar(double v) { return Tensor(0, 1, 1, {v}); }

Tensor Tensor::Vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, 1, std::move(values));
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor(2, rows, cols, std::move(values));
}

Tensor Tensor::Zeros(int rank, std::size_t rows, std::size_t cols) {
  if (rank == 0) return Scalar(0.0);
  if (rank == 1) return Tensor(1, rows, 1, std::vector<double>(rows, 0.0));
  return Tensor(2, rows, cols, std::vector<double>(rows * cols, 0.0));
}

Tensor Tensor::ZerosLike(const Tensor& other) {
  return Full(other, 0.0);
}

Tensor Tensor::Full(const Tensor& shape_of, double v) {
  return Tensor(shape_of.rank_, shape_of.dims_[0], shape_of.dims_[1],
                std::vector<double>(shape_of.size(), v));
}

std::string Tensor::ShapeString() const {
  switch (rank_) {
    case 0:
      return "[]";
    case 1:
      return "[" + std::to_string(dims_[0]) + "]";
    default:
      return "[" + std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) +
             "]";
  }
}

}  // namespace shaping
