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

#ifndef SHAPING_TENSOR_HPP_
#define SHAPING_TENSOR_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shaping {

// Dense row-major tensor of rank 0, 1 or 2.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}

  static Tensor Scalar(double v);
  static Tensor Vector(std::vector<double> values);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);
  static Tensor Zeros(int rank, std::size_t rows, std::size_t cols = 1);
  static Tensor ZerosLike(const Tensor& other);
  static Tensor Full(const Tensor& shape_of, double v);

  int rank() const { return rank_; }
  std::size_t rows() const { return dims_[0]; }
  std::size_t cols() const { return dims_[1]; }
  std::size_t size() const { return data_.size(); }
  bool SameShape(const Tensor& o) const {
    return rank_ == o.rank_ && dims_ == o.dims_;
  }
  std::string ShapeString() const;

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * dims_[1] + c]; }
  double item() const { return data_[0]; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  std::vector<double>& storage() { return data_; }

 private:
  Tensor(int rank, std::size_t rows, std::size_t cols,
         std::vector<double> data);

  int rank_ = 0;
  // Rank 0: {1, 1}. Rank 1: {n, 1}. Rank 2: {rows, cols}.
  std::array<std::size_t, 2> dims_{1, 1};
  std::vector<double> data_;
};

}  // namespace shaping

#endif  // SHAPING_TENSOR_HPP_
