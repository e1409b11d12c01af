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

#ifndef SHAPING_AUTODIFF_HPP_
#define SHAPING_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shaping/tensor.hpp"

namespace shaping::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Tensor& value() const;
  double item() const { return value().item(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

enum class Op : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kAffine,
  kSigmoid,
  kTanh,
  kExp,
  kLog,
  kReciprocal,
  kMatVec,
  kMatTVec,
  kOuter,
  kConcat,
  kSlice,
  kEmbed,
  kSum,
  kBroadcast,
  kMulScalar,
  kLogSumExp,
};

// Append-only record of primitive operations. Node order is a topological
// order. Backward passes are expressed with the same primitives, so a
// gradient computed with create_graph=true is itself differentiable.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input.
  Var Leaf(Tensor value);
  // Input excluded from differentiation.
  Var Constant(Tensor value);
  Var Scalar(double v) { return Constant(Tensor::Scalar(v)); }

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // d output / d wrt[i]. output must be a scalar. With create_graph the
  // backward pass is recorded, so the returned Vars can be differentiated
  // again; otherwise they are constants.
  std::vector<Var> Gradient(Var output, std::span<const Var> wrt,
                            bool create_graph);

  // First-order gradient values. Temporary backward nodes are discarded.
  std::vector<Tensor> GradientValues(Var output, std::span<const Var> wrt);

  // Internal: records a node. Parents not requiring grad are still stored
  // but never receive gradient.
  Var Record(Op op, Tensor value, Var a, Var b = Var(), double scale = 0.0,
             double shift = 0.0, std::size_t offset = 0, int aux_rank = 0,
             std::size_t aux_rows = 0, std::size_t aux_cols = 0);

 private:
  struct Node {
    Tensor value;
    Op op = Op::kLeaf;
    bool requires_grad = false;
    std::uint8_t num_parents = 0;
    std::uint32_t parents[2] = {0, 0};
    double scale = 0.0;
    double shift = 0.0;
    std::size_t offset = 0;
    int aux_rank = 0;
    std::size_t aux_rows = 0;
    std::size_t aux_cols = 0;
  };

  void Backprop(std::uint32_t id, Var grad, Var* parent_grads);

  std::vector<Node> nodes_;
  bool recording_ = true;
};

// Elementwise on equal shapes.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Neg(Var a);
// scale * a + shift.
Var Affine(Var a, double scale, double shift);
Var Scale(Var a, double scale);
Var Sigmoid(Var a);
Var Tanh(Var a);
Var Exp(Var a);
Var Log(Var a);
Var Reciprocal(Var a);

// Matrix [m x k] times vector [k].
Var MatVec(Var w, Var x);
// Transposed matrix [m x k] times vector [m].
Var MatTVec(Var w, Var x);
// a [m] times b [k] transposed, giving [m x k].
Var Outer(Var a, Var b);
// Vector concatenation.
Var Concat(Var a, Var b);
// Reads size-of-shape elements starting at flat offset and reshapes.
Var Slice(Var a, std::size_t offset, int rank, std::size_t rows,
          std::size_t cols = 1);
Var Element(Var a, std::size_t index);
// Zero tensor shaped (rank, rows, cols) with a's data placed at offset.
Var Embed(Var a, std::size_t offset, int rank, std::size_t rows,
          std::size_t cols = 1);
// Sum of all elements, giving a scalar.
Var Sum(Var a);
// Scalar broadcast to the shape (rank, rows, cols).
Var Broadcast(Var s, int rank, std::size_t rows, std::size_t cols = 1);
Var MulScalar(Var a, Var s);
// log(sum(exp(a))) over a vector, giving a scalar.
Var LogSumExp(Var a);
Var StopGradient(Var a);

// Log-softmax entry `index` of a logits vector.
Var LogSoftmaxAt(Var logits, std::size_t index);

inline Var operator+(Var a, Var b) { return Add(a, b); }
inline Var operator-(Var a, Var b) { return Sub(a, b); }
inline Var operator*(Var a, Var b) { return Mul(a, b); }
inline Var operator-(Var a) { return Neg(a); }

}  // namespace shaping::ad

#endif  // SHAPING_AUTODIFF_HPP_
